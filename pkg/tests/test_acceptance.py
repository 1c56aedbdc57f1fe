"""End-to-end acceptance checks; one PASS/FAIL line per criterion.

Run ``pytest -v tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py`` (lines go to stdout).
"""
import sys

import pytest

from conelp.acceptance import CRITERIA, run_criterion

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA],
                         ids=[f"{c[0]:02d}-{c[1].replace(' ', '-')}" for c in CRITERIA])
def test_criterion(number):
    res = run_criterion(number)
    ACCEPTANCE_LINES.append(res.line())
    print(res.line())
    assert res.passed, res.detail


if __name__ == "__main__":
    failed = 0
    for number, *_ in CRITERIA:
        res = run_criterion(number)
        print(res.line(), flush=True)
        failed += not res.passed
    sys.exit(1 if failed else 0)
