import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from conelp.jordan import parse_cone

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CONES = ["lightcone3", "lightcone5", "sym2", "sym3", "halfline"]

# filled by test_acceptance; printed at the end of the session
ACCEPTANCE_LINES = []


@pytest.fixture(params=CONES)
def cone(request):
    return parse_cone(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def family():
    from conelp.acceptance import family_setup
    return family_setup()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
