import json
import os

import pytest
from hypothesis import given, strategies as st

from conelp import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_indices_example(capsys):
    code, out, _ = run(capsys, "bergman", "indices", "--n", "3", "--r", "2", "--nu", "1.5", "--p", "2")
    assert code == 0
    assert json.loads(out) == {"q_nu": 4, "q_nu_p": 8, "q_tilde": "inf"}


def test_quad_gamma_row(capsys):
    code, out, _ = run(capsys, "quad", "gamma", "--cone", "lightcone3", "--s", "2,2")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "cone,s,closed_form,quadrature,rel_err"
    assert float(row.split(",")[-1]) < 1e-6


def test_classify_reports_reason(capsys):
    code, out, _ = run(capsys, "bergman", "classify", "--nu", "2", "--p", "4", "--q", "10")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "Unbounded" and doc["reason"] in cli_reasons()


def cli_reasons():
    from conelp.bergman import REASONS
    return REASONS


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[lattice]\nbogus = 1\n")
    code, _, err = run(capsys, "--config", str(cfg), "bergman", "indices")
    assert code == 2 and "bogus" in err


def test_unknown_section_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[plotting]\ncolor = red\n")
    assert run(capsys, "--config", str(cfg), "bergman", "indices")[0] == 2


def test_config_from_environment(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[norm]\nnu = oops\n")
    monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
    assert run(capsys, "bergman", "indices")[0] == 2


def test_bad_usage_exit_code(capsys):
    assert run(capsys, "lattice", "frobnicate")[0] == 2
    assert run(capsys, "quad", "gamma", "--cone", "cube3", "--s", "1")[0] == 2


def test_verification_failure_exit_code(tmp_path, capsys):
    cfg = tmp_path / "strict.ini"
    cfg.write_text("[tolerance]\ngamma = 1e-300\n")
    code, _, err = run(capsys, "--config", str(cfg), "quad", "gamma", "--s", "2,2")
    assert code == 1
    failures = json.loads(err)["failures"]
    assert failures[0]["check"] == "gamma"


def test_lattice_output_is_byte_identical(capsys, tmp_path):
    cfg = tmp_path / "small.ini"
    cfg.write_text("[lattice]\nhi = 4.0\nsamples = 5000\n")
    a = run(capsys, "--config", str(cfg), "lattice", "gen", "--save", str(tmp_path / "l.json"))
    b = run(capsys, "--config", str(cfg), "lattice", "gen")
    assert a[0] == b[0] == 0
    assert a[1] == b[1]
    code, out, _ = run(capsys, "--config", str(cfg), "lattice", "dual", "--input",
                       str(tmp_path / "l.json"))
    assert code == 0 and json.loads(out)["report"]["ok"]


def test_region_plot_writes_svg_and_csv(tmp_path, capsys):
    svg = tmp_path / "r.svg"
    csv = tmp_path / "r.csv"
    code, _, _ = run(capsys, "--out", str(svg), "bergman", "region-plot", "--nu", "3/2",
                     "--steps", "8", "--csv", str(csv))
    assert code == 0
    assert svg.read_text().startswith("<svg")
    assert csv.read_text().splitlines()[0] == "inv_q,inv_p,verdict,reason"


def test_threads_flag_sets_environment(capsys, monkeypatch):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    assert run(capsys, "--threads", "1", "bergman", "indices")[0] == 0
    assert os.environ["OMP_NUM_THREADS"] == "1"
    assert run(capsys, "--threads", "0", "bergman", "indices")[0] == 2


def test_lp_box_saves_field(tmp_path, capsys):
    cfg = tmp_path / "out.ini"
    cfg.write_text(f"[grid]\nshape = 16\n[output]\ndirectory = {tmp_path}\nprefix = t\n")
    code, out, _ = run(capsys, "--config", str(cfg), "lp", "box", "--beta", "1", "--save")
    doc = json.loads(out)
    assert code == 0 and doc["round_trip_error"] < 1e-9
    assert (tmp_path / "t_box.bin").exists() and (tmp_path / "t_box.json").exists()
    code, out, _ = run(capsys, "--config", str(cfg), "lp", "mihlin", "--field",
                       str(tmp_path / "t_box.bin"))
    assert code == 0 and json.loads(out)["round_trip_error"] < 1e-10


def test_selftest_subset(capsys):
    code, out, err = run(capsys, "selftest", "--only", "9")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and "[PASS]" in err


@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    assert float(cli.fmt_float(x)) == x


def test_json_writer_handles_special_values():
    text = cli.dumps({"a": float("inf"), "b": float("nan"), "c": [1.0, 2], "d": 1 + 2j})
    assert json.loads(text) == {"a": "inf", "b": None, "c": [1.0, 2], "d": [1.0, 2.0]}


def test_config_defaults_documented():
    cfg = cli.load_config(None)
    assert cfg == cli.DEFAULTS and cfg is not cli.DEFAULTS
