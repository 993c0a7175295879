import csv
import io
import json
import math
import subprocess
import sys

import pytest

from axiverify.cli import main
from axiverify.cli import pipelines
from axiverify.cli.config import ConfigError, RunConfig, parse_text
from axiverify.cli.report import FIELD_COLUMNS, Norm, ReportError, ResidualReport, emit_report


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def _rows(path):
    return list(csv.reader(io.StringIO(path.read_text())))


def test_verify_default_passes(tmp_path):
    code, out = _run(tmp_path, "verify")
    assert code == 0
    report = json.loads((out / "verify.json").read_text())
    assert report["all_passed"] is True
    for k in ("eq6_r", "eq7_z", "eq11_correct"):
        assert report["entries"][k]["linf"] <= 1e-12
    assert report["provenance"]["derivative_source"] == "analytic"
    assert report["config"]["case.name"] == "stagnation"
    expected = {"eq6_r", "eq7_z", "continuity", "curl", "eq10_F_supdev", "eq11_correct",
                "eq11_erroneous", "uw_identity_gap", "sup_uw"}
    assert set(report["entries"]) == expected


def test_verify_discrete_65(tmp_path):
    code, out = _run(tmp_path, "verify", "--set", "derivatives.source=discrete",
                     "--set", "grid.nr=65", "--set", "grid.nz=65")
    assert code == 0
    e = json.loads((out / "verify.json").read_text())["entries"]
    assert e["eq11_erroneous"]["linf"] >= 0.8
    assert e["eq11_correct"]["linf"] < 5e-3


def test_determinism(tmp_path):
    args = ("verify", "--set", "case.name=source+uniform", "--set", "derivatives.source=discrete")
    _, a = _run(tmp_path, *args, name="a")
    _, b = _run(tmp_path, *args, name="b")
    for f in ("verify.json", "verify_fields.csv"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_config_file_and_echo(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# uniform flow\ncase.name = uniform\ncase.U = 2   # faster\n\ngrid.nr = 5\ngrid.nz = 7\n")
    code, out = _run(tmp_path, "verify", "--config", str(cfg), "--set", "case.nu=0.25")
    assert code == 0
    report = json.loads((out / "verify.json").read_text())
    assert report["config"]["case.U"] == 2.0 and report["config"]["case.nu"] == 0.25
    assert report["grid"]["nr"] == 5 and report["grid"]["nz"] == 7
    # the echo is a complete config: rerunning from it reproduces the report
    echo = "\n".join(f"{k} = {'none' if v is None else v}" for k, v in report["config"].items())
    again = tmp_path / "again.cfg"
    again.write_text(echo)
    _, out2 = _run(tmp_path, "verify", "--config", str(again), name="again")
    assert (out2 / "verify.json").read_bytes() == (out / "verify.json").read_bytes()


def test_fields_csv_small_grid(tmp_path):
    code, out = _run(tmp_path, "verify", "--set", "grid.nr=3", "--set", "grid.nz=3")
    assert code == 0
    rows = _rows(out / "verify_fields.csv")
    assert tuple(rows[0]) == FIELD_COLUMNS
    body = rows[1:]
    assert len(body) == 9
    # j-major, then i
    assert [(r[0], r[1]) for r in body[:3]] == [("0", "0"), ("0.5", "0"), ("1", "0")]
    eq6 = FIELD_COLUMNS.index("eq6_r")
    for r in body:
        assert (r[eq6] == "") == (r[0] == "0")
        assert all(c not in ("nan", "NaN", "inf") for c in r)


def test_masked_nodes_omitted(tmp_path):
    code, out = _run(tmp_path, "verify", "--set", "case.name=source", "--set", "grid.zmin=-1",
                     "--set", "grid.nr=11", "--set", "grid.nz=21")
    rows = _rows(out / "verify_fields.csv")[1:]
    report = json.loads((out / "verify.json").read_text())
    assert report["provenance"]["masked_nodes"] > 0
    assert len(rows) == 11 * 21 - report["provenance"]["masked_nodes"]


def test_seventeen_digits(tmp_path):
    _, out = _run(tmp_path, "verify", "--set", "case.name=source")
    rows = _rows(out / "verify_fields.csv")[1:]
    psi = FIELD_COLUMNS.index("psi")
    assert any(len(r[psi].lstrip("-").replace(".", "").lstrip("0").split("e")[0]) == 17 for r in rows)
    assert all(float(r[psi]) == float(r[psi]) for r in rows)


@pytest.mark.parametrize(
    "args,code",
    [
        (("--set", "case.nu=-1"), 2),
        (("--set", "case.rho=0"), 2),
        (("--set", "grid.nr=2"), 2),
        (("--set", "grid.zmin=2"), 2),
        (("--set", "case.name=vortex"), 2),
        (("--set", "bogus.key=1"), 2),
        (("--set", "grid.nr=abc"), 2),
        (("--set", "psi.source=solve"), 2),
        (("--set", "case.nu=nan"), 2),
        (("--set", "derivatives.source=discrete", "--set", "thresholds.eq11_correct=1e-9"), 1),
        (("--set", "psi.source=solve", "--set", "derivatives.source=discrete", "--set", "solver.max_iter=1",
          "--set", "case.name=source"), 3),
        (("--set", "psi.source=solve", "--set", "derivatives.source=discrete", "--set", "case.name=source"), 0),
    ],
)
def test_exit_codes(tmp_path, args, code):
    assert _run(tmp_path, "verify", *args)[0] == code


def test_missing_config_file(tmp_path):
    assert _run(tmp_path, "verify", "--config", str(tmp_path / "nope.cfg"))[0] == 2


def test_overflowing_transform_is_config_error(tmp_path):
    assert _run(tmp_path, "verify", "--set", "case.nu=0.001", "--set", "case.A=5")[0] == 2


def test_solve_report_has_solver_block(tmp_path):
    code, out = _run(tmp_path, "verify", "--set", "psi.source=solve", "--set", "derivatives.source=discrete")
    report = json.loads((out / "verify.json").read_text())
    assert code == 0
    assert report["solver"]["converged"] is True
    assert report["solver"]["relative_residual"] <= 1e-10
    assert report["provenance"]["psi_source"] == "solve"


def test_falsify(tmp_path, capsys):
    code, out = _run(tmp_path, "falsify")
    assert code == 0
    assert "verdict: falsified" in capsys.readouterr().out
    summary = json.loads((out / "falsify.json").read_text())
    levels = summary["levels"]
    assert [lv["nr"] for lv in levels] == [17, 33, 65]
    for a, b in zip(levels, levels[1:]):
        assert 3.4 <= a["eq11_correct_linf"] / b["eq11_correct_linf"] <= 4.7
    assert levels[-1]["erroneous_change"] < 0.05
    assert levels[-1]["eq11_erroneous_linf"] >= 0.8
    assert summary["analytic_finest"]["sup_uw"] == pytest.approx(2.0, abs=1e-10)
    assert summary["analytic_finest"]["uw_gap_linf"] <= 1e-12
    rows = _rows(out / "falsify.csv")
    assert rows[0] == list(pipelines.FALSIFY_HEADER) and len(rows) == 4
    assert rows[1][rows[0].index("correct_ratio")] == ""


def test_falsify_uniform_indistinguishable(tmp_path, capsys):
    code, out = _run(tmp_path, "falsify", "--set", "case.name=uniform")
    assert code == 0
    assert json.loads((out / "falsify.json").read_text())["verdict"] == "indistinguishable"


def test_falsify_needs_three_levels(tmp_path):
    assert _run(tmp_path, "falsify", "--set", "study.levels=17,33")[0] == 2


def test_convergence_source(tmp_path):
    code, out = _run(tmp_path, "convergence", "--set", "case.name=source")
    assert code == 0
    rows = _rows(out / "convergence.csv")
    assert rows[0] == list(pipelines.CONVERGENCE_HEADER)
    assert rows[1][4] == ""
    for r in rows[2:]:
        assert 1.8 <= float(r[4]) <= 2.2


def test_convergence_stagnation_floor(tmp_path):
    code, out = _run(tmp_path, "convergence")
    assert code == 0
    assert all(r[4] == "floor" for r in _rows(out / "convergence.csv")[1:])


@pytest.mark.parametrize("levels", ["17", "17,31", "17,x"])
def test_convergence_bad_levels(tmp_path, levels):
    assert _run(tmp_path, "convergence", "--set", f"study.levels={levels}")[0] == 2


def test_non_finite_report_refused(tmp_path):
    report = ResidualReport("verify", {"eq6_r": Norm(math.nan, 0.0)}, {"eq6_r": 1.0}, {}, {}, {})
    with pytest.raises(ReportError):
        emit_report(report, "r,z\n", tmp_path / "x")
    assert not (tmp_path / "x").exists()


def test_non_finite_report_exit_code(tmp_path, monkeypatch):
    real = pipelines.run_verify

    def broken(cfg):
        result = real(cfg)
        result.report.entries["eq6_r"] = Norm(math.inf, math.inf)
        return result

    import axiverify.cli as cli

    monkeypatch.setattr(cli, "run_verify", broken)
    code, out = _run(tmp_path, "verify")
    assert code == 1
    assert not (out / "verify.json").exists()


def test_parse_text_errors():
    assert parse_text("a = 1 # c\n\n# only comment\nb=x=y") == {"a": "1", "b": "x=y"}
    with pytest.raises(ConfigError):
        parse_text("novalue")
    with pytest.raises(ConfigError):
        parse_text("= 3")
    with pytest.raises(ConfigError):
        RunConfig.resolve(overrides=["noequals"])


def test_thresholds():
    cfg = RunConfig.resolve(overrides=["thresholds.curl=0.5"])
    assert cfg.threshold("curl", None) == 0.5
    assert cfg.threshold("eq6_r", None) == 1e-10
    assert cfg.threshold("eq6_r", 2e-3) == pytest.approx(50 * 2e-3)


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "axiverify", "verify", "--out", str(tmp_path / "m"), "--set", "grid.nr=5"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "m" / "verify.json").exists()
