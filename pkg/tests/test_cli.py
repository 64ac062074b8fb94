import csv
import json

import jsonschema
import numpy as np
import pytest

from pinchlab import cli, report
from pinchlab.errors import SolverError
from pinchlab.geometry import generate_icosphere, load_off, save_off
from pinchlab.odecmp import Profile1D, compare_cauchy, write_profile_csv


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def s3_off(tmp_path_factory):
    p = tmp_path_factory.mktemp("mesh") / "s3.off"
    save_off(generate_icosphere(3), p)
    return p


def test_gen_icosphere(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "icosphere", "--subdiv", 4, "-o", tmp_path / "s4.off")
    assert code == 0
    assert load_off(tmp_path / "s4.off").n_vertices == 2562
    assert json.loads(out)["n_vertices"] == 2562


def test_gen_spheroid(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "spheroid", "--ratio", 1.2, "--subdiv", 3, "-o", tmp_path / "e.off")
    assert code == 0
    assert load_off(tmp_path / "e.off").curvature.K_min > 0
    assert json.loads(out)["ratio"] == 1.2


def test_gen_dumbbell_warns(capsys):
    code, out, err = run(capsys, "gen", "dumbbell", "--neck", 0.3, "--subdiv", 3)
    assert code == 0
    assert "hypothesis violated: K_min < 0" in err
    assert "# hypothesis_violated: true" in out
    assert out.startswith("OFF\n")


def test_gen_bad_ratio(capsys):
    code, _, err = run(capsys, "gen", "spheroid", "--ratio", 9, "--subdiv", 1)
    assert code == 2 and "axis_ratio" in err


def test_diagnose_report_validates(s3_off, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(capsys, "diagnose", s3_off, "-o", out)[0] == 0
    rep = json.loads(out.read_text())
    jsonschema.validate(rep, report.load_schema())
    assert rep["schema_version"] == report.SCHEMA_VERSION
    assert [b["k"] for b in rep["pk"]] == [1, 2, 3]
    assert len(rep["equator"]) == 9
    assert rep["surface"]["rescaled"] and rep["surface"]["K_min"] == pytest.approx(1.0)


def test_diagnose_k_max_one(s3_off, capsys):
    code, out, _ = run(capsys, "diagnose", s3_off, "--k-max", 1, "--eta-grid", "0.1")
    assert code == 0
    rep = json.loads(out)
    assert [b["k"] for b in rep["pk"]] == [1]
    assert [(e["k"], e["eta"]) for e in rep["equator"]] == [(1, 0.1)]


def test_diagnose_no_rescale(s3_off, capsys):
    rep = json.loads(run(capsys, "diagnose", s3_off, "--k-max", 1, "--no-rescale")[1])
    assert rep["surface"]["scale_factor"] == 1.0 and not rep["surface"]["rescaled"]


def test_config_precedence(s3_off, tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("seed = 5\n[diagnose]\nk_max = 1\neta_grid = [0.2]\n")
    rep = json.loads(run(capsys, "--config", cfg, "diagnose", s3_off)[1])
    assert rep["provenance"]["seed"] == 5
    assert rep["provenance"]["config"]["k_max"] == 1
    rep = json.loads(run(capsys, "--config", cfg, "diagnose", s3_off, "--k-max", 2, "--seed", 1)[1])
    assert rep["provenance"]["seed"] == 1
    assert rep["provenance"]["config"]["k_max"] == 2
    assert rep["provenance"]["config"]["eta_grid"] == [0.2]


def test_diagnose_hypothesis_violation(tmp_path, capsys):
    p = tmp_path / "d.off"
    run(capsys, "gen", "dumbbell", "--neck", 0.3, "--subdiv", 2, "-o", p)
    code, _, err = run(capsys, "diagnose", p)
    assert code == 2 and "hypothesis violated" in err
    code, out, err = run(capsys, "diagnose", p, "--force", "--k-max", 2)
    assert code == 0
    rep = json.loads(out)
    assert rep["surface"]["hypothesis_violated"]
    jsonschema.validate(rep, report.load_schema())
    for path in rep["null_reasons"]:
        assert path.startswith(("equator.", "pk.", "metric."))


def test_diagnose_bad_mesh(tmp_path, capsys):
    p = tmp_path / "bad.off"
    p.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    code, _, err = run(capsys, "diagnose", p)
    assert code == 2 and "boundary" in err
    assert run(capsys, "diagnose", tmp_path / "missing.off")[0] == 2


def test_diagnose_solver_failure(s3_off, capsys, monkeypatch):
    def fail(*a, **k):
        raise SolverError("no convergence", 1e-3)

    monkeypatch.setattr(report, "compute_spectrum", fail)
    code, _, err = run(capsys, "diagnose", s3_off)
    assert code == 4 and "eigensolver" in err


def test_report_deterministic(s3_off, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "diagnose", s3_off, "--k-max", 2, "-o", a)
    run(capsys, "diagnose", s3_off, "--k-max", 2, "-o", b)
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    for section, key in report.TIMESTAMP_FIELDS:
        ra[section].pop(key)
        rb[section].pop(key)
    assert report.dumps_report(ra) == report.dumps_report(rb)


def test_sweep_single_point_rejected(capsys):
    code, _, err = run(capsys, "sweep", "spheroid", "--grid", "1.0")
    assert code == 2 and "3 grid points" in err


def test_sweep_non_monotone_rejected(capsys):
    assert run(capsys, "sweep", "spheroid", "--grid", "1.0,1.1,1.05", "--subdiv", 1)[0] == 2


def test_sweep_outputs(tmp_path, capsys):
    out = tmp_path / "sw"
    code, stdout, _ = run(capsys, "sweep", "spheroid", "--grid", "0.9,1.0,1.1,1.2", "--subdiv", 2, "-o", out)
    assert code == 0
    summary = json.loads(stdout)
    assert summary == json.loads((out / "sweep.json").read_text())
    for v in summary["trends"].values():
        assert v is None or -1 <= v <= 1
    with open(out / "sweep.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 5
    assert len({len(r) for r in rows}) == 1
    for g in ("0.9", "1", "1.1", "1.2"):
        jsonschema.validate(json.loads((out / f"report_ratio_{g}.json").read_text()), report.load_schema())


def test_sweep_dumbbell_forced(tmp_path, capsys):
    out = tmp_path / "db"
    code, _, _ = run(capsys, "sweep", "dumbbell", "--grid", "0.3,0.5,0.7", "--subdiv", 2, "--k-max", 1, "--force", "-o", out)
    assert code == 0
    with open(out / "sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["hypothesis_violated"] for r in rows] == ["True"] * 3


def test_sweep_failures_recorded(capsys):
    res = report.sweep("dumbbell", [0.3, 0.5, 0.7], 1, report.DiagnoseConfig(k_max=1))
    assert len(res.errors) == 3
    assert all("HypothesisViolation" in e for e in res.errors.values())
    assert len(res.rows) == 3


def _profile(tmp_path, f, l, h):
    p = tmp_path / "p.csv"
    write_profile_csv(Profile1D.sample(f, l, h), p)
    return p


def test_ode_cos(tmp_path, capsys):
    code, out, _ = run(capsys, "ode", _profile(tmp_path, np.cos, np.pi, 0.01), "--mode", "cauchy", "--a", 1, "--b", 0)
    assert code == 0 and json.loads(out)["bound_ok"] is True


def test_ode_matches_library(tmp_path, capsys):
    f = lambda t: np.cos(t) + 0.01 * np.sin(3 * t)  # noqa: E731
    p = _profile(tmp_path, f, np.pi, 0.001)
    out = json.loads(run(capsys, "ode", p, "--mode", "cauchy", "--a", 1, "--b", 0)[1])
    ref = compare_cauchy(Profile1D.sample(f, np.pi, 0.001), 1.0, 0.0).as_dict()
    for key in ("sup_value", "sup_derivative", "eps", "eta", "bound"):
        assert out[key] == pytest.approx(ref[key], abs=1e-6)
    assert out["sup_value"] == pytest.approx(0.01, rel=0.1)


def test_ode_near_conjugate(tmp_path, capsys):
    code, _, err = run(capsys, "ode", _profile(tmp_path, np.cos, 3.14, 0.01), "--mode", "boundary", "--a", 1, "--b", -1)
    assert code == 3 and "guard" in err


def test_ode_parse_error(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("t,v\n0,1\n0.1,x\n")
    code, _, err = run(capsys, "ode", p, "--mode", "cauchy", "--a", 1, "--b", 0)
    assert code == 2 and "line 3" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["ode"])
    assert e.value.code == 2
