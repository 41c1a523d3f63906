import json
import math
import subprocess
import sys

import numpy as np
import pytest

from liehamsys.algebra_core import algebra_to_json, builtin_algebra
from liehamsys.cli import EXIT_FAILED, EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_SCHEMA, config_hash, main
from liehamsys.dynamics import Trajectory

SINE = {"kind": "sinusoid", "amplitude": 1.0, "omega": 1.0}
COS = {"kind": "sinusoid", "amplitude": 1.0, "omega": 1.0, "phase": math.pi / 2}


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_verify_all(tmp_path, capsys):
    assert main(["verify", "all", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["schema"] == 1
    assert report["failures"] == 0
    labels = [r["identity"] for r in report["sections"]["identities"]["results"]]
    assert any("F^(4)" in lab for lab in labels) and any("F^(3) = F^(2)" in lab for lab in labels)


def test_verify_corrupted_table(tmp_path):
    doc = algebra_to_json(builtin_algebra("sl2"))
    doc["structure"][0]["num"] += 1
    doc["name"] = "corrupted"
    cfg = write(tmp_path, "bad.json", {"algebra": doc})
    assert main(["verify", "algebra", "--config", cfg, "--out", str(tmp_path)]) == EXIT_FAILED
    report = json.loads((tmp_path / "verify_report.json").read_text())
    kinds = {v["kind"] for v in report["sections"]["algebra:corrupted"]["violations"]}
    assert "jacobi" in kinds or "antisymmetry" in kinds


def test_simulate_hyperbolic_matches_cosh(tmp_path):
    cfg = write(tmp_path, "sim.json", {"preset": "hyperbolic", "params": {"b": COS}, "span": [0, 5], "dt": 1e-3, "x0": [1, 0, 0, 0]})
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_OK
    tr = Trajectory.from_csv((out / "trajectory.csv").read_text())
    assert np.max(np.abs(tr.states[:, 0] - np.cosh(np.sin(tr.times)))) < 1e-8
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema"] == 1 and manifest["dt"] == 1e-3 and manifest["x0"] == [[1.0, 0.0, 0.0, 0.0]]
    assert manifest["config_hash"] == config_hash(json.loads(open(cfg).read()), 0)


def test_simulate_is_deterministic(tmp_path):
    cfg = write(tmp_path, "sim.json", {"system": "sp4", "coeffs": [SINE] * 10, "span": {"t0": 0, "t1": 1, "dt": 0.01}, "copies": 2})
    for name in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--seed", "5", "--out", str(tmp_path / name)]) == EXIT_OK
    for f in ("trajectory_1.csv", "trajectory_2.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_simulate_preset_writes_coefficients(tmp_path):
    cfg = write(tmp_path, "b.json", {"preset": "bateman", "params": {"m": 1, "k": 2, "gamma": 0.5}, "span": [0, 1], "dt": 0.01, "x0": [1, 0, 0, 1]})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    header = (tmp_path / "coefficients.csv").read_text().splitlines()[0]
    assert header == "t,b1,b2,b3,b4,b5,b6"


def test_simulate_sweep(tmp_path):
    cfg = write(
        tmp_path,
        "sweep.json",
        {"system": "h6", "coeffs": [SINE] * 6, "span": {"t1": 0.5, "dt": 0.01}, "sweep": [{"x0": [1, 0, 0, 1]}, {"x0": [0, 1, 1, 0]}]},
    )
    assert main(["simulate", "--sweep", "--workers", "2", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "run_1" / "trajectory.csv").exists()
    assert (tmp_path / "run_2" / "manifest.json").exists()
    assert json.loads((tmp_path / "sweep.json").read_text())["sweep"] == 2


def test_invariants_report(tmp_path):
    cfg = write(
        tmp_path,
        "inv.json",
        {"system": "sp4", "coeffs": [SINE] * 10, "span": {"t1": 5, "dt": 1e-3}, "invariant": {"system": "sp4", "casimir": "sp4_C2", "k": 2}},
    )
    assert main(["invariants", "--config", cfg, "--seed", "2", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "drift_report.json").read_text())
    assert set(report) >= {"invariant", "k", "t_grid_len", "max_rel_drift", "values_csv_path", "schema"}
    assert report["max_rel_drift"] < 1e-8


@pytest.mark.parametrize("system,count", [("h6", 6), ("sp4", 10), ("so13", 6)])
def test_superpose(tmp_path, system, count):
    cfg = write(tmp_path, "sup.json", {"system": system, "coeffs": [SINE, COS] + [0.3] * (count - 2), "span": {"t1": 5, "dt": 1e-3}})
    assert main(["superpose", "--config", cfg, "--seed", "4", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "superposition_report.json").read_text())
    assert report["sup_error"] <= 1e-6
    assert set(report["constants"]) == {"k1", "k2", "k3", "k4", "signs"}
    assert (tmp_path / "reconstruction.csv").exists()


def test_rank_and_reduce(tmp_path):
    cfg = write(tmp_path, "rank.json", {"representations": ["sp4_fundamental"], "points": 64})
    assert main(["rank", "--config", cfg, "--seed", "1", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "rank_report.json").read_text())
    assert report["ranks"]["sp4_fundamental"] == {"max": 4, "min": 4, "points": 64}
    assert main(["reduce-sl2", "--seed", "1", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "reduction_report.json").read_text())
    assert report["max_pushforward_residual"] <= 1e-9
    assert (tmp_path / "surface.csv").read_text().startswith("x1,x2,x3,lambda")


def test_schema_errors(tmp_path, capsys):
    bad_dt = write(tmp_path, "a.json", {"system": "h6", "coeffs": [1] * 6, "span": {"t1": 1, "dt": -1}})
    assert main(["simulate", "--config", bad_dt]) == EXIT_SCHEMA
    wrong_count = write(tmp_path, "b.json", {"system": "h6", "coeffs": [1] * 3, "span": {"t1": 1, "dt": 0.1}})
    assert main(["simulate", "--config", wrong_count]) == EXIT_SCHEMA
    (tmp_path / "c.json").write_text("{not json")
    assert main(["simulate", "--config", str(tmp_path / "c.json")]) == EXIT_SCHEMA
    unknown = write(tmp_path, "d.json", {"preset": "nope", "span": [0, 1], "dt": 0.1})
    assert main(["simulate", "--config", unknown]) == EXIT_SCHEMA
    assert "config error" in capsys.readouterr().err


def test_numerical_error_exit(tmp_path, capsys):
    short = {"kind": "tabulated", "times": [0, 0.5, 1], "values": [1, 1, 1]}
    cfg = write(tmp_path, "t.json", {"system": "h6", "coeffs": [short] + [0] * 5, "span": {"t1": 2, "dt": 0.1}, "x0": [1, 1, 1, 1]})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_NUMERIC
    assert "CoefficientSingular" in capsys.readouterr().err
    assert not (tmp_path / "o" / "trajectory.csv").exists()
    underdamped = write(tmp_path, "u.json", {"preset": "bateman", "params": {"m": 1, "k": 0.1, "gamma": 1}, "span": [0, 1], "dt": 0.1})
    assert main(["simulate", "--config", underdamped]) == EXIT_NUMERIC
    assert "InvalidParams" in capsys.readouterr().err


def test_io_errors(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_IO
    cfg = write(tmp_path, "s.json", {"system": "h6", "coeffs": [1] * 6, "span": {"t1": 0.1, "dt": 0.05}, "x0": [1, 1, 1, 1]})
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["simulate", "--config", cfg, "--out", str(blocker / "sub")]) == EXIT_IO


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "liehamsys.cli", "verify", "identities"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["failures"] == 0
