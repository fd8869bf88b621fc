import json
import subprocess
import sys

import numpy as np
import pytest

from pararealpy import OneStepIntegrator
from pararealpy.cli import main, solution_csv
from pararealpy.integrators import _REGISTRY, Trajectory
from pararealpy.problems import get_problem


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), np.array([[float(v) for v in l.split(",")] for l in lines[1:]])


def test_solve_showcase(tmp_path, capsys):
    out = tmp_path / "sol.csv"
    code, _, _ = run(["solve", "--problem", "sin_ty", "--coarse", "euler", "--fine", "euler",
                      "-N", 10, "-M", 500, "-K", 10, "--out", out], capsys)
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["t", "y_0"]
    assert rows.shape == (5001, 2)
    assert rows[0].tolist() == [-20.0, 10.0] and rows[-1, 0] == 20.0

    report = json.loads((tmp_path / "sol.report.json").read_text())
    assert set(report) >= {"config", "iterations_run", "increments", "wall_times_s", "errors"}
    assert set(report["errors"]) == {"per_iteration_boundary_sup", "right_endpoint_error"}
    assert report["iterations_run"] == 10 and len(report["increments"]) == 10
    assert len(report["wall_times_s"]) == 10
    assert report["errors"]["right_endpoint_error"][10] == 0.0
    assert report["config"]["n_fine"] == 500


def test_solve_zero_problem(tmp_path, capsys):
    out = tmp_path / "z.csv"
    code, _, _ = run(["solve", "--problem", "zero", "-N", 4, "-M", 3, "-K", 2, "--out", out],
                     capsys)
    assert code == 0
    _, rows = read_csv(out)
    assert np.all(rows[:, 1] == get_problem("zero").y0[0])
    assert len(rows) == 13


def test_solve_validation_exit_code(tmp_path, capsys):
    code, _, err = run(["solve", "-N", 0, "--out", tmp_path / "x.csv"], capsys)
    assert code == 2
    msg = json.loads(err.strip().splitlines()[-1])
    assert msg["error"] == "validation" and msg["field"] == "n_coarse"
    assert not list(tmp_path.iterdir())


@pytest.mark.parametrize("flags, field", [
    (["--problem", "nope"], "problem"),
    (["--coarse", "heun"], "integrator"),
    (["-M", "-1"], "n_fine"),
    (["--tolerance", "-1"], "tolerance"),
])
def test_invalid_config_writes_nothing(tmp_path, capsys, flags, field):
    code, _, err = run(["solve", *flags, "--out", tmp_path / "x.csv"], capsys)
    assert code == 2
    assert json.loads(err.strip())["field"] == field
    assert not list(tmp_path.iterdir())


def test_numeric_exit_code(tmp_path, capsys):
    blow = OneStepIntegrator("blowup", lambda d, t, y, f: y * 1e300)
    _REGISTRY["blowup"] = blow
    try:
        code, _, err = run(["solve", "--problem", "linear", "--coarse", "blowup",
                            "--out", tmp_path / "x.csv"], capsys)
    finally:
        _REGISTRY.pop("blowup")
    assert code == 3
    msg = json.loads(err.strip())
    assert msg["error"] == "numeric" and msg["stage"] == "coarse"
    assert not list(tmp_path.iterdir())


def test_io_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(["solve", "--problem", "zero", "--out", blocker / "sub" / "x.csv"], capsys)
    assert code == 4
    assert json.loads(err.strip())["error"] == "io"


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"problem": "linear", "n_coarse": 3, "n_fine": 7,
                               "iterations": 2, "fine": "rk4"}))
    out = tmp_path / "s.csv"
    code, _, _ = run(["solve", "--config", cfg, "-M", 5, "--out", out], capsys)
    assert code == 0
    report = json.loads((tmp_path / "s.report.json").read_text())["config"]
    assert report["problem"] == "linear"
    assert (report["n_coarse"], report["n_fine"], report["iterations"]) == (3, 5, 2)
    assert report["fine"] == "rk4" and report["coarse"] == "euler"

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n_corse": 3}))
    code, _, err = run(["solve", "--config", bad, "--out", out], capsys)
    assert code == 2 and json.loads(err)["field"] == "config"


def test_catalog_defaults_apply(tmp_path, capsys):
    out = tmp_path / "l.csv"
    assert run(["solve", "--problem", "linear", "--out", out], capsys)[0] == 0
    cfg = json.loads((tmp_path / "l.report.json").read_text())["config"]
    assert (cfg["n_coarse"], cfg["n_fine"], cfg["iterations"]) == (4, 25, 4)


def test_csv_round_trip(tmp_path, capsys):
    out = tmp_path / "r.csv"
    run(["solve", "--problem", "sin_ty", "-N", 4, "-M", 30, "-K", 2, "--fine", "rk4",
         "--out", out], capsys)
    text = out.read_text()
    lines = text.splitlines()
    times = np.array([float(l.split(",")[0]) for l in lines[1:]])
    vals = np.array([[float(v) for v in l.split(",")[1:]] for l in lines[1:]])
    assert solution_csv(Trajectory(times, vals)) == text
    assert "\r" not in text


def test_vector_csv_header():
    tr = Trajectory(np.array([0.0, 1.0]), np.array([[1.0, 2.0], [0.1, 1e-300]]))
    assert solution_csv(tr) == "t,y_0,y_1\n0.0,1.0,2.0\n1.0,0.1,1e-300\n"


def test_simulate_deterministic(tmp_path, capsys):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        code, out, _ = run(["simulate", "--problem", "sin_ty", "-N", 4, "-M", 20, "-K", 3,
                            "--seed", 7, "--format", "svg", "--out-dir", d], capsys)
        assert code == 0 and "frames written" in out
    names = sorted(p.name for p in dirs[0].iterdir())
    assert names == sorted(p.name for p in dirs[1].iterdir())
    assert all((dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes() for n in names)


def test_simulate_minimal(tmp_path, capsys):
    code, out, _ = run(["simulate", "--problem", "linear", "-N", 1, "-M", 1, "-K", 1,
                        "--seed", 0, "--out-dir", tmp_path], capsys)
    assert code == 0
    index = json.loads((tmp_path / "frames.json").read_text())
    from test_diagnostics import _ref_chunks
    assert len(index["frames"]) == 2 + len(_ref_chunks(0, 1, 1, 1, 1))
    assert out.startswith(f"{len(index['frames'])} frames")


def test_bench_zero_delay(capsys):
    code, out, _ = run(["bench", "--problem", "sin_ty", "-N", 4, "-M", 20, "-K", 2,
                        "--repeats", 2], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["bitwise_identical"] is True
    assert "note" in rep and len(rep["fine_stage_s"]["serial"]) == 2


def test_bench_rejects_zero_repeats(capsys):
    code, _, err = run(["bench", "--repeats", 0], capsys)
    assert code == 2 and json.loads(err)["field"] == "repeats"


def test_catalog_listing(capsys):
    code, out, _ = run(["catalog"], capsys)
    assert code == 0
    for name in ("sin_ty", "sin_t_exp_t", "linear", "zero", "euler", "rk4"):
        assert name in out

    code, out, _ = run(["catalog", "--json"], capsys)
    cat = json.loads(out)
    assert [p["name"] for p in cat["problems"]] == ["sin_ty", "sin_t_exp_t", "linear", "zero"]
    assert [i["name"] for i in cat["integrators"]][:2] == ["euler", "rk4"]


def test_catalog_lists_registered_integrator(capsys):
    _REGISTRY["midpoint"] = OneStepIntegrator(
        "midpoint", lambda d, t, y, f: y + d * f(t + d / 2, y + d / 2 * f(t, y)), "explicit midpoint")
    try:
        _, out, _ = run(["catalog", "--json"], capsys)
    finally:
        _REGISTRY.pop("midpoint")
    assert "midpoint" in [i["name"] for i in json.loads(out)["integrators"]]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pararealpy", "catalog"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "sin_ty" in proc.stdout
