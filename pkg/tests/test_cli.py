import csv
import json

import pytest

from circlefol.cli import main
from circlefol.fourier import PeriodicFunction
from circlefol.io import load_solution, spectrum_to_list
from circlefol.models import make_model
from circlefol.newton import residual_norm

LINEAR_ARGS = ["--model", "linear", "--param", "omega=0.3", "--param", "b=0.5"]


@pytest.fixture
def sol(tmp_path, capsys):
    path = tmp_path / "sol.json"
    rc = main(["solve", *LINEAR_ARGS, "--ntheta", "64", "--order", "8", "--delta", "0.3", "--tol", "1e-12",
               "--out", str(path)])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    return path, out


def test_solve_writes_solution(sol):
    path, out = sol
    assert path.exists() and out["passed"]
    res = out["report"]["residuals"]
    assert float(res[min(res, key=float)]) < 1e-12
    doc, u = load_solution(path)
    assert residual_norm(make_model("linear", omega=0.3, b=0.5), u) < 1e-12
    assert doc["report"]["lambda_c0"] == pytest.approx(0.5)


def test_verify_passes(sol, capsys, tmp_path):
    path, _ = sol
    rc = main(["verify", *LINEAR_ARGS, "--solution", str(path), "--out", str(tmp_path / "r.json")])
    captured = capsys.readouterr()
    assert rc == 0
    assert json.loads(captured.out)["report"]["lambda_c0"] == pytest.approx(0.5)
    assert captured.err.startswith("PASS")
    assert (tmp_path / "r.json").exists()
    # model taken from the file when omitted
    assert main(["verify", "--solution", str(path)]) == 0


def test_verify_fails_for_wrong_model(sol, capsys):
    path, _ = sol
    rc = main(["verify", "--model", "linear", "--param", "b=0.6", "--solution", str(path)])
    assert rc == 1
    assert "FAIL" in capsys.readouterr().err


def test_export_csv(sol, tmp_path, capsys):
    path, _ = sol
    out = tmp_path / "leaves.csv"
    assert main(["export", "--solution", str(path), "--grid", "256", "--smax", "0.3", "--format", "csv",
                 "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["theta", "s", "x", "y"]
    assert len(rows) == 1 + 256 * 11
    theta, s, x, y = map(float, rows[1])
    assert (theta, s) == (0.0, -0.3)
    assert x == pytest.approx(0.0, abs=1e-12) and y == pytest.approx(-0.3, abs=1e-12)


def test_warm_start(sol, tmp_path, capsys):
    path, _ = sol
    capsys.readouterr()
    assert main(["solve", *LINEAR_ARGS, "--warm", str(path), "--tol", "1e-12", "--out", str(tmp_path / "w.json")]) == 0
    assert json.loads(capsys.readouterr().out)["iterations"] == 0


def _write(path, pf):
    path.write_text(json.dumps({"coeffs": spectrum_to_list(pf.spectrum)}))
    return str(path)


def test_cohom_rotation(tmp_path, capsys):
    n = 32
    l = _write(tmp_path / "l.json", PeriodicFunction.constant(0.5, n))
    a = _write(tmp_path / "a.json", PeriodicFunction.constant(0.3, n))
    eta = _write(tmp_path / "eta.json", PeriodicFunction.from_cos_sin(n, cos={1: 1.0}))
    assert main(["cohom", "--l", l, "--a", a, "--eta", eta]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["residual"] < 1e-12
    assert len(out["coeffs"]) == n + 1 and out["rounds"] <= 7


def test_continue_sweep(tmp_path, capsys):
    outdir = tmp_path / "sweep"
    rc = main(["continue", *LINEAR_ARGS, "--ntheta", "32", "--order", "6", "--tol", "1e-12",
               "--sweep", "b:0.3:0.5:0.1", "--outdir", str(outdir)])
    assert rc == 0
    summary = json.loads((outdir / "summary.json").read_text())
    assert summary["completed"] and len(summary["points"]) == 3
    assert (outdir / "point_0002.json").exists()
    lines = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert [r["b"] for r in lines] == pytest.approx([0.3, 0.4, 0.5])


def test_solver_error_exit_1(tmp_path, capsys):
    rc = main(["solve", "--model", "forced_oscillator", "--param", "b=1.5", "--ntheta", "32", "--order", "4",
               "--out", str(tmp_path / "x.json")])
    assert rc == 1
    assert "NoAttractorFound" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["solve", "--model", "nope", "--out", "x.json"],
    ["solve", "--model", "linear", "--param", "b=abc", "--out", "x.json"],
    ["continue", "--model", "linear", "--sweep", "b:0.3", "--outdir", "d"],
    ["continue", "--model", "linear", "--sweep", "zz:0.3:0.5:0.1", "--outdir", "d"],
    ["verify", "--solution", "does_not_exist.json"],
])
def test_usage_errors_exit_2(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert err


def test_usage_error_prints_grammar(capsys):
    main(["bogus"])
    assert "circlefol solve" in capsys.readouterr().err


def test_thread_cap(sol, monkeypatch, capsys):
    path, _ = sol
    monkeypatch.setenv("CIRCLEFOL_THREADS", "1")
    assert main(["verify", "--solution", str(path)]) == 0
