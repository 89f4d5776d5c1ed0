import csv
import json

import numpy as np
import pytest

import accproj.projection as projection
from accproj.cli import main
from accproj.problems import read_matrix_market
from accproj.projection import ProjectionState


def test_solve_tridiag(capsys):
    code = main(["solve", "--problem", "tridiag:n=100", "--solver", "sap",
                 "--block-size", "20", "--tol", "1e-5"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("solver=sap sweeps=")
    assert "residual=" in out


def test_solve_without_problem(capsys):
    assert main(["solve", "--solver", "sap"]) == 1
    assert "usage" in capsys.readouterr().err


def test_solve_not_converged(capsys):
    code = main(["solve", "--problem", "tridiag:n=100", "--solver", "sap", "--max-sweeps", "2"])
    assert code == 2


@pytest.mark.parametrize("solver", ["gmres", "jacobi", "msap1", "msap2"])
def test_solve_each_solver(solver, capsys, tmp_path):
    report = tmp_path / "r.json"
    code = main(["solve", "--problem", "tridiag:n=60", "--solver", solver,
                 "--report", str(report)])
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["solver"] == solver
    assert doc["rel_error"] < 1e-2


def test_solve_bad_problem(capsys):
    assert main(["solve", "--problem", "tridiag:n=x", "--solver", "sap"]) == 1
    assert "error" in capsys.readouterr().err


def test_solve_bad_number(capsys):
    assert main(["solve", "--problem", "tridiag:n=10", "--solver", "sap", "--tol", "1,5"]) == 1


def test_gen_then_solve_matrix(tmp_path, capsys):
    path = str(tmp_path / "sys.mtx")
    assert main(["gen", "--problem", "random:rows=8,cols=8", "--out", path, "--seed", "3"]) == 0
    p = read_matrix_market(path)
    assert p.shape == (8, 8)
    assert main(["solve", "--matrix", path, "--solver", "gmres", "--restart", "8"]) == 0


def test_solve_malformed_matrix(tmp_path, capsys):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n9 9 1.0\n")
    assert main(["solve", "--matrix", str(path), "--solver", "sap"]) == 1
    assert "bad.mtx:3:" in capsys.readouterr().err


def test_bench_t2_rows(tmp_path, capsys):
    assert main(["bench", "--table", "t2", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "t2.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert [int(r["block_size"]) for r in rows] == [10, 15, 20, 25, 30, 35, 40, 50]


def test_bench_t1_two_overlaps(tmp_path, capsys):
    assert main(["bench", "--table", "t1", "--out", str(tmp_path), "--overlap", "0,0.5",
                 "--max-sweeps", "3000", "--jobs", "2"]) == 0
    doc = json.loads((tmp_path / "t1.json").read_text())
    assert len(doc["rows"]) == 10
    assert {r["overlap"] for r in doc["rows"]} == {0.0, 0.5}


def test_bench_unknown_table(tmp_path, capsys):
    assert main(["bench", "--table", "t9", "--out", str(tmp_path)]) == 1
    assert "unknown table" in capsys.readouterr().err


def test_verify_passes(capsys):
    assert main(["verify", "--sizes", "10"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("PASS") == 11


def test_verify_catches_sign_flip(monkeypatch, capsys):
    original = projection.ap_step_fast

    def flipped(state, i, partition):
        new = original(state, i, partition)
        # negate the correction term along p_bar
        return ProjectionState(p=2 * partition[i].x_proj - new.p, c=new.c)

    monkeypatch.setattr(projection, "ap_step_fast", flipped)
    assert main(["verify", "--sizes", "10"]) != 0
    captured = capsys.readouterr()
    assert "FAIL" in captured.out
    assert "counterexample" in captured.err


def test_no_command(capsys):
    assert main([]) == 1
