import numpy as np
import pytest

from accproj.exceptions import NotConverged
from accproj.linalg import relative_residual
from accproj.problems import gen_random_consistent, gen_tridiag
from accproj.solvers import SOLVERS, SolverConfig, solve_msap1, solve_msap2, solve_sap


def test_identity_already_solved():
    # p0 = b is exact, so no sweep runs
    rep = solve_sap(np.eye(4), np.array([1.0, 2.0, 3.0, 4.0]),
                    SolverConfig(block_size=2, overlap=0.0))
    assert rep.converged
    assert rep.sweeps == 0
    np.testing.assert_allclose(rep.solution, [1, 2, 3, 4])


@pytest.mark.parametrize("method", sorted(SOLVERS))
def test_tridiag_solution(method, tridiag100):
    rep = SOLVERS[method](tridiag100.a, tridiag100.b, SolverConfig(block_size=20))
    assert rep.converged
    assert rep.final_residual <= 1e-5
    assert relative_residual(tridiag100.a, rep.solution, tridiag100.b) == rep.final_residual
    assert rep.invariant_log == []
    assert len(rep.residual_history) == rep.sweeps + 1


@pytest.mark.parametrize("method", sorted(SOLVERS))
def test_pnorm_nondecreasing(method, tridiag100):
    rep = SOLVERS[method](tridiag100.a, tridiag100.b, SolverConfig(block_size=25))
    h = np.asarray(rep.pnorm_history)
    assert np.all(np.diff(h) >= -1e-10 * h[1:])


def test_min_norm_limit():
    p = gen_random_consistent(10, 25, seed=4)
    rep = solve_sap(p.a, p.b, SolverConfig(block_size=5, tol=1e-12, max_sweeps=50000))
    ref = p.a.T @ np.linalg.solve(p.a @ p.a.T, p.b)
    assert np.linalg.norm(rep.solution - ref) <= 1e-8 * np.linalg.norm(ref)


def test_not_converged_carries_report(tridiag100):
    with pytest.raises(NotConverged) as info:
        solve_sap(tridiag100.a, tridiag100.b, SolverConfig(block_size=20, max_sweeps=3))
    rep = info.value.report
    assert not rep.converged
    assert rep.sweeps == 3
    assert len(rep.residual_history) == 4


def test_rejects_overdetermined():
    with pytest.raises(ValueError):
        solve_sap(np.ones((5, 3)), np.ones(5))


def test_deterministic(tridiag100):
    cfg = SolverConfig(block_size=15)
    one = solve_msap2(tridiag100.a, tridiag100.b, cfg)
    two = solve_msap2(tridiag100.a, tridiag100.b, cfg)
    np.testing.assert_array_equal(one.solution, two.solution)
    assert one.residual_history == two.residual_history


def test_msap1_pre_variant(tridiag100):
    rep = solve_msap1(tridiag100.a, tridiag100.b,
                      SolverConfig(block_size=20, msap1_variant="pre"))
    assert rep.converged
    assert rep.invariant_log == []


def test_naive_kernel_agrees(tridiag100):
    fast = solve_msap2(tridiag100.a, tridiag100.b, SolverConfig(block_size=25))
    naive = solve_msap2(tridiag100.a, tridiag100.b, SolverConfig(block_size=25, kernel="naive"))
    assert abs(fast.sweeps - naive.sweeps) <= 1
    np.testing.assert_allclose(fast.solution, naive.solution, atol=1e-4)


@pytest.mark.parametrize("kwargs", [dict(tol=0.0), dict(window=1), dict(kernel="x"),
                                    dict(msap1_variant="mid"), dict(cond_threshold=0.5)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_report_summary(tridiag100):
    rep = solve_sap(tridiag100.a, tridiag100.b, SolverConfig(block_size=50))
    d = rep.summary()
    assert d["method"] == "sap"
    assert d["sweeps"] == rep.sweeps
    assert rep.relative_error(tridiag100.x_exact) < 1e-2
