import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from accproj.exceptions import RankDeficient, ZeroMatrix
from accproj.linalg import condition_estimate, householder_qr, solve_gram


def test_qr_of_orthonormal_slice_is_itself():
    a = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    f = householder_qr(a)
    np.testing.assert_array_equal(f.q, a)
    np.testing.assert_array_equal(f.r, np.eye(2))


def test_qr_single_column():
    f = householder_qr(np.array([[3.0], [4.0]]))
    np.testing.assert_allclose(f.q, [[0.6], [0.8]], atol=1e-15)
    np.testing.assert_allclose(f.r, [[5.0]], atol=1e-15)


def test_qr_random_reconstruction(rng):
    a = rng.standard_normal((50, 10))
    f = householder_qr(a)
    assert np.max(np.abs(f.q.T @ f.q - np.eye(10))) <= 1e-12 * 10
    assert np.linalg.norm(f.q @ f.r - a) <= 1e-12 * np.linalg.norm(a)
    assert np.all(np.diag(f.r) >= 0)
    np.testing.assert_array_equal(np.triu(f.r), f.r)


def test_qr_detects_dependent_columns():
    a = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficient):
        householder_qr(a)


def test_qr_rejects_wide():
    with pytest.raises(ValueError):
        householder_qr(np.ones((2, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(lambda c: st.tuples(st.just(c), st.integers(c, 20))),
       st.integers(0, 2 ** 32 - 1))
def test_qr_properties(shape, seed):
    cols, rows = shape
    a = np.random.default_rng(seed).standard_normal((rows, cols))
    f = householder_qr(a)
    assert np.max(np.abs(f.q.T @ f.q - np.eye(cols))) <= 1e-12 * cols
    assert np.linalg.norm(f.q @ f.r - a) <= 1e-12 * np.linalg.norm(a)


def test_solve_gram_identity():
    np.testing.assert_allclose(solve_gram(np.eye(2), [3.0, 4.0]), [3.0, 4.0])


def test_solve_gram_diagonal():
    np.testing.assert_allclose(solve_gram(np.diag([2.0, 1.0]), [4.0, 1.0]), [1.0, 1.0])


@pytest.mark.parametrize("seed", range(10))
def test_solve_gram_residual(seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((20, 5))
    rhs = rng.standard_normal(5)
    y = solve_gram(w, rhs)
    resid = np.linalg.norm(w.T @ w @ y - rhs)
    assert resid <= 1e-10
    assert resid <= 1e-10 * (np.linalg.norm(w, 2) ** 2 * np.linalg.norm(y) + np.linalg.norm(rhs))


def test_solve_gram_rank_deficient():
    w = np.column_stack([np.ones(4), 2 * np.ones(4)])
    with pytest.raises(RankDeficient):
        solve_gram(w, [1.0, 1.0])


def test_condition_identity_and_diagonal():
    assert condition_estimate(np.eye(3)) == pytest.approx(1.0)
    assert condition_estimate(np.diag([10.0, 1.0])) == pytest.approx(10.0)


def test_condition_nearly_parallel_rows():
    eps = 1e-9
    # closed-form singular values of [[1, 0], [1, eps]] in high precision
    mpmath.mp.dps = 50
    e = mpmath.mpf(eps)
    tr, det = 2 + e ** 2, e ** 2
    disc = mpmath.sqrt(tr ** 2 - 4 * det)
    oracle = float(mpmath.sqrt((tr + disc) / (tr - disc)))
    got = condition_estimate(np.array([[1.0, 0.0], [1.0, eps]]))
    assert got >= 1e8
    assert got == pytest.approx(oracle, rel=1e-6)


def test_condition_zero_matrix():
    with pytest.raises(ZeroMatrix):
        condition_estimate(np.zeros((2, 3)))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 6), elements=st.floats(-10, 10)),
       st.floats(1e-3, 1e3), st.booleans())
def test_condition_scale_invariant(m, c, negate):
    if np.max(np.abs(m)) < 1e-3 or np.linalg.matrix_rank(m) < 3:
        return
    base = condition_estimate(m)
    if base > 1e10:
        return
    scale = -c if negate else c
    assert condition_estimate(scale * m) == pytest.approx(base, rel=1e-10)
