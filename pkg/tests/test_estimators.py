import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import ConvergenceWarning

from accproj.estimators import AccumulatedProjectionSolver, BlockJacobiSolver, GMRESSolver
from accproj.problems import gen_random_consistent


@pytest.mark.parametrize("est", [AccumulatedProjectionSolver(block_size=20),
                                 AccumulatedProjectionSolver(method="sap", block_size=50),
                                 GMRESSolver(restart=30), BlockJacobiSolver(block_size=50)])
def test_fit_predict(est, tridiag100):
    est.fit(tridiag100.a, tridiag100.b)
    assert est.converged_
    assert est.n_iter_ >= 1
    assert est.score(tridiag100.a, tridiag100.b) > 0.999999
    np.testing.assert_allclose(est.predict(tridiag100.a), tridiag100.b, atol=1e-4)


def test_params_and_clone():
    est = AccumulatedProjectionSolver(method="msap1", window=3)
    params = est.get_params()
    assert params["method"] == "msap1"
    assert params["window"] == 3
    twin = clone(est).set_params(block_size=10)
    assert twin.block_size == 10
    assert est.block_size == 20


def test_min_norm_interpolation():
    p = gen_random_consistent(10, 30, seed=2)
    est = AccumulatedProjectionSolver(method="sap", block_size=5, tol=1e-12,
                                      max_sweeps=50000).fit(p.a, p.b)
    ref = np.linalg.pinv(p.a) @ p.b
    np.testing.assert_allclose(est.coef_, ref, atol=1e-8)


def test_convergence_warning(tridiag100):
    est = AccumulatedProjectionSolver(method="sap", max_sweeps=2)
    with pytest.warns(ConvergenceWarning):
        est.fit(tridiag100.a, tridiag100.b)
    assert not est.converged_


def test_unknown_method(tridiag100):
    with pytest.raises(ValueError):
        AccumulatedProjectionSolver(method="cg").fit(tridiag100.a, tridiag100.b)


def test_predict_shape_check(tridiag100):
    est = GMRESSolver().fit(tridiag100.a, tridiag100.b)
    with pytest.raises(ValueError):
        est.predict(np.ones((2, 5)))
