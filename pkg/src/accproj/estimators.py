"""scikit-learn estimators wrapping the solvers.

``fit(A, b)`` treats the rows of ``A`` as equations and stores the computed
solution in ``coef_``; ``predict(X)`` returns ``X @ coef_``. For consistent
underdetermined systems the accumulated-projection solvers return the
minimum-norm solution, so they behave like a minimum-norm interpolating
linear model.
"""
import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baselines import GmresConfig, JacobiConfig, solve_block_jacobi, solve_gmres
from .exceptions import NotConverged
from .solvers import SOLVERS, SolverConfig


class _SystemSolverMixin(RegressorMixin):

    def _solve(self, a, b):
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        try:
            report = self._solve(X, y)
        except NotConverged as exc:
            report = exc.report
            warnings.warn(str(exc), ConvergenceWarning)
        self.report_ = report
        self.coef_ = report.solution
        self.n_iter_ = report.sweeps
        self.converged_ = report.converged
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_


class AccumulatedProjectionSolver(_SystemSolverMixin, BaseEstimator):
    """SAP / MSAP1 / MSAP2 behind the estimator interface.

    Parameters
    ----------
    method : {"sap", "msap1", "msap2"}
    block_size, overlap : row grouping of ``X``
    tol : relative residual at which iteration stops
    max_sweeps : sweep budget; exhausting it emits a ``ConvergenceWarning``
    window, cond_threshold : MSAP2 window length and conditioning limit
    kernel : {"fast", "naive"}
    """

    def __init__(self, method="msap2", block_size=20, overlap=0.5, tol=1e-5,
                 max_sweeps=20000, window=5, cond_threshold=1e8, kernel="fast"):
        self.method = method
        self.block_size = block_size
        self.overlap = overlap
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.window = window
        self.cond_threshold = cond_threshold
        self.kernel = kernel

    def _solve(self, a, b):
        if self.method not in SOLVERS:
            raise ValueError(f"method must be one of {sorted(SOLVERS)}, got {self.method!r}")
        config = SolverConfig(block_size=self.block_size, overlap=self.overlap, tol=self.tol,
                              max_sweeps=self.max_sweeps, window=self.window,
                              cond_threshold=self.cond_threshold, kernel=self.kernel)
        return SOLVERS[self.method](a, b, config)


class GMRESSolver(_SystemSolverMixin, BaseEstimator):
    def __init__(self, restart=20, tol=1e-5, max_outer=2000):
        self.restart = restart
        self.tol = tol
        self.max_outer = max_outer

    def _solve(self, a, b):
        return solve_gmres(a, b, GmresConfig(restart=self.restart, tol=self.tol,
                                             max_outer=self.max_outer))


class BlockJacobiSolver(_SystemSolverMixin, BaseEstimator):
    def __init__(self, block_size=20, tol=1e-5, max_iters=100000):
        self.block_size = block_size
        self.tol = tol
        self.max_iters = max_iters

    def _solve(self, a, b):
        return solve_block_jacobi(a, b, JacobiConfig(block_size=self.block_size, tol=self.tol,
                                                     max_iters=self.max_iters))
