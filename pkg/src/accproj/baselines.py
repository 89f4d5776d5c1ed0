"""Reference solvers: restarted GMRES, block Jacobi and a dense direct solve."""
import time
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve, solve_triangular

from .exceptions import Diverged, NotConverged, Singular, SingularBlock
from .linalg import as_matrix, as_vector, relative_residual
from .solvers import SolveReport

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class GmresConfig:
    restart: int = 20
    tol: float = 1e-5
    max_outer: int = 2000
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.restart < 1:
            raise ValueError(f"restart must be >= 1, got {self.restart}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_outer < 1:
            raise ValueError(f"max_outer must be >= 1, got {self.max_outer}")

    def to_dict(self):
        return {"restart": self.restart, "tol": self.tol, "max_outer": self.max_outer}


@dataclass(frozen=True)
class JacobiConfig:
    block_size: int = 20
    tol: float = 1e-5
    max_iters: int = 100000
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")

    def to_dict(self):
        return {"block_size": self.block_size, "tol": self.tol, "max_iters": self.max_iters}


def _reflector(z, k):
    """Unit Householder vector ``w`` with ``(I - 2ww')z`` zero below entry ``k``."""
    w = np.zeros_like(z)
    tail = z[k:]
    sigma = np.linalg.norm(tail)
    if sigma == 0.0:
        return w
    alpha = -sigma if tail[0] >= 0 else sigma
    w[k:] = tail
    w[k] -= alpha
    return w / np.linalg.norm(w)


def _reflect(w, z):
    return z - 2.0 * (w @ z) * w


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0
    r = np.hypot(a, b)
    return a / r, b / r


def solve_gmres(a, b, config=None):
    """Restarted GMRES(m) with Householder Arnoldi and Givens least squares.

    ``report.outer`` counts restart cycles and ``report.inner`` the inner
    steps of the last cycle; ``report.sweeps`` is the total number of inner
    steps (matrix-vector products).
    """
    t0 = time.perf_counter()
    config = config or GmresConfig()
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError("GMRES needs a square matrix and a matching right-hand side")
    x = np.zeros(n) if config.x0 is None else as_vector(config.x0, "x0").copy()
    nb = np.linalg.norm(b)
    m = min(config.restart, n)
    res = relative_residual(a, x, b)
    residuals, cycles = [res], []
    outer = inner = total = 0

    def report(converged):
        return SolveReport(solution=x.copy(), converged=converged, sweeps=total,
                           residual_history=residuals, wall_time=time.perf_counter() - t0,
                           method="gmres", outer=outer, inner=inner,
                           inner_history=cycles)

    while res > config.tol:
        if outer >= config.max_outer:
            raise NotConverged(report(False),
                               f"GMRES({config.restart}) stopped after {outer} restarts")
        outer += 1
        z = b - a @ x
        refl = [_reflector(z, 0)]
        g = np.zeros(m + 1)
        g[0] = _reflect(refl[0], z)[0]
        h = np.zeros((m + 1, m))
        rot = []
        vs = []
        est = [abs(g[0]) / nb]
        j = 0
        for j in range(m):
            v = np.zeros(n)
            v[j] = 1.0
            for w in reversed(refl):
                v = _reflect(w, v)
            vs.append(v)
            z = a @ v
            for w in refl:
                z = _reflect(w, z)
            if j + 1 < n:
                refl.append(_reflector(z, j + 1))
                z = _reflect(refl[-1], z)
                h[: j + 2, j] = z[: j + 2]
            else:
                h[: j + 1, j] = z[: j + 1]
            for i, (cs, sn) in enumerate(rot):
                h[i, j], h[i + 1, j] = cs * h[i, j] + sn * h[i + 1, j], -sn * h[i, j] + cs * h[i + 1, j]
            cs, sn = _givens(h[j, j], h[j + 1, j])
            rot.append((cs, sn))
            h[j, j] = cs * h[j, j] + sn * h[j + 1, j]
            h[j + 1, j] = 0.0
            g[j], g[j + 1] = cs * g[j], -sn * g[j]
            total += 1
            est.append(abs(g[j + 1]) / nb)
            if est[-1] <= config.tol or h[j, j] == 0.0:
                break
        k = j + 1
        y = solve_triangular(h[:k, :k], g[:k], lower=False)
        x = x + np.column_stack(vs) @ y
        inner = k
        cycles.append(est)
        res = relative_residual(a, x, b)
        residuals.append(res)
    return report(True)


def _lu(a):
    # singularity is reported by _check_pivots instead of a scipy warning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        return lu_factor(a, check_finite=False)


def _check_pivots(lu, block=None):
    d = np.abs(np.diag(lu[0]))
    if d.size == 0 or d.min() <= PIVOT_TOL * max(d.max(), 1e-300):
        if block is None:
            raise Singular("matrix is numerically singular")
        raise SingularBlock(block)


def solve_block_jacobi(a, b, config=None, callback=None):
    """Block Jacobi ``x <- x + D_B^{-1}(b - Ax)`` over disjoint contiguous blocks.

    The last block may be shorter. ``callback(x)`` sees every iterate.
    """
    t0 = time.perf_counter()
    config = config or JacobiConfig()
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError("block Jacobi needs a square matrix and a matching right-hand side")
    spans = [(lo, min(lo + config.block_size, n)) for lo in range(0, n, config.block_size)]
    factors = []
    for i, (lo, hi) in enumerate(spans):
        lu = _lu(a[lo:hi, lo:hi])
        _check_pivots(lu, block=i)
        factors.append(lu)
    x = np.zeros(n) if config.x0 is None else as_vector(config.x0, "x0").copy()
    nb = np.linalg.norm(b)
    r = b - a @ x
    r0 = np.linalg.norm(r)
    residuals = [np.linalg.norm(r) / nb]
    it = 0

    def report(converged):
        return SolveReport(solution=x.copy(), converged=converged, sweeps=it,
                           residual_history=residuals, wall_time=time.perf_counter() - t0,
                           method="jacobi", block_steps=it * len(spans))

    while residuals[-1] > config.tol:
        if it >= config.max_iters:
            raise NotConverged(report(False), f"block Jacobi stopped after {it} iterations")
        for (lo, hi), lu in zip(spans, factors):
            x[lo:hi] += lu_solve(lu, r[lo:hi], check_finite=False)
        it += 1
        if callback is not None:
            callback(x.copy())
        r = b - a @ x
        rn = np.linalg.norm(r)
        residuals.append(rn / nb)
        if rn > 1e12 * max(r0, 1e-300):
            raise Diverged(report(False), f"block Jacobi diverged at iteration {it}")
    return report(True)


def solve_direct(a, b):
    """Partial-pivoted LU solve, used as the ground-truth oracle."""
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] != a.shape[1]:
        raise ValueError("solve_direct needs a square matrix")
    lu = _lu(a)
    _check_pivots(lu)
    return lu_solve(lu, b, check_finite=False)
