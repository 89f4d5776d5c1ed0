"""Accumulated-projection kernels.

Every kernel threads a :class:`ProjectionState` ``(p, c)`` where ``p`` is the
orthogonal projection of the unknown solution ``x`` onto some known subspace
and ``c = x'p``. Since ``x - p`` is orthogonal to ``p``, ``c == p'p`` holds at
all times; that identity is the self-check used throughout the package.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DegenerateDirection, OrthogonalRhs, RankDeficient
from .linalg import as_matrix, as_vector, householder_qr, solve_gram

#: below this value of ||p - Q Q'p|| / ||p||, p is treated as lying in ran(A_i')
DEGENERATE_TOL = 1e-12

KERNELS = ("fast", "naive")


@dataclass(frozen=True)
class ProjectionState:
    p: np.ndarray
    c: float

    @property
    def norm(self):
        return float(np.linalg.norm(self.p))

    def bookkeeping_error(self):
        """``|c - p'p| / max(1, p'p)``; stays near machine precision."""
        pp = float(self.p @ self.p)
        return abs(self.c - pp) / max(1.0, pp)


@dataclass(frozen=True)
class TwoVectorResult:
    s: float
    fs: float


def init_state(a, b):
    """Starting projection ``p0 = alpha A'b`` with ``alpha = ||b||^2 / ||A'b||^2``."""
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    atb = a.T @ b
    nrm2 = float(atb @ atb)
    if np.sqrt(nrm2) < 1e-300:
        raise OrthogonalRhs("A'b vanishes; cannot form a starting projection")
    bb = float(b @ b)
    alpha = bb / nrm2
    return ProjectionState(p=alpha * atb, c=alpha * bb)


def optimal_two_vector(b1, b2, alpha):
    """Best combination ``v1 + s v2`` of two unit vectors.

    Given ``x'v1 = b1``, ``x'v2 = b2`` and ``alpha = v1'v2``, returns the
    coefficient ``s`` maximizing ``|x'(v1 + t v2)| / ||v1 + t v2||`` and the
    maximal value ``fs``.
    """
    b1, b2, alpha = float(b1), float(b2), float(alpha)
    denom = b1 - alpha * b2
    if abs(alpha) >= 1.0 - 1e-14:
        raise DegenerateDirection(f"|alpha| = {abs(alpha)} leaves no second direction")
    if abs(denom) < 1e-14 * max(abs(b1), abs(b2)) or denom == 0.0:
        raise DegenerateDirection("b1 - alpha*b2 vanishes; the optimum lies at infinity")
    s = (b2 - alpha * b1) / denom
    # scale-safe form of |b1| sqrt(1 + (b2/b1 - alpha)^2 / (1 - alpha^2))
    fs = np.hypot(b1, (b2 - alpha * b1) / np.sqrt(1.0 - alpha * alpha))
    return TwoVectorResult(s=float(s), fs=float(fs))


def ap_step_fast(state, i, partition):
    """Project ``x`` onto ``span{p, A_i'}`` using the cached QR of block ``i``."""
    blk = partition[i]
    p, c = state.p, state.c
    qp = blk.q.T @ p
    p_bar = p - blk.q @ qp
    gap = c - float(blk.b_tilde @ qp)
    bb = float(blk.b_tilde @ blk.b_tilde)
    if np.linalg.norm(p_bar) > DEGENERATE_TOL * np.linalg.norm(p):
        beta = gap / float(p_bar @ p_bar)
        return ProjectionState(p=blk.x_proj + beta * p_bar, c=bb + beta * gap)
    return ProjectionState(p=blk.x_proj.copy(), c=bb)


def ap_step_naive(state, i, partition):
    """Same projection as :func:`ap_step_fast` via ``W (W'W)^{-1} l``.

    ``W = [p, A_i']`` and ``l = [c, b_i]``. Raises :class:`RankDeficient` when
    ``p`` lies in ``ran(A_i')``.
    """
    blk = partition[i]
    w = np.column_stack([state.p, blk.a.T])
    l = np.concatenate([[state.c], blk.b])
    y = solve_gram(w, l)
    return ProjectionState(p=w @ y, c=float(l @ y))


def ap_sweep(state, partition, kernel="fast", on_step=None):
    """One pass over all blocks in order; returns the final state.

    ``on_step(i, old, new)`` is called after every block step.
    """
    if kernel not in KERNELS:
        raise ValueError(f"kernel must be one of {KERNELS}, got {kernel!r}")
    for i in range(len(partition)):
        if kernel == "fast":
            new = ap_step_fast(state, i, partition)
        else:
            try:
                new = ap_step_naive(state, i, partition)
            except RankDeficient:
                new = ap_step_fast(state, i, partition)
        if on_step is not None:
            on_step(i, state, new)
        state = new
    return state


def window_project(vectors, inner_products):
    """Project ``x`` onto the span of ``vectors`` knowing only ``x'v_j``.

    Returns ``p = V (V'V)^{-1} L`` with ``c = L'(V'V)^{-1} L``. Raises
    :class:`RankDeficient` when the vectors are dependent.
    """
    v = np.column_stack([as_vector(u, "vector") for u in vectors])
    ell = as_vector(inner_products, "inner_products")
    if ell.shape[0] != v.shape[1]:
        raise ValueError("need one inner product per vector")
    f = householder_qr(v)
    y = solve_triangular(f.r, ell, trans="T", lower=False)
    return ProjectionState(p=f.q @ y, c=float(y @ y))
