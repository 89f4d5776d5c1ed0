"""Dense kernels: thin QR with a fixed sign convention, Gram solves, conditioning."""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import RankDeficient, ZeroMatrix

RANK_TOL = 1e-13


def as_vector(v, name="vector"):
    """Return ``v`` as a 1-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_matrix(a, name="matrix"):
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class QRFactor:
    """Thin QR factor ``q @ r`` of a tall matrix.

    ``q`` has orthonormal columns and ``r`` is upper triangular with a
    nonnegative diagonal.
    """

    q: np.ndarray
    r: np.ndarray


def householder_qr(tall):
    """Thin Householder QR of a full-column-rank matrix with ``rows >= cols``.

    The diagonal of ``r`` is made nonnegative so the factorization is unique.

    Raises
    ------
    RankDeficient
        If some ``|r_jj|`` falls below ``1e-13 * max|tall|``.
    """
    a = as_matrix(tall, "tall")
    rows, cols = a.shape
    if rows < cols:
        raise ValueError(f"householder_qr needs rows >= cols, got {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        raise RankDeficient("matrix is identically zero")
    q, r = np.linalg.qr(a, mode="reduced")
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q = q * signs
    r = r * signs[:, None]
    small = np.abs(np.diag(r)) < RANK_TOL * scale
    if np.any(small):
        j = int(np.argmax(small))
        raise RankDeficient(f"column {j} is numerically dependent on its predecessors")
    return QRFactor(q=q, r=r)


def solve_gram(w, rhs):
    """Solve ``(w' w) y = rhs`` through the QR factor of ``w``.

    The Gram matrix is never formed.
    """
    w = as_matrix(w, "w")
    rhs = as_vector(rhs, "rhs")
    if rhs.shape[0] != w.shape[1]:
        raise ValueError(f"rhs has length {rhs.shape[0]}, expected {w.shape[1]}")
    r = householder_qr(w).r
    z = solve_triangular(r, rhs, trans="T", lower=False)
    return solve_triangular(r, z, lower=False)


def condition_estimate(mat):
    """2-norm condition number of ``mat'`` for a short, wide window matrix.

    The singular values are computed exactly, so for ``rows <= 64`` this is
    the true condition number, not an estimate. Rows that are linearly
    dependent give ``inf``.
    """
    m = as_matrix(mat, "mat")
    if m.size == 0 or np.max(np.abs(m)) < 1e-300:
        raise ZeroMatrix("condition number of a zero matrix is undefined")
    sv = np.linalg.svd(m, compute_uv=False)
    # rank-deficient windows (more rows than columns included) have zero singular values
    if min(m.shape) < m.shape[0] or sv[-1] == 0.0:
        return float("inf")
    return float(sv[0] / sv[-1])


def relative_residual(a, x, b):
    """``||b - a x|| / ||b||``, the stopping quantity used by every solver."""
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(b - a @ x) / nb) if nb > 0 else float(np.linalg.norm(a @ x))
