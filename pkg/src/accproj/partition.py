"""Overlapped row-group division of ``A`` with cached per-block QR data."""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import RankDeficient, RankDeficientBlock
from .linalg import as_matrix, as_vector, householder_qr


@dataclass(frozen=True)
class BlockSpec:
    """How the rows of ``A`` are grouped.

    Blocks hold ``block_size`` rows and start every
    ``round(block_size * (1 - overlap))`` rows; ``overlap=0`` gives disjoint
    groups. ``row_order`` optionally permutes rows before grouping.
    """

    block_size: int = 20
    overlap: float = 0.5
    row_order: Optional[Sequence[int]] = None

    def __post_init__(self):
        if int(self.block_size) != self.block_size or self.block_size < 2:
            raise ValueError(f"block_size must be an integer >= 2, got {self.block_size}")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError(f"overlap must lie in [0, 1), got {self.overlap}")
        if self.stride < 1:
            raise ValueError("overlap leaves a stride below one row")

    @property
    def stride(self):
        # round half up; Python's round() would send 12.5 to 12
        return int(np.floor(self.block_size * (1.0 - self.overlap) + 0.5))


@dataclass(frozen=True)
class Block:
    rows: np.ndarray      # indices into A
    a: np.ndarray         # A_i, the row submatrix
    b: np.ndarray         # b_i
    q: np.ndarray         # A_i' = q r
    r: np.ndarray
    b_tilde: np.ndarray   # (r')^{-1} b_i
    x_proj: np.ndarray    # q b_tilde, projection of x onto ran(A_i')


@dataclass(frozen=True)
class BlockPartition:
    blocks: tuple
    spec: BlockSpec
    shape: tuple

    def __len__(self):
        return len(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    def __iter__(self):
        return iter(self.blocks)


def block_rows(n_rows, spec):
    """Row index lists of every block, cyclically wrapping the tail."""
    m = min(spec.block_size, n_rows)
    stride = min(spec.stride, m)
    k = -(-n_rows // stride)
    order = np.arange(n_rows) if spec.row_order is None else np.asarray(spec.row_order, dtype=int)
    if sorted(order.tolist()) != list(range(n_rows)):
        raise ValueError("row_order must be a permutation of the row indices")
    return [order[(i * stride + np.arange(m)) % n_rows] for i in range(k)]


def build_partition(a, b, spec=None):
    """Split ``a`` into overlapping row blocks and factor each block once.

    Every block has exactly ``min(block_size, rows)`` rows; the final block
    wraps around to the first rows so that all rows are covered.
    """
    spec = spec or BlockSpec()
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"b has length {b.shape[0]}, A has {a.shape[0]} rows")
    blocks = []
    for i, rows in enumerate(block_rows(a.shape[0], spec)):
        a_i = a[rows]
        try:
            f = householder_qr(a_i.T)
        except RankDeficient as exc:
            raise RankDeficientBlock(i) from exc
        b_i = b[rows]
        b_tilde = solve_triangular(f.r, b_i, trans="T", lower=False)
        blocks.append(Block(rows=rows, a=a_i, b=b_i, q=f.q, r=f.r,
                            b_tilde=b_tilde, x_proj=f.q @ b_tilde))
    return BlockPartition(blocks=tuple(blocks), spec=spec, shape=a.shape)


def block_count(partition):
    return len(partition.blocks)
