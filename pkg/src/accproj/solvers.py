"""SAP, MSAP1 and MSAP2 drivers built on the accumulated-projection sweep."""
import time
from dataclasses import dataclass, field, asdict
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import NotConverged, RankDeficient
from .linalg import as_matrix, as_vector, condition_estimate, relative_residual
from .partition import BlockSpec, build_partition
from .projection import KERNELS, ap_sweep, init_state, window_project

BOOKKEEPING_TOL = 1e-8
MONOTONE_SLACK = 1e-10
PARALLEL_TOL = 1e-13

MSAP1_VARIANTS = ("post", "pre")


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the three accumulated-projection drivers.

    ``window`` and ``cond_threshold`` only affect MSAP2; ``msap1_variant``
    only affects MSAP1 (``"post"`` projects onto the two newest iterates right
    after each sweep, ``"pre"`` projects the sweep's starting point onto the
    two previous iterates).
    """

    block_size: int = 20
    overlap: float = 0.5
    tol: float = 1e-5
    max_sweeps: int = 20000
    window: int = 5
    cond_threshold: float = 1e8
    kernel: str = "fast"
    msap1_variant: str = "post"
    row_order: Optional[Sequence[int]] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if not self.cond_threshold > 1:
            raise ValueError(f"cond_threshold must exceed 1, got {self.cond_threshold}")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.msap1_variant not in MSAP1_VARIANTS:
            raise ValueError(f"msap1_variant must be one of {MSAP1_VARIANTS}")
        # validates block_size / overlap
        self.block_spec()

    def block_spec(self):
        return BlockSpec(block_size=self.block_size, overlap=self.overlap,
                         row_order=self.row_order)

    def to_dict(self):
        d = asdict(self)
        if d["row_order"] is not None:
            d["row_order"] = list(map(int, d["row_order"]))
        return d


class InvariantViolation(NamedTuple):
    sweep: int
    kind: str
    value: float


@dataclass
class SolveReport:
    solution: np.ndarray
    converged: bool
    sweeps: int
    residual_history: list
    pnorm_history: list = field(default_factory=list)
    invariant_log: list = field(default_factory=list)
    wall_time: float = 0.0
    method: str = ""
    block_steps: int = 0
    c: Optional[float] = None
    # GMRES only: restart cycles used and inner steps in the final cycle
    outer: Optional[int] = None
    inner: Optional[int] = None
    inner_history: list = field(default_factory=list)

    @property
    def final_residual(self):
        return self.residual_history[-1] if self.residual_history else float("nan")

    def relative_error(self, x_exact):
        x_exact = np.asarray(x_exact, dtype=float)
        return float(np.linalg.norm(x_exact - self.solution) / np.linalg.norm(x_exact))

    def summary(self):
        d = {k: v for k, v in asdict(self).items() if k != "solution"}
        d["invariant_log"] = [tuple(v) for v in self.invariant_log]
        return d


def _two_vector(old, new, guard=True):
    """Project onto span{old.p, new.p}; falls back to ``new`` when they are dependent.

    With ``guard`` the projection is also skipped once the cosine between the
    two vectors exceeds ``1 - PARALLEL_TOL``.
    """
    if guard:
        denom = np.linalg.norm(old.p) * np.linalg.norm(new.p)
        if denom == 0.0 or abs(float(old.p @ new.p)) / denom > 1.0 - PARALLEL_TOL:
            return new
    try:
        return window_project([old.p, new.p], [old.c, new.c])
    except RankDeficient:
        return new


def _drive(a, b, config, method, before=None, after=None):
    t0 = time.perf_counter()
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] > a.shape[1]:
        raise ValueError(f"need rows <= cols, got shape {a.shape}")
    partition = build_partition(a, b, config.block_spec())
    state = init_state(a, b)
    res = relative_residual(a, state.p, b)
    residuals, pnorms, log = [res], [state.norm], []
    if state.bookkeeping_error() > BOOKKEEPING_TOL:
        log.append(InvariantViolation(0, "bookkeeping", state.bookkeeping_error()))

    def report(converged):
        return SolveReport(solution=state.p.copy(), converged=converged, sweeps=s,
                           residual_history=residuals, pnorm_history=pnorms,
                           invariant_log=log, wall_time=time.perf_counter() - t0,
                           method=method, block_steps=s * len(partition), c=state.c)

    s = 0
    while res > config.tol:
        if s >= config.max_sweeps:
            raise NotConverged(report(False),
                               f"{method} stopped after {s} sweeps at residual {res:.3e}")
        start = before(s, state) if before else state
        swept = ap_sweep(start, partition, config.kernel)
        new = after(s, state, swept) if after else swept
        s += 1
        if new.norm < swept.norm * (1.0 - MONOTONE_SLACK):
            log.append(InvariantViolation(s, "acceleration", swept.norm - new.norm))
        if new.norm < state.norm * (1.0 - MONOTONE_SLACK):
            log.append(InvariantViolation(s, "monotone", state.norm - new.norm))
        if new.bookkeeping_error() > BOOKKEEPING_TOL:
            log.append(InvariantViolation(s, "bookkeeping", new.bookkeeping_error()))
        state = new
        res = relative_residual(a, state.p, b)
        residuals.append(res)
        pnorms.append(state.norm)
    return report(True)


def solve_sap(a, b, config=None):
    """Repeat accumulated-projection sweeps until ``||b - Ax|| / ||b|| <= tol``.

    For square nonsingular ``a`` the limit is the solution; for consistent
    underdetermined systems it is the minimum-norm solution.

    Raises
    ------
    NotConverged
        After ``config.max_sweeps`` sweeps; the partial report is attached.
    """
    return _drive(a, b, config or SolverConfig(), "sap")


def solve_msap1(a, b, config=None):
    """SAP accelerated by a projection onto the span of two successive iterates."""
    config = config or SolverConfig()
    history = []

    def after(s, state, swept):
        if config.msap1_variant == "pre" or s == 0:
            return swept
        return _two_vector(state, swept)

    def before(s, state):
        history.append(state)
        if config.msap1_variant == "post" or len(history) < 2:
            return state
        return _two_vector(history[-2], state)

    return _drive(a, b, config, "msap1", before=before, after=after)


def solve_msap2(a, b, config=None):
    """SAP with a sliding window of recent sweep outputs.

    While the window matrix ``H`` is well conditioned (condition number at
    most ``cond_threshold``) the iterate is projected onto its span and the
    oldest row is dropped; otherwise the two-vector projection is used and
    ``H`` is cut back to its first row.
    """
    config = config or SolverConfig()
    rows, values = [], []

    def after(s, state, swept):
        rows.append(swept.p)
        values.append(swept.c)
        if len(rows) < config.window:
            return _two_vector(state, swept, guard=False)
        new = None
        if condition_estimate(np.vstack(rows)) <= config.cond_threshold:
            try:
                new = window_project(rows, values)
            except RankDeficient:
                new = None
        if new is not None:
            del rows[0], values[0]
            return new
        del rows[1:], values[1:]
        return _two_vector(state, swept, guard=False)

    return _drive(a, b, config, "msap2", after=after)


SOLVERS = {"sap": solve_sap, "msap1": solve_msap1, "msap2": solve_msap2}
