"""Independent oracles and the invariant suite run by ``accproj verify``.

The oracles rebuild each accumulated-projection step by routes that share no
code with the production kernels: an explicit ``alpha_i p + A'u`` form using
``(A_i A_i')^{-1}``, and a rank-one modification of the block that makes its
rows orthogonal to ``p``. Both are only valid when ``p`` is not in
``ran(A_i')``.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .partition import BlockSpec, build_partition
from .problems import gen_tridiag
from .projection import ap_sweep, init_state, optimal_two_vector

STEP_TOL = 1e-8
EQUIV_TOL = 1e-10
GRID_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    events: int = 0
    worst: float = 0.0
    tol: float = 0.0
    counterexample: Optional[dict] = None
    failures: int = 0

    @property
    def passed(self):
        return self.failures == 0

    def record(self, value, context):
        self.events += 1
        self.worst = max(self.worst, value)
        if not value <= self.tol:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = dict(context, value=value, tol=self.tol)


# --------------------------------------------------------------------- oracles

def explicit_step(p, c, a_i, b_i):
    """Step via ``p_new = alpha p + A_i'u``.

    ``u = (A_i A_i')^{-1}(b_i - alpha A_i p)`` and
    ``alpha = (c - (A_i p)'(A_i A_i')^{-1} b_i) / (p'p - (A_i p)'(A_i A_i')^{-1} A_i p)``.
    Also returns the predicted
    ``||p_new||^2 = alpha^2 p'p + b_i'(A_i A_i')^{-1} b_i - alpha^2 (A_i p)'(A_i A_i')^{-1} A_i p``.
    """
    gram = a_i @ a_i.T
    ap = a_i @ p
    g_b = np.linalg.solve(gram, b_i)
    g_ap = np.linalg.solve(gram, ap)
    alpha = (c - ap @ g_b) / (p @ p - ap @ g_ap)
    u = np.linalg.solve(gram, b_i - alpha * ap)
    p_new = alpha * p + a_i.T @ u
    # the squared-alpha weight on p'p is required; a single alpha does not match
    norm2 = alpha ** 2 * (p @ p) + b_i @ g_b - alpha ** 2 * (ap @ g_ap)
    return p_new, float(norm2)


def rank_one_step(p, c, a_i, b_i):
    """Step via the rank-one modified block ``A_i - d p'`` with ``d = A_i p / p'p``.

    Returns ``p_new = p + Abar'v`` and the predicted gain
    ``||p_new||^2 - ||p||^2 = (b_i - c d)'(Abar Abar')^{-1}(b_i - c d)``.
    """
    d = a_i @ p / (p @ p)
    a_bar = a_i - np.outer(d, p)
    rhs = b_i - c * d
    v = np.linalg.solve(a_bar @ a_bar.T, rhs)
    return p + a_bar.T @ v, float(rhs @ v)


def norm_gap(p, x_bar, a_i):
    """``||p_new||^2 - ||p||^2`` from the ground truth ``x_bar``.

    Equals ``y'Abar'(Abar Abar')^{-1} Abar y`` with ``y = x_bar - (x_bar'u)u``
    and ``u = p / ||p||``; needs ``x_bar``, so it is a test-harness check only.
    """
    u = p / np.linalg.norm(p)
    y = x_bar - (x_bar @ u) * u
    a_bar = a_i - np.outer(a_i @ u, u)
    ay = a_bar @ y
    return float(ay @ np.linalg.solve(a_bar @ a_bar.T, ay))


def grid_two_vector(b1, b2, alpha, lo=-100.0, hi=100.0, points=100_000):
    """Brute-force maximum of ``|b1 + t b2| / sqrt(1 + 2 alpha t + t^2)`` on a grid."""
    t = np.linspace(lo, hi, points)
    return float(np.max(np.abs(b1 + t * b2) / np.sqrt(1.0 + 2.0 * alpha * t + t * t)))


# ---------------------------------------------------------------- the suite

def _random_square(rng, n):
    while True:
        a = rng.standard_normal((n, n))
        if np.linalg.cond(a) < 1e6:
            x = rng.standard_normal(n)
            return a, x


def _block_size(n):
    return max(2, min(n, n // 3))


def step_invariants(results, a, x, spec, sweeps, label):
    """Run ``sweeps`` sweeps and record the per-step identities."""
    b = a @ x
    part = build_partition(a, b, spec)
    state = init_state(a, b)
    chk = {k: results[k] for k in ("bookkeeping", "orthogonality", "pythagoras",
                                   "telescoping", "monotone")}
    chk["bookkeeping"].record(state.bookkeeping_error(), {"case": label, "sweep": 0, "step": -1})
    xnorm = np.linalg.norm(x)
    for s in range(sweeps):
        start = state
        increments = []

        def on_step(i, old, new):
            ctx = {"case": label, "sweep": s, "step": i}
            dp = new.p - old.p
            n_old, n_new = np.linalg.norm(old.p), np.linalg.norm(new.p)
            increments.append(dp @ dp)
            chk["bookkeeping"].record(new.bookkeeping_error(), ctx)
            scale = max(n_new * n_old, 1e-300)
            resid = x - new.p
            chk["orthogonality"].record(max(abs(dp @ old.p) / scale,
                                            abs(resid @ new.p) / (xnorm * n_new),
                                            abs(resid @ old.p) / (xnorm * n_old)), ctx)
            chk["pythagoras"].record(abs(old.p @ old.p + dp @ dp - new.p @ new.p)
                                     / max(new.p @ new.p, 1e-300), ctx)
            chk["monotone"].record(max(0.0, n_old - n_new) / n_new, ctx)

        state = ap_sweep(state, part, "fast", on_step=on_step)
        tele = abs(start.p @ start.p + sum(increments) - state.p @ state.p)
        chk["telescoping"].record(tele / (state.p @ state.p), {"case": label, "sweep": s})


def oracle_equivalence(results, a, x, spec, label):
    """One sweep with each kernel plus the two explicit reconstructions per step."""
    b = a @ x
    part = build_partition(a, b, spec)
    state = init_state(a, b)
    naive = ap_sweep(state, part, "naive")
    steps = []
    fast = ap_sweep(state, part, "fast", on_step=lambda i, old, new: steps.append((i, old, new)))
    scale = np.linalg.norm(fast.p)
    results["naive_fast"].record(max(np.linalg.norm(naive.p - fast.p) / scale,
                                     abs(naive.c - fast.c) / abs(fast.c)), {"case": label})
    for i, old, new in steps:
        blk = part[i]
        ctx = {"case": label, "step": i}
        n2 = new.p @ new.p
        p6, norm2 = explicit_step(old.p, old.c, blk.a, blk.b)
        results["explicit_form"].record(max(np.linalg.norm(p6 - new.p) / np.sqrt(n2),
                                            abs(norm2 - n2) / n2), ctx)
        p_r1, gain = rank_one_step(old.p, old.c, blk.a, blk.b)
        results["rank_one_form"].record(max(np.linalg.norm(p_r1 - new.p) / np.sqrt(n2),
                                            abs(old.p @ old.p + gain - n2) / n2), ctx)
        results["norm_gap"].record(abs(old.p @ old.p + norm_gap(old.p, x, blk.a) - n2) / n2, ctx)


def two_vector_maximality(results, rng, draws):
    for k in range(draws):
        b1, b2 = rng.uniform(-10.0, 10.0, size=2)
        alpha = rng.uniform(-0.99, 0.99)
        try:
            res = optimal_two_vector(b1, b2, alpha)
        except ArithmeticError:
            continue
        ctx = {"draw": k, "b1": float(b1), "b2": float(b2), "alpha": float(alpha)}
        results["two_vector_grid"].record(max(0.0, grid_two_vector(b1, b2, alpha) - res.fs), ctx)
        results["two_vector_bound"].record(max(0.0, max(abs(b1), abs(b2)) - res.fs), ctx)


def run_suite(seed=0, sizes=(10, 30, 60), systems=5, sweeps=100, equivalence_systems=100,
              draws=1000, tridiag_n=100, tridiag_sweeps=200):
    """Run every invariant check and return ``{name: CheckResult}``."""
    results = {
        "bookkeeping": CheckResult("bookkeeping", tol=STEP_TOL),
        "orthogonality": CheckResult("orthogonality", tol=STEP_TOL),
        "pythagoras": CheckResult("pythagoras", tol=STEP_TOL),
        "telescoping": CheckResult("telescoping", tol=STEP_TOL),
        "monotone": CheckResult("monotone", tol=1e-10),
        "naive_fast": CheckResult("naive_fast", tol=EQUIV_TOL),
        "explicit_form": CheckResult("explicit_form", tol=STEP_TOL),
        "rank_one_form": CheckResult("rank_one_form", tol=STEP_TOL),
        "norm_gap": CheckResult("norm_gap", tol=STEP_TOL),
        "two_vector_grid": CheckResult("two_vector_grid", tol=GRID_TOL),
        "two_vector_bound": CheckResult("two_vector_bound", tol=1e-12),
    }
    rng = np.random.default_rng(seed)
    for n in sizes:
        spec = BlockSpec(block_size=_block_size(n), overlap=0.5)
        for k in range(systems):
            a, x = _random_square(rng, n)
            step_invariants(results, a, x, spec, sweeps, f"random n={n} #{k}")
    if tridiag_n:
        prob = gen_tridiag(tridiag_n)
        step_invariants(results, prob.a, prob.x_exact, BlockSpec(20, 0.5), tridiag_sweeps,
                        f"tridiag n={tridiag_n}")
    for k in range(equivalence_systems):
        n = sizes[k % len(sizes)]
        a, x = _random_square(rng, n)
        oracle_equivalence(results, a, x, BlockSpec(_block_size(n), 0.5), f"equiv n={n} #{k}")
    two_vector_maximality(results, rng, draws)
    return results
