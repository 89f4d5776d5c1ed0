"""Test-problem generators and Matrix Market input/output."""
import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import ParseError, QuadratureFailure, RankDeficient, UnsupportedField
from .linalg import as_matrix, as_vector, householder_qr


@dataclass
class LinearProblem:
    """A system ``a x = b`` with an optional known solution.

    When ``discrete`` is true, ``x_exact`` solves the system to 1e-10 relative
    residual. FEM problems carry the nodal values of the continuous solution
    instead and set ``discrete=False``.
    """

    a: np.ndarray
    b: np.ndarray
    x_exact: Optional[np.ndarray] = None
    name: str = ""
    discrete: bool = True

    def __post_init__(self):
        self.a = as_matrix(self.a, "a")
        self.b = as_vector(self.b, "b")
        if self.b.shape[0] != self.a.shape[0]:
            raise ValueError("b does not match the row count of a")
        if self.x_exact is not None:
            self.x_exact = as_vector(self.x_exact, "x_exact")
            if self.discrete:
                gap = np.linalg.norm(self.a @ self.x_exact - self.b)
                if gap > 1e-10 * np.linalg.norm(self.b):
                    raise ValueError(f"x_exact leaves residual {gap:.3e}")

    @property
    def shape(self):
        return self.a.shape


def gen_tridiag(n, x_exact=None):
    """``tridiag(-1, 2, -1)`` of order ``n`` with ``b = A x_exact`` (default all ones)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    a = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    x = np.ones(n) if x_exact is None else as_vector(x_exact, "x_exact")
    return LinearProblem(a=a, b=a @ x, x_exact=x, name=f"tridiag:n={n}")


@dataclass(frozen=True)
class BvpSpec:
    """Two-point problem ``(a u')' + b u = f`` on (0, 1) with ``u(0) = u(1) = 0``."""

    n: int
    a_coeff: Callable
    b_coeff: Callable
    forcing: Callable
    exact_u: Optional[Callable] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        probe = np.asarray(self.a_coeff(np.linspace(0.0, 1.0, 65)), dtype=float)
        if not np.all(probe > 0):
            raise ValueError("a_coeff must be positive on [0, 1]")


def model_bvp(n=200):
    """``a = 1 + t``, ``b = t`` and exact solution ``u = t(1-t)e^(2+t)``.

    The forcing is ``a'u' + a u'' + b u = e^(2+t) (1 - 4t - 4t^2 - 2t^3)``.
    """
    return BvpSpec(
        n=n,
        a_coeff=lambda t: 1.0 + t,
        b_coeff=lambda t: t,
        forcing=lambda t: np.exp(2.0 + t) * (1.0 - 4.0 * t - 4.0 * t ** 2 - 2.0 * t ** 3),
        exact_u=lambda t: t * (1.0 - t) * np.exp(2.0 + t),
    )


_GAUSS_X = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GAUSS_W = np.array([5.0, 8.0, 5.0]) / 9.0


def assemble_fem_bvp(spec):
    """Piecewise-linear Galerkin system for a :class:`BvpSpec`.

    Uses ``n + 1`` equal subintervals and the weak form
    ``int(-a u'v' + b u v) = int(f v)``; element integrals use 3-point Gauss
    quadrature. The returned problem carries the nodal interpolant of
    ``exact_u`` (if given) with ``discrete=False``.
    """
    n = spec.n
    h = 1.0 / (n + 1)
    nodes = np.linspace(0.0, 1.0, n + 2)
    left = nodes[:-1]
    # quadrature points, shape (elements, 3)
    t = left[:, None] + 0.5 * h * (1.0 + _GAUSS_X[None, :])
    w = 0.5 * h * _GAUSS_W
    with np.errstate(all="raise"):
        try:
            av = np.broadcast_to(np.asarray(spec.a_coeff(t), dtype=float), t.shape)
            bv = np.broadcast_to(np.asarray(spec.b_coeff(t), dtype=float), t.shape)
            fv = np.broadcast_to(np.asarray(spec.forcing(t), dtype=float), t.shape)
        except FloatingPointError as exc:
            raise QuadratureFailure(str(exc)) from exc
    if not (np.all(np.isfinite(av)) and np.all(np.isfinite(bv)) and np.all(np.isfinite(fv))):
        raise QuadratureFailure("coefficient evaluation produced non-finite values")
    phi0 = (left[:, None] + h - t) / h
    phi1 = (t - left[:, None]) / h
    stiff = (av @ w) / h ** 2          # int a phi_i' phi_j' = +-stiff
    m00 = (bv * phi0 * phi0) @ w
    m01 = (bv * phi0 * phi1) @ w
    m11 = (bv * phi1 * phi1) @ w
    f0 = (fv * phi0) @ w
    f1 = (fv * phi1) @ w

    size = n + 2
    diag = np.zeros(size)
    off = np.zeros(size - 1)
    load = np.zeros(size)
    diag[:-1] += -stiff + m00
    diag[1:] += -stiff + m11
    off += stiff + m01
    load[:-1] += f0
    load[1:] += f1
    a = np.diag(diag[1:-1]) + np.diag(off[1:-1], 1) + np.diag(off[1:-1], -1)
    x = None if spec.exact_u is None else np.asarray(spec.exact_u(nodes[1:-1]), dtype=float)
    return LinearProblem(a=a, b=load[1:-1], x_exact=x, name=f"fem:n={n}", discrete=False)


def gen_random_consistent(rows, cols, seed=0, max_tries=10):
    """Seeded full-row-rank Gaussian system with ``b = A x_exact``."""
    if rows > cols:
        raise ValueError(f"need rows <= cols, got {rows} > {cols}")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        a = rng.standard_normal((rows, cols))
        try:
            householder_qr(a.T)
        except RankDeficient:
            continue
        x = rng.standard_normal(cols)
        return LinearProblem(a=a, b=a @ x, x_exact=x,
                             name=f"random:rows={rows},cols={cols},seed={seed}")
    raise RankDeficient(f"no full-rank draw in {max_tries} attempts")


_PROBLEM_PARAMS = {
    "tridiag": (("n",), {}),
    "fem": ((), {"n": 200}),
    "random": (("rows", "cols"), {"seed": 0}),
}


def make_problem(text):
    """Build a problem from ``tridiag:n=N``, ``fem:n=N`` or ``random:rows=R,cols=C,seed=S``."""
    kind, _, rest = text.partition(":")
    if kind not in _PROBLEM_PARAMS:
        raise ValueError(f"unknown problem kind {kind!r}")
    required, defaults = _PROBLEM_PARAMS[kind]
    params = dict(defaults)
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        key = key.strip()
        if not eq:
            raise ValueError(f"malformed problem parameter {item!r}")
        if key not in required and key not in defaults:
            raise ValueError(f"unknown parameter {key!r} for problem {kind!r}")
        try:
            params[key] = int(value)
        except ValueError:
            raise ValueError(f"problem parameter {key!r} must be an integer") from None
    missing = [k for k in required if k not in params]
    if missing:
        raise ValueError(f"problem {kind!r} needs parameter(s) {missing}")
    if kind == "tridiag":
        return gen_tridiag(params["n"])
    if kind == "fem":
        return assemble_fem_bvp(model_bvp(params["n"]))
    return gen_random_consistent(params["rows"], params["cols"], params["seed"])


# ---------------------------------------------------------------- Matrix Market

_FORMATS = ("coordinate", "array")
_FIELDS = ("real", "integer", "double")
_SYMMETRIES = ("general", "symmetric", "skew-symmetric")


def _numbered_lines(path):
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            yield lineno, line.strip()


def read_mtx(path):
    """Read a real Matrix Market file into a dense array."""
    lines = _numbered_lines(path)
    try:
        lineno, banner = next(lines)
    except StopIteration:
        raise ParseError("empty file", line=1, path=path) from None
    parts = banner.split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket" or parts[1].lower() != "matrix":
        raise ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
                         line=lineno, path=path)
    fmt, fld, sym = (p.lower() for p in parts[2:])
    if fmt not in _FORMATS:
        raise ParseError(f"unknown format {fmt!r}", line=lineno, path=path)
    if fld in ("complex", "pattern"):
        raise UnsupportedField(f"field {fld!r} is not supported", line=lineno, path=path)
    if fld not in _FIELDS:
        raise ParseError(f"unknown field {fld!r}", line=lineno, path=path)
    if sym == "hermitian":
        raise UnsupportedField("hermitian symmetry needs a complex field", line=lineno, path=path)
    if sym not in _SYMMETRIES:
        raise ParseError(f"unknown symmetry {sym!r}", line=lineno, path=path)

    body = ((no, text) for no, text in lines if text and not text.startswith("%"))
    try:
        lineno, size_line = next(body)
    except StopIteration:
        raise ParseError("missing size line", line=lineno + 1, path=path) from None
    want = 3 if fmt == "coordinate" else 2
    sizes = size_line.split()
    if len(sizes) != want:
        raise ParseError(f"size line needs {want} integers", line=lineno, path=path)
    try:
        sizes = [int(s) for s in sizes]
    except ValueError:
        raise ParseError("size line must hold integers", line=lineno, path=path) from None
    if any(s < 0 for s in sizes):
        raise ParseError("negative dimension", line=lineno, path=path)
    nrows, ncols = sizes[:2]
    if sym != "general" and nrows != ncols:
        raise ParseError(f"{sym} matrix must be square", line=lineno, path=path)
    a = np.zeros((nrows, ncols))

    def number(token, no):
        try:
            return float(token)
        except ValueError:
            raise ParseError(f"bad number {token!r}", line=no, path=path) from None

    if fmt == "coordinate":
        nnz = sizes[2]
        count = 0
        for no, text in body:
            if count == nnz:
                raise ParseError(f"more than the declared {nnz} entries", line=no, path=path)
            tok = text.split()
            if len(tok) != 3:
                raise ParseError("entry needs 'row col value'", line=no, path=path)
            try:
                i, j = int(tok[0]) - 1, int(tok[1]) - 1
            except ValueError:
                raise ParseError("indices must be integers", line=no, path=path) from None
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise ParseError(f"index ({i + 1}, {j + 1}) out of range", line=no, path=path)
            if sym != "general" and j > i:
                raise ParseError("symmetric storage holds the lower triangle only",
                                 line=no, path=path)
            val = number(tok[2], no)
            a[i, j] += val
            if i != j:
                if sym == "symmetric":
                    a[j, i] += val
                elif sym == "skew-symmetric":
                    a[j, i] -= val
            count += 1
        if count != nnz:
            raise ParseError(f"expected {nnz} entries, found {count}", line=lineno, path=path)
        return a

    if sym == "general":
        slots = [(i, j) for j in range(ncols) for i in range(nrows)]
    elif sym == "symmetric":
        slots = [(i, j) for j in range(ncols) for i in range(j, nrows)]
    else:
        slots = [(i, j) for j in range(ncols) for i in range(j + 1, nrows)]
    k = 0
    for no, text in body:
        for token in text.split():
            if k == len(slots):
                raise ParseError(f"more than the expected {len(slots)} values", line=no, path=path)
            i, j = slots[k]
            val = number(token, no)
            a[i, j] = val
            if sym == "symmetric":
                a[j, i] = val
            elif sym == "skew-symmetric":
                a[j, i] = -val
            k += 1
    if k != len(slots):
        raise ParseError(f"expected {len(slots)} values, found {k}", line=lineno, path=path)
    return a


def companion_rhs_path(path):
    stem, ext = os.path.splitext(path)
    return f"{stem}_b{ext or '.mtx'}"


def read_matrix_market(path, rhs_path=None):
    """Load ``A`` from ``path`` and ``b`` from ``rhs_path``.

    Without ``rhs_path`` the companion ``<stem>_b.mtx`` is used when present;
    otherwise ``b = A @ ones`` and ``x_exact = ones``.
    """
    a = read_mtx(path)
    if rhs_path is None and os.path.exists(companion_rhs_path(path)):
        rhs_path = companion_rhs_path(path)
    if rhs_path is None:
        x = np.ones(a.shape[1])
        return LinearProblem(a=a, b=a @ x, x_exact=x, name=os.path.basename(path))
    rhs = read_mtx(rhs_path)
    if rhs.ndim != 2 or 1 not in rhs.shape or rhs.size != a.shape[0]:
        raise ParseError(f"right-hand side must be a {a.shape[0]}-vector", path=rhs_path)
    return LinearProblem(a=a, b=rhs.ravel(), name=os.path.basename(path))


def write_mtx(path, a, fmt="coordinate", comment=None):
    """Write a dense real matrix in Matrix Market ``general`` storage."""
    a = np.atleast_2d(as_matrix(np.atleast_2d(a), "a"))
    if fmt not in _FORMATS:
        raise ValueError(f"fmt must be one of {_FORMATS}")
    rows, cols = a.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"%%MatrixMarket matrix {fmt} real general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        if fmt == "coordinate":
            ii, jj = np.nonzero(a)
            order = np.lexsort((ii, jj))
            fh.write(f"{rows} {cols} {len(ii)}\n")
            for k in order:
                fh.write(f"{ii[k] + 1} {jj[k] + 1} {float(a[ii[k], jj[k]])!r}\n")
        else:
            fh.write(f"{rows} {cols}\n")
            for val in a.T.ravel():
                fh.write(f"{float(val)!r}\n")


def write_matrix_market(path, problem):
    """Write ``problem.a`` to ``path`` and ``problem.b`` to the companion file."""
    write_mtx(path, problem.a, comment=problem.name or None)
    write_mtx(companion_rhs_path(path), problem.b[:, None], fmt="array")
