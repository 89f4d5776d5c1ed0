"""Experiment tables: iteration counts on the standard grids plus report files.

Reference iteration counts are carried as extra columns for comparison only; the
overlap pattern and MSAP2 window used for them are unknown, so exact
agreement is not expected.
"""
import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .baselines import GmresConfig, JacobiConfig, solve_block_jacobi, solve_gmres
from .exceptions import AccProjError, NotConverged
from .problems import make_problem
from .solvers import SOLVERS, SolverConfig

TABLES = ("t1", "t2", "t3", "t4", "t5", "t7")
BLOCK_SIZES = (10, 15, 20, 25, 30, 35, 40, 50)
TOLERANCES = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
T5_RESTARTS = (2, 5, 8, 13, 18, 25, 32)
T7_BLOCK_SIZES = (10, 15, 20, 25, 30, 35, 40, 45)
SOLVER_ORDER = ("sap", "msap1", "msap2", "gmres", "jacobi")

# reference iteration counts, keyed by table then grid point
REFERENCE = {
    "t1": dict(zip(TOLERANCES, (724, 872, 1020, 1169, 1317))),
    "t2": dict(zip(BLOCK_SIZES, (11404, 2994, 1020, 443, 222, 104, 57, 27))),
    "t3": dict(zip(BLOCK_SIZES, (2134, 403, 134, 69, 38, 34, 18, 15))),
    "t4": dict(zip(BLOCK_SIZES, (185, 102, 42, 30, 16, 14, 10, 7))),
    # restart -> (msap block size, msap iters, gmres outer, gmres inner, msap err, gmres err)
    "t5": {
        2: (20, 200, 2000, 2, 7.02e-7, 6.96e-5),
        5: (30, 200, 2000, 5, 3.49e-7, 5.68e-5),
        8: (40, 50, 1415, 7, 9.57e-7, 4.92e-5),
        13: (50, 33, 538, 3, 3.32e-7, 4.4e-5),
        18: (60, 22, 282, 18, 2.41e-7, 4.01e-5),
        25: (70, 17, 148, 24, 5.06e-7, 3.71e-5),
        32: (80, 13, 91, 28, 3.01e-8, 3.48e-5),
    },
    # block size -> (jacobi iters, msap iters, jacobi err, msap err)
    "t7": {
        10: (7836, 1745, 6.9553e-5, 7.0191e-7),
        15: (5347, 830, 5.6761e-5, 3.4931e-7),
        20: (4082, 390, 4.921e-5, 9.5735e-7),
        25: (3316, 185, 4.3997e-5, 3.3189e-7),
        30: (2806, 130, 4.0135e-5, 2.4148e-7),
        35: (2440, 85, 3.7142e-5, 5.0644e-7),
        40: (2159, 55, 3.4765e-5, 3.0083e-8),
        45: (1946, 45, 3.2554e-5, 3.132e-8),
    },
}

COLUMNS = ("table", "grid_value", "problem", "solver", "block_size", "overlap", "window",
           "cond_threshold", "restart", "tol", "iterations", "outer", "inner",
           "wall_seconds", "rel_error", "final_residual", "converged", "reference_iterations",
           "error")


@dataclass(frozen=True)
class BenchCase:
    table: str
    grid_value: float
    problem: str
    solver: str
    config: object
    reference: Optional[int] = None
    repeat: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.repeat < 1:
            raise ValueError("repeat must be >= 1")
        if self.solver not in SOLVER_ORDER:
            raise ValueError(f"unknown solver {self.solver!r}")

    def sort_key(self):
        c = self.config
        return (self.grid_value, SOLVER_ORDER.index(self.solver),
                getattr(c, "overlap", -1.0), getattr(c, "window", -1),
                getattr(c, "cond_threshold", -1.0))


@dataclass
class BenchRow:
    case: BenchCase
    iterations: Optional[int] = None
    outer: Optional[int] = None
    inner: Optional[int] = None
    wall_seconds: Optional[float] = None
    rel_error: Optional[float] = None
    final_residual: Optional[float] = None
    converged: bool = False
    error: str = ""

    def record(self):
        c = self.case.config
        return {
            "table": self.case.table,
            "grid_value": self.case.grid_value,
            "problem": self.case.problem,
            "solver": self.case.solver,
            "block_size": getattr(c, "block_size", None),
            "overlap": getattr(c, "overlap", None),
            "window": getattr(c, "window", None) if self.case.solver == "msap2" else None,
            "cond_threshold": (getattr(c, "cond_threshold", None)
                               if self.case.solver == "msap2" else None),
            "restart": getattr(c, "restart", None),
            "tol": c.tol,
            "iterations": self.iterations,
            "outer": self.outer,
            "inner": self.inner,
            "wall_seconds": self.wall_seconds,
            "rel_error": self.rel_error,
            "final_residual": self.final_residual,
            "converged": self.converged,
            "reference_iterations": self.case.reference,
            "error": self.error,
        }


@dataclass
class BenchTable:
    table: str
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def iterations(self, solver, **knobs):
        """``{grid_value: iterations}`` for one solver at fixed knob values."""
        out = {}
        for row in self.rows:
            if row.case.solver != solver:
                continue
            if all(getattr(row.case.config, k, None) == v for k, v in knobs.items()):
                out[row.case.grid_value] = row.iterations
        return out

    def closest_to_reference(self):
        """Per (grid value, solver), the grid row nearest the reference count."""
        best = {}
        for row in self.rows:
            ref = row.case.reference
            if ref is None or row.iterations is None:
                continue
            key = (row.case.grid_value, row.case.solver)
            dist = abs(row.iterations - ref) / ref
            if key not in best or dist < best[key][0]:
                best[key] = (dist, row)
        return {k: v[1] for k, v in sorted(best.items())}


@lru_cache(maxsize=8)
def _problem(text):
    return make_problem(text)


def run_case(case):
    prob = _problem(case.problem)
    row = BenchRow(case=case)
    times = []
    try:
        for _ in range(case.repeat):
            if case.solver == "gmres":
                rep = solve_gmres(prob.a, prob.b, case.config)
            elif case.solver == "jacobi":
                rep = solve_block_jacobi(prob.a, prob.b, case.config)
            else:
                rep = SOLVERS[case.solver](prob.a, prob.b, case.config)
            times.append(rep.wall_time)
    except NotConverged as exc:
        rep = exc.report
        row.error = str(exc)
    except (AccProjError, ValueError, np.linalg.LinAlgError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    row.iterations = rep.outer if case.solver == "gmres" else rep.sweeps
    row.outer, row.inner = rep.outer, rep.inner
    row.wall_seconds = float(np.median(times)) if times else rep.wall_time
    row.final_residual = rep.final_residual
    row.converged = rep.converged
    if prob.x_exact is not None:
        row.rel_error = rep.relative_error(prob.x_exact)
    return row


def build_cases(table, overlaps=(0.5,), windows=(5,), cond_thresholds=(1e8,),
                max_sweeps=20000, repeat=1):
    """Enumerate the grid of one table; knob lists multiply the AP solver rows."""
    table = table.lower()
    if table not in TABLES:
        raise ValueError(f"unknown table {table!r}; choose from {TABLES}")
    knobs = list(itertools.product(overlaps, windows, cond_thresholds))
    cases = []

    def ap_configs(block_size, tol, solver):
        seen = set()
        for ov, w, k in knobs:
            if solver != "msap2":
                w, k = SolverConfig.window, SolverConfig.cond_threshold
            if (ov, w, k) in seen:
                continue
            seen.add((ov, w, k))
            yield SolverConfig(block_size=block_size, overlap=ov, tol=tol,
                               max_sweeps=max_sweeps, window=w, cond_threshold=k)

    if table == "t1":
        for tol in TOLERANCES:
            for cfg in ap_configs(20, tol, "sap"):
                cases.append(BenchCase("t1", tol, "tridiag:n=100", "sap", cfg,
                                       REFERENCE["t1"][tol], repeat))
    elif table in ("t2", "t3", "t4"):
        solver = {"t2": "sap", "t3": "msap1", "t4": "msap2"}[table]
        for m in BLOCK_SIZES:
            for cfg in ap_configs(m, 1e-5, solver):
                cases.append(BenchCase(table, m, "tridiag:n=100", solver, cfg,
                                       REFERENCE[table][m], repeat))
    elif table == "t5":
        n = 200
        for r in T5_RESTARTS:
            ref = REFERENCE["t5"][r]
            m = int(math.floor(math.sqrt(r * n) + 0.5))
            for cfg in ap_configs(m, 1e-5, "msap2"):
                cases.append(BenchCase("t5", r, f"fem:n={n}", "msap2", cfg, ref[1], repeat))
            cases.append(BenchCase("t5", r, f"fem:n={n}", "gmres",
                                   GmresConfig(restart=r, tol=1e-5, max_outer=2000),
                                   ref[2], repeat))
    else:
        for m in T7_BLOCK_SIZES:
            ref = REFERENCE["t7"][m]
            for cfg in ap_configs(m, 1e-5, "msap2"):
                cases.append(BenchCase("t7", m, "fem:n=200", "msap2", cfg, ref[1], repeat))
            cases.append(BenchCase("t7", m, "fem:n=200", "jacobi",
                                   JacobiConfig(block_size=m, tol=1e-5, max_iters=100000),
                                   ref[0], repeat))
    return sorted(cases, key=BenchCase.sort_key)


def run_table(table, overlaps=(0.5,), windows=(5,), cond_thresholds=(1e8,),
              max_sweeps=20000, repeat=1, jobs=1):
    """Run every grid point of ``table``; failures are recorded in their row."""
    cases = build_cases(table, overlaps, windows, cond_thresholds, max_sweeps, repeat)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_case, cases))
    else:
        rows = [run_case(c) for c in cases]
    rows.sort(key=lambda r: r.case.sort_key())
    return BenchTable(table=table.lower(), rows=rows)


# ------------------------------------------------------------------ reports

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv_rows(fh, rows):
    writer = csv.DictWriter(fh, fieldnames=list(COLUMNS), quoting=csv.QUOTE_MINIMAL,
                            lineterminator="\r\n")
    writer.writeheader()
    for rec in rows:
        writer.writerow({k: _cell(rec.get(k)) if not isinstance(rec.get(k), str) else rec[k]
                         for k in COLUMNS})


def read_csv_rows(fh):
    return list(csv.DictReader(fh))


def _json_config(row):
    cfg = row.case.config
    d = cfg.to_dict()
    d["seed"] = row.case.seed
    d["repeat"] = row.case.repeat
    return d


def emit_report(table, path, fmt=None):
    """Write ``table`` as CSV or JSON (chosen from ``fmt`` or the file suffix)."""
    if not table.rows:
        raise ValueError("refusing to write an empty table")
    fmt = (fmt or os.path.splitext(path)[1].lstrip(".")).lower()
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    if fmt == "csv":
        buf = io.StringIO()
        write_csv_rows(buf, [r.record() for r in table.rows])
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        doc = {"table": table.table, "columns": list(COLUMNS),
               "rows": [dict(r.record(), config=_json_config(r)) for r in table.rows]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=False)
            fh.write("\n")
    return path
