"""Command-line entry point: ``accproj {solve,bench,gen,verify}``.

Exit codes: 0 success, 1 usage or parse error, 2 non-convergence (solve) or a
failed invariant (verify).
"""
import argparse
import json
import os
import sys

import numpy as np

from .baselines import GmresConfig, JacobiConfig, solve_block_jacobi, solve_gmres
from .bench import TABLES, emit_report, run_table
from .exceptions import AccProjError, NotConverged, ParseError
from .problems import make_problem, read_matrix_market, write_matrix_market
from .solvers import SOLVERS, SolverConfig
from .verify import run_suite

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _real(text):
    # float() ignores the locale, so '1,5' is rejected rather than read as 1.5
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not np.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _list_of(kind):
    def parse(text):
        return [kind(item) for item in text.split(",") if item.strip()]
    return parse


def build_parser():
    parser = _Parser(prog="accproj", description="Accumulated projection linear solvers.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    solve = sub.add_parser("solve", help="solve one system")
    source = solve.add_mutually_exclusive_group(required=True)
    source.add_argument("--matrix", help="Matrix Market file (companion <stem>_b.mtx = rhs)")
    source.add_argument("--problem", help="tridiag:n=N | fem:n=N | random:rows=R,cols=C,seed=S")
    solve.add_argument("--solver", required=True, choices=sorted(SOLVERS) + ["gmres", "jacobi"])
    solve.add_argument("--block-size", type=_positive_int, default=20)
    solve.add_argument("--overlap", type=_real, default=0.5)
    solve.add_argument("--tol", type=_real, default=1e-5)
    solve.add_argument("--max-sweeps", type=_positive_int, default=20000)
    solve.add_argument("--window", type=_positive_int, default=5)
    solve.add_argument("--cond-threshold", type=_real, default=1e8)
    solve.add_argument("--restart", type=_positive_int, default=20)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--report", help="write a JSON report here")

    bench = sub.add_parser("bench", help="reproduce an experiment table")
    bench.add_argument("--table", required=True)
    bench.add_argument("--out", required=True, help="output directory")
    bench.add_argument("--overlap", type=_list_of(_real), default=[0.5])
    bench.add_argument("--window", type=_list_of(_positive_int), default=[5])
    bench.add_argument("--cond-threshold", type=_list_of(_real), default=[1e8])
    bench.add_argument("--max-sweeps", type=_positive_int, default=20000)
    bench.add_argument("--jobs", type=_positive_int, default=1)

    gen = sub.add_parser("gen", help="write a generated problem as Matrix Market files")
    gen.add_argument("--problem", required=True)
    gen.add_argument("--out", required=True, help="matrix path; rhs goes to <stem>_b.mtx")
    gen.add_argument("--seed", type=int, default=0)

    verify = sub.add_parser("verify", help="run the invariant suite")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--sizes", type=_list_of(_positive_int), default=[10, 30, 60])
    return parser


def _load_problem(args):
    if args.matrix:
        return read_matrix_market(args.matrix)
    text = args.problem
    if text.startswith("random:") and "seed=" not in text:
        text = f"{text},seed={args.seed}"
    return make_problem(text)


def cmd_solve(args):
    prob = _load_problem(args)
    if args.solver == "gmres":
        config = GmresConfig(restart=args.restart, tol=args.tol, max_outer=args.max_sweeps)
        run = lambda: solve_gmres(prob.a, prob.b, config)
    elif args.solver == "jacobi":
        config = JacobiConfig(block_size=args.block_size, tol=args.tol, max_iters=args.max_sweeps)
        run = lambda: solve_block_jacobi(prob.a, prob.b, config)
    else:
        config = SolverConfig(block_size=args.block_size, overlap=args.overlap, tol=args.tol,
                              max_sweeps=args.max_sweeps, window=args.window,
                              cond_threshold=args.cond_threshold)
        run = lambda: SOLVERS[args.solver](prob.a, prob.b, config)
    code = EXIT_OK
    try:
        report = run()
    except NotConverged as exc:
        report = exc.report
        print(str(exc), file=sys.stderr)
        code = EXIT_NOT_CONVERGED
    iterations = report.outer if args.solver == "gmres" else report.sweeps
    print(f"solver={args.solver} sweeps={iterations} residual={report.final_residual:.6e}")
    if args.report:
        doc = report.summary()
        doc.update(problem=prob.name, solver=args.solver, config=config.to_dict(),
                   seed=args.seed, solution=report.solution.tolist())
        if prob.x_exact is not None:
            doc["rel_error"] = report.relative_error(prob.x_exact)
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
    return code


def cmd_bench(args):
    table = args.table.lower()
    if table not in TABLES:
        raise UsageError(f"accproj bench: error: unknown table {args.table!r}; "
                         f"choose from {', '.join(TABLES)}")
    result = run_table(table, overlaps=tuple(args.overlap), windows=tuple(args.window),
                       cond_thresholds=tuple(args.cond_threshold),
                       max_sweeps=args.max_sweeps, jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    for fmt in ("csv", "json"):
        emit_report(result, os.path.join(args.out, f"{table}.{fmt}"), fmt)
    for row in result.rows:
        c = row.case
        ref = c.reference
        ratio = f"{row.iterations / ref:.2f}" if ref and row.iterations is not None else "-"
        knobs = f"overlap={getattr(c.config, 'overlap', '-')}"
        if c.solver == "msap2":
            knobs += f" window={c.config.window} cond={c.config.cond_threshold:g}"
        status = "" if not row.error else "  [" + row.error.splitlines()[0] + "]"
        print(f"{table} {c.grid_value:g} {c.solver:6s} {knobs} iterations={row.iterations} "
              f"reference={ref} ratio={ratio}{status}")
    return EXIT_OK


def cmd_gen(args):
    text = args.problem
    if text.startswith("random:") and "seed=" not in text:
        text = f"{text},seed={args.seed}"
    prob = make_problem(text)
    write_matrix_market(args.out, prob)
    print(f"wrote {args.out} ({prob.a.shape[0]}x{prob.a.shape[1]})")
    return EXIT_OK


def cmd_verify(args):
    results = run_suite(seed=args.seed, sizes=tuple(args.sizes))
    ok = True
    for res in results.values():
        flag = "PASS" if res.passed else "FAIL"
        print(f"{flag} {res.name:18s} events={res.events:6d} worst={res.worst:.3e} tol={res.tol:g}")
        if not res.passed:
            if ok:
                print("first counterexample: "
                      + json.dumps(res.counterexample, default=float), file=sys.stderr)
            ok = False
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "gen": cmd_gen, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValueError, OSError) as exc:
        print(f"accproj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccProjError as exc:
        print(f"accproj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
