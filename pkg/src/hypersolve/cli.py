"""Command-line front end.

    hypersolve solve PROBLEM.json     run the affine-scaling method
    hypersolve check PROBLEM.json     derivative, moment and hyperbolicity checks
    hypersolve eigs  PROBLEM.json     restriction, moments and eigenvalues at a point
    hypersolve qp    PROBLEM.json     solve QP_e(alpha) once at a point
    hypersolve bench                  iteration / oracle-call scaling on random LPs

Exit codes: 0 success (converged), 1 input error, 2 iteration budget
exhausted, 3 numerical failure or failed check.  Set HYPERSOLVE_LOG to a
logging level name (DEBUG, INFO, ...) for diagnostics on stderr.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from .calculus import check_derivatives, derivatives
from .errors import (
    AssumptionError,
    HypersolveError,
    InitializationError,
    InputError,
    NumericalFailure,
    StepFailure,
)
from .ipm import TRACE_FIELDS, contraction_audit, solve
from .options import TRACE_MODES
from .polynomials import hyperbolicity_probe
from .problems import load, random_lp
from .qp import QpProblem, solution_residuals, solve_qp
from .univariate import eigenvalues, moments, restrict, sample_interior

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MAX_ITERS = 2
EXIT_FAILURE = 3

log = logging.getLogger("hypersolve")


def _configure_logging():
    level = os.environ.get("HYPERSOLVE_LOG")
    if not level:
        logging.getLogger("hypersolve").addHandler(logging.NullHandler())
        return
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        numeric = logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("hypersolve")
    root.handlers[:] = [handler]
    root.setLevel(numeric)


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def _alpha(text):
    value = _positive_float(text)
    if not value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1): {text!r}")
    return value


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None
    if not values or min(values) < 2:
        raise argparse.ArgumentTypeError("degrees must be integers >= 2")
    return values


def _point(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def _add_solver_flags(sp):
    sp.add_argument("--alpha", type=_alpha, help="quadratic-cone parameter in (0, 1)")
    sp.add_argument("--delta", type=_positive_float, help="stop when the gap falls below this")
    sp.add_argument("--max-iters", type=_positive_int, help="iteration budget")
    sp.add_argument("--oracle-derivatives", action="store_true", default=None,
                    help="use oracle interpolation even when closed forms exist")
    sp.add_argument("--trace", choices=TRACE_MODES, help="trace format")


def build_parser():
    parser = argparse.ArgumentParser(prog="hypersolve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve a problem file")
    sp.add_argument("problem")
    _add_solver_flags(sp)
    sp.add_argument("--trace-file", help="write trace rows here instead of embedding them in the report")
    sp.add_argument("--output", "-o", help="report destination (default stdout)")

    sp = sub.add_parser("check", help="derivative and moment checks")
    sp.add_argument("problem")
    sp.add_argument("--points", type=_positive_int, default=20, help="random interior points besides e0")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", "-o")

    sp = sub.add_parser("eigs", help="eigen-diagnostics at a point")
    sp.add_argument("problem")
    sp.add_argument("--point", type=_point, help="comma-separated point (default e0)")
    sp.add_argument("--direction", type=_point, help="comma-separated direction (default the polynomial's)")
    sp.add_argument("--output", "-o")

    sp = sub.add_parser("qp", help="solve QP_e(alpha) at a center")
    sp.add_argument("problem")
    sp.add_argument("--point", type=_point, help="comma-separated center (default e0)")
    sp.add_argument("--alpha", type=_alpha)
    sp.add_argument("--oracle-derivatives", action="store_true", default=None)
    sp.add_argument("--output", "-o")

    sp = sub.add_parser("bench", help="scaling benchmark on random product-family LPs")
    sp.add_argument("--family", choices=("product",), default="product")
    sp.add_argument("--degrees", type=_int_list, default=[4, 16, 64])
    sp.add_argument("--delta", type=_positive_float, default=1e-6)
    sp.add_argument("--alpha", type=_alpha, default=0.1)
    sp.add_argument("--repetitions", type=_positive_int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--oracle-derivatives", action="store_true")
    sp.add_argument("--no-timing", action="store_true", help="leave wall_time empty (byte-identical output)")
    sp.add_argument("--output", "-o")
    return parser


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _overrides(args):
    keys = {"alpha": "alpha", "delta": "delta", "max_iters": "max_iters",
            "oracle_derivatives": "oracle_derivatives", "trace": "trace"}
    return {dst: getattr(args, src, None) for src, dst in keys.items()}


def format_trace(rows, mode):
    if mode == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=TRACE_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row.to_dict())
        return buf.getvalue()
    if mode == "jsonl":
        return "".join(json.dumps(row.to_dict()) + "\n" for row in rows)
    return ""


def cmd_solve(args):
    hp = load(args.problem)
    opts = hp.options.with_overrides(**_overrides(args))
    try:
        report = solve(hp, opts)
        code = EXIT_OK if report.status == "converged" else EXIT_MAX_ITERS
    except StepFailure as exc:
        report = getattr(exc, "report", None)
        if report is None:
            raise
        print(f"hypersolve: numerical failure: {exc}", file=sys.stderr)
        code = EXIT_FAILURE
    out = report.to_dict(include_trace=False)
    out["audit"] = contraction_audit(report, hp.polynomial().degree, opts.alpha).to_dict() \
        if report.iterations >= 3 else None
    if opts.trace != "none":
        if args.trace_file:
            with open(args.trace_file, "w") as fh:
                fh.write(format_trace(report.trace, opts.trace))
        else:
            out["trace"] = [row.to_dict() for row in report.trace]
    _emit(_json(out), args.output)
    return code


def cmd_check(args):
    hp = load(args.problem)
    p = hp.polynomial()
    results = []
    probe = hyperbolicity_probe(p, seed=args.seed, tol=hp.options.imag_tol)
    results.append({"name": "hyperbolicity_probe", "error": probe.max_rel_imag,
                    "tolerance": probe.tolerance, "passed": not probe.flagged})
    if not probe.flagged:
        rng = np.random.default_rng(args.seed)
        points = [hp.e0] + sample_interior(p, hp.e0, args.points, rng)
        for chk in check_derivatives(p, points, hp.options.fd_grad_step, hp.options.fd_hess_step, args.seed):
            results.append({"name": chk.name, "error": chk.error, "tolerance": chk.tolerance,
                            "passed": chk.passed})
        worst = 0.0
        for x in points:
            m = moments(p, x, p.direction).as_array()
            lam = eigenvalues(p, x, p.direction, imag_tol=hp.options.imag_tol)
            ref = np.array([np.sum(lam**k) for k in range(1, 5)])
            scale = np.array([np.sum(np.abs(lam) ** k) for k in range(1, 5)])
            worst = max(worst, float(np.max(np.abs(m - ref) / scale)))
        results.append({"name": "moments_vs_eigenvalues", "error": worst, "tolerance": 1e-8,
                        "passed": worst <= 1e-8})
    passed = all(r["passed"] for r in results)
    _emit(_json({"kind": p.kind, "passed": passed, "checks": results}), args.output)
    for r in results:
        if not r["passed"]:
            print(f"hypersolve: check {r['name']} failed: error {r['error']:.3e} > {r['tolerance']:.1e}",
                  file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_eigs(args):
    hp = load(args.problem)
    p = hp.polynomial()
    x = hp.e0 if args.point is None else args.point
    e = p.direction if args.direction is None else args.direction
    if x.size != p.dimension or e.size != p.dimension:
        raise InputError(f"point and direction must have {p.dimension} entries")
    lam = eigenvalues(p, x, e, imag_tol=hp.options.imag_tol)
    out = {
        "point": x.tolist(),
        "direction": e.tolist(),
        "restriction": restrict(p, x, e).coeffs.tolist(),
        "moments": moments(p, x, e).as_array().tolist(),
        "eigenvalues": lam.tolist(),
        "interior": bool(lam[-1] > 0.0),
    }
    _emit(_json(out), args.output)
    return EXIT_OK


def cmd_qp(args):
    hp = load(args.problem)
    p = hp.polynomial()
    opts = hp.options.with_overrides(alpha=args.alpha, oracle_derivatives=args.oracle_derivatives)
    e = hp.e0 if args.point is None else args.point
    if e.size != p.dimension:
        raise InputError(f"point must have {p.dimension} entries")
    g, H = derivatives(p, e, oracle=opts.oracle_derivatives)
    q = QpProblem(hp.A, hp.b, hp.c, e, g, H, opts.alpha, p.degree, opts.residual_tol)
    sol = solve_qp(q)
    out = sol.to_dict()
    out["objective"] = float(hp.c @ sol.x_e)
    out["residuals"] = solution_residuals(q, sol)
    _emit(_json(out), args.output)
    return EXIT_OK


BENCH_FIELDS = ("family", "d", "rep", "m", "status", "iterations", "oracle_calls",
                "max_calls_per_iteration", "gap0", "final_gap", "objective", "wall_time")


def bench_rows(degrees, delta=1e-6, alpha=0.1, repetitions=3, seed=0, oracle=False, timing=True):
    """One row per (degree, repetition) on random_lp(d, max(1, d // 4))."""
    import time

    from .options import SolverOptions

    opts = SolverOptions(alpha=alpha, delta=delta, oracle_derivatives=oracle, trace="none")
    rows = []
    for d in degrees:
        for rep in range(repetitions):
            rng = np.random.default_rng([seed, d, rep])
            m = max(1, d // 4)
            hp = random_lp(d, m, rng, opts)
            row = {"family": "product", "d": d, "rep": rep, "m": m}
            t0 = time.perf_counter()
            try:
                report = solve(hp, opts)
                row["status"] = report.status
            except StepFailure as exc:
                report = getattr(exc, "report", None)
                row["status"] = "numerical-failure"
            except HypersolveError as exc:
                report = None
                row["status"] = f"error: {exc}"
            elapsed = time.perf_counter() - t0
            if report is not None:
                row.update(
                    iterations=report.iterations,
                    oracle_calls=report.oracle_calls,
                    max_calls_per_iteration=max((r.oracle_calls for r in report.trace), default=0),
                    gap0=repr(report.gap0),
                    final_gap=repr(report.gap),
                    objective=repr(report.objective),
                )
            row["wall_time"] = f"{elapsed:.4f}" if timing else ""
            rows.append(row)
    return rows


def cmd_bench(args):
    rows = bench_rows(args.degrees, args.delta, args.alpha, args.repetitions, args.seed,
                      args.oracle_derivatives, timing=not args.no_timing)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _emit(buf.getvalue(), args.output)
    failed = any(r["status"] != "converged" for r in rows)
    return EXIT_FAILURE if failed else EXIT_OK


COMMANDS = {"solve": cmd_solve, "check": cmd_check, "eigs": cmd_eigs, "qp": cmd_qp, "bench": cmd_bench}


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage, which would collide with max-iterations
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (InputError, InitializationError, AssumptionError) as exc:
        print(f"hypersolve: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, StepFailure, HypersolveError) as exc:
        print(f"hypersolve: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
