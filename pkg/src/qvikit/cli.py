"""Command-line front end.

Subcommands: solve (fixed-point and zero-finder iterations), sweep
(time-stamped trajectory of the discretized sweeping dynamics), analyze
(constant estimation with bias direction), zero (root problems).

Exit codes are a contract: 0 converged, 2 declared divergence, 3 iteration
cap, 1 usage or input errors. CSV columns are "iter,x1,...,xn,residual"
for solves and "t,x1,...,xn,speed" for sweeps, 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .analysis import (
    SamplingPlan,
    check_pseudo_pair,
    operator_norm,
    pair_modulus_linear,
    sample_lipschitz,
    sample_pair_modulus,
)
from .errors import DiagnosticsError, QvikitError
from .model import FuncField
from .problems import ZeroProblem, get_builtin, load_problem
from .solvers import (
    SolverConfig,
    auto_step,
    loglinear_fit,
    solve_alg1,
    solve_catchup,
    solve_tseng,
    solve_zero,
    sweep_trajectory,
    tseng_auto_step,
)


class UsageError(QvikitError):
    """Bad flags or inconsistent inputs; always exits with status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(v):
    return f"{float(v):.17g}"


def _fmt_vec(x):
    return "[" + ", ".join(_fmt(v) for v in x) + "]"


def _num_or_none(v):
    if v is None or not np.isfinite(v):
        return None
    return float(v)


def _resolve_problem(args):
    spec = args.problem_flag or args.problem
    if spec is None:
        raise UsageError("a problem is required: --problem FILE or builtin:NAME")
    if spec.startswith("builtin:"):
        return get_builtin(spec[len("builtin:"):])
    return load_problem(spec)


def _parse_x0(text, dim):
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"--x0 must be a comma list of numbers, got {text!r}") from None
    if len(values) != dim:
        raise UsageError(f"--x0 has {len(values)} entries but the problem has dim {dim}")
    return np.asarray(values, float)


def _parse_h(text):
    if text == "auto":
        return None
    try:
        h = float(text)
    except ValueError:
        raise UsageError(f"--h must be 'auto' or a positive number, got {text!r}") from None
    if not h > 0:
        raise UsageError(f"--h must be positive, got {text}")
    return h


def _write_solve_csv(path, report, dim):
    header = "iter," + ",".join(f"x{i + 1}" for i in range(dim)) + ",residual"
    lines = [header]
    for k, (xk, rk) in enumerate(zip(report.iterates, report.residuals)):
        lines.append(",".join([str(k)] + [_fmt(v) for v in xk] + [_fmt(rk)]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_sweep_csv(path, result):
    dim = result.xs.shape[1]
    header = "t," + ",".join(f"x{i + 1}" for i in range(dim)) + ",speed"
    speeds = np.concatenate(([0.0], result.speeds))
    lines = [header]
    for t, x, s in zip(result.ts, result.xs, speeds):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in x] + [_fmt(s)]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _report_summary(report):
    return {
        "converged": bool(report.converged),
        "diverged": bool(report.diverged),
        "iterations": int(report.iterations),
        "x_final": [float(v) for v in report.x_final],
        "h_used": float(report.h_used),
        "residual_final": _num_or_none(report.residual_final),
        "displacement_final": _num_or_none(report.displacement_final),
        "rate_estimate": _num_or_none(report.rate_estimate),
    }


def _finish_solve(args, report, dim):
    if args.out:
        _write_solve_csv(args.out, report, dim)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            json.dump(_report_summary(report), fh, indent=2)
            fh.write("\n")
    status = ("converged" if report.converged
              else "diverged" if report.diverged
              else "max-iter")
    print(f"status={status} iterations={report.iterations} "
          f"h_used={_fmt(report.h_used)} residual={_fmt(report.residual_final)} "
          f"x_final={_fmt_vec(report.x_final)}")
    if report.converged:
        return 0
    return 2 if report.diverged else 3


def cmd_solve(args):
    problem = _resolve_problem(args)
    h = _parse_h(args.h)
    record = "full" if args.out else "residuals"
    if args.algorithm == "alg3":
        if not isinstance(problem, ZeroProblem):
            raise UsageError("--algorithm alg3 needs a zero problem (kind \"zero\")")
        x0 = _parse_x0(args.x0, problem.dim)
        config = SolverConfig(h=1.0 if h is None else h, tol=args.tol,
                              max_iter=args.max_iter, record=record)
        report = solve_zero(problem.f, problem.w, x0, config)
        return _finish_solve(args, report, problem.dim)
    if isinstance(problem, ZeroProblem):
        raise UsageError("zero problems solve with --algorithm alg3 (or the zero command)")
    x0 = _parse_x0(args.x0, problem.dim)
    if h is None:
        plan = SamplingPlan(seed=args.seed)
        h = tseng_auto_step(problem, plan) if args.algorithm == "tseng" \
            else auto_step(problem, plan)
    config = SolverConfig(h=h, tol=args.tol, max_iter=args.max_iter, record=record)
    if args.algorithm == "alg1":
        report = solve_alg1(problem, x0, config)
    elif args.algorithm == "catchup":
        report = solve_catchup(problem, x0, config)
    else:
        report = solve_tseng(problem, x0, config, literal=args.literal)
    return _finish_solve(args, report, problem.dim)


def cmd_sweep(args):
    problem = _resolve_problem(args)
    if isinstance(problem, ZeroProblem):
        raise UsageError("sweep needs a qvi problem, not a zero problem")
    x0 = _parse_x0(args.x0, problem.dim)
    if not args.h > 0:
        raise UsageError(f"--h must be positive, got {args.h}")
    result = sweep_trajectory(problem, x0, args.h, args.t_end)
    if args.out:
        _write_sweep_csv(args.out, result)
    alpha_hat = r2 = None
    try:
        slope, r2, _ = loglinear_fit(result.speeds)
        alpha_hat = -slope / args.h
    except DiagnosticsError:
        pass
    status = "diverged" if result.diverged else "done"
    alpha_text = "n/a" if alpha_hat is None else _fmt(alpha_hat)
    r2_text = "n/a" if r2 is None else f"{r2:.4f}"
    print(f"status={status} t_end={_fmt(result.ts[-1])} "
          f"x_final={_fmt_vec(result.xs[-1])} alpha_hat={alpha_text} r2={r2_text}")
    return 2 if result.diverged else 0


def _is_pure_linear(field):
    return field.matrix is not None and field.remainder is None


def cmd_analyze(args):
    problem = _resolve_problem(args)
    if isinstance(problem, ZeroProblem):
        raise UsageError("analyze needs a qvi problem, not a zero problem")
    plan = SamplingPlan(seed=args.seed, count=args.samples)
    f, v = problem.f, problem.v
    w = FuncField(problem.dim, lambda x: x - v(x))
    if args.estimate == "L":
        if _is_pure_linear(f):
            print(f"L = {_fmt(operator_norm(f.matrix))} (spectral)")
        else:
            print(f"L_hat = {_fmt(sample_lipschitz(f, plan))} (sampled, lower bound)")
    elif args.estimate == "l":
        if _is_pure_linear(v):
            print(f"l = {_fmt(operator_norm(v.matrix))} (spectral)")
        else:
            print(f"l_hat = {_fmt(sample_lipschitz(v, plan))} (sampled, lower bound)")
    elif args.estimate == "gamma":
        if f.matrix is not None and v.matrix is not None:
            eye = np.eye(problem.dim)
            value = pair_modulus_linear(f.matrix, eye - v.matrix)
            print(f"gamma_linear = {_fmt(value)} (spectral, linear parts only)")
        print(f"gamma_hat = {_fmt(sample_pair_modulus(f, w, plan))} "
              "(sampled, upper bound)")
    else:
        report = check_pseudo_pair(f, w, plan)
        print(f"pseudo: violations={report.violations} of {report.checked} "
              "sampled ordered pairs")
    return 0


def cmd_zero(args):
    problem = _resolve_problem(args)
    if not isinstance(problem, ZeroProblem):
        raise UsageError("zero needs a zero problem (kind \"zero\"); use solve instead")
    x0 = _parse_x0(args.x0, problem.dim)
    h = _parse_h(args.h)
    config = SolverConfig(h=1.0 if h is None else h, tol=args.tol,
                          max_iter=args.max_iter,
                          record="full" if args.out else "residuals")
    report = solve_zero(problem.f, problem.w, x0, config)
    return _finish_solve(args, report, problem.dim)


def _add_problem_args(sub):
    sub.add_argument("problem", nargs="?", default=None,
                     help="problem file or builtin:NAME")
    sub.add_argument("--problem", dest="problem_flag", default=None,
                     help="problem file or builtin:NAME")


def build_parser(default_seed):
    parser = _Parser(prog="qvikit", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="run an iterative solver")
    _add_problem_args(solve)
    solve.add_argument("--algorithm", default="alg1",
                       choices=["alg1", "tseng", "catchup", "alg3"])
    solve.add_argument("--x0", required=True, help="comma-separated start point")
    solve.add_argument("--h", default="auto", help="step size, or 'auto'")
    solve.add_argument("--tol", type=float, default=1e-8)
    solve.add_argument("--max-iter", type=int, default=10_000)
    solve.add_argument("--out", default=None, help="CSV trace path")
    solve.add_argument("--summary", default=None, help="summary JSON path")
    solve.add_argument("--seed", type=int, default=default_seed)
    solve.add_argument("--literal", action="store_true",
                       help="with tseng: use the uncorrected update (comparison only)")
    solve.set_defaults(func=cmd_solve)

    sweep = subs.add_parser("sweep", help="integrate the sweeping trajectory")
    _add_problem_args(sweep)
    sweep.add_argument("--x0", required=True)
    sweep.add_argument("--h", type=float, required=True)
    sweep.add_argument("--T", dest="t_end", type=float, required=True)
    sweep.add_argument("--out", default=None, help="CSV trajectory path")
    sweep.set_defaults(func=cmd_sweep)

    analyze = subs.add_parser("analyze", help="estimate problem constants")
    _add_problem_args(analyze)
    analyze.add_argument("--estimate", required=True,
                         choices=["L", "l", "gamma", "pseudo"])
    analyze.add_argument("--seed", type=int, default=default_seed)
    analyze.add_argument("--samples", type=int, default=10_000)
    analyze.set_defaults(func=cmd_analyze)

    zero = subs.add_parser("zero", help="run the derivative-free zero finder")
    _add_problem_args(zero)
    zero.add_argument("--x0", required=True)
    zero.add_argument("--h", default="1")
    zero.add_argument("--tol", type=float, default=1e-10)
    zero.add_argument("--max-iter", type=int, default=10_000)
    zero.add_argument("--out", default=None, help="CSV trace path")
    zero.add_argument("--summary", default=None, help="summary JSON path")
    zero.set_defaults(func=cmd_zero)

    return parser


def main(argv=None):
    try:
        default_seed = int(os.environ.get("QVI_SEED", "0"))
        parser = build_parser(default_seed)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except QvikitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
