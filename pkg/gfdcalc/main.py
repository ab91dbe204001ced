"""Command-line front end.

Usage examples:
  python -m gfdcalc.main deriv --expr "t^2" --alpha 0.5 --beta 2 --at 1
  python -m gfdcalc.main integrate --expr "t" --alpha 0.5 --to 1
  python -m gfdcalc.main solve --problem riccati1 --alpha 0.75 --grid 50 --method numeric --out data/r1.csv
  python -m gfdcalc.main table --id 1 --out data/table1.csv
  python -m gfdcalc.main figure --id 3 --out data/figure3.csv
  python -m gfdcalc.main verify --filter tables
  python -m gfdcalc.main history --limit 10
"""
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from .errors import GfdError, GfdInputError
from .expr import evaluate, format_poly, format_terms, parse_poly
from .fracops import BetaStrategy, OperatorParams, fractional_integral, fractional_integral_poly, gfd_closed, gfd_series_terms
from .odesolve import (
    ProblemLabel,
    SolveMethod,
    closed_curve,
    make_problem,
    series_curve,
    solve_numeric_on_grid,
    uniform_grid,
)
from .report import (
    PrefactorMode,
    check_names,
    emit_error_curves,
    get_figure,
    load_history,
    record_run,
    reproduce_table,
    run_verification_suite,
    summary_from_report,
    write_curve_csv,
    write_report,
)
from .specfun import FracOrder, ShapeParam

# Load environment from dotenv: allow explicit ENV_FILE or fallback to local
env_file = os.getenv("ENV_FILE")
if env_file:
    load_dotenv(env_file)
else:
    load_dotenv(".env.local")

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"
DEFAULT_OUTPUT_DIR = "data"

logger = logging.getLogger("gfdcalc")


def configure_logging(verbose: bool = False) -> None:
    level_name = "DEBUG" if verbose else os.getenv("GFD_LOG_LEVEL", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    if not any(h.get_name() == "gfdcalc-cli" for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.set_name("gfdcalc-cli")
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    logger.setLevel(level)


def _database_url(args) -> Optional[str]:
    return args.database_url or os.getenv("DATABASE_URL")


def _output_path(args, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    base = args.output_dir or os.getenv("GFD_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR
    return Path(base) / default_name


def _banner(title: str) -> None:
    print(f"\n{'='*70}")
    print(title)
    print(f"{'='*70}")


def _mark(ok: bool) -> str:
    return "✓" if ok else "✗"


def _operator_params(args) -> OperatorParams:
    return OperatorParams.of(args.alpha, args.beta, args.strategy)


# =========================================================
# subcommands
# =========================================================
def cmd_deriv(args) -> int:
    poly = parse_poly(args.expr)
    p = _operator_params(args)
    derivative = gfd_series_terms(poly, p)
    value = gfd_closed(poly, p, args.at)

    print(f"f(t)          = {format_poly(poly)}")
    if p.beta_strategy is BetaStrategy.BETA_EQUALS_EXPONENT:
        beta = "k (per term)"
    else:
        beta = f"{p.resolve_shape().beta:g}"
    print(f"alpha={p.alpha:g}  beta={beta}  strategy={p.beta_strategy.value}")
    print(f"D^alpha f(t)  = {format_terms(derivative)}")
    print(f"D^alpha f({args.at:g}) = {value:.12g}")
    return 0


def cmd_integrate(args) -> int:
    poly = parse_poly(args.expr)
    p = _operator_params(args)
    closed = fractional_integral_poly(poly, p)
    closed_value = evaluate(closed, args.to)

    print(f"f(t)          = {format_poly(poly)}")
    print(f"I_alpha f(t)  = {format_poly(closed)}")
    print(f"I_alpha f({args.to:g}) = {closed_value:.12g}  (closed form)")
    if p.beta_strategy is not BetaStrategy.BETA_EQUALS_EXPONENT:
        quad = fractional_integral(lambda x: evaluate(poly, x), p, args.to)
        print(f"I_alpha f({args.to:g}) = {quad:.12g}  (quadrature)")
    return 0


def cmd_solve(args) -> int:
    label = ProblemLabel(args.problem)
    method = SolveMethod(args.method)
    grid = uniform_grid(args.grid, args.x_end)

    if method is SolveMethod.SERIES:
        curve = series_curve(label, grid, k=args.k, n_terms=args.terms)
    elif method is SolveMethod.CLOSED_FORM:
        if label is ProblemLabel.EXAMPLE4:
            curve = closed_curve(label, grid, FracOrder(0.5), lam=args.lam)
        elif label in (ProblemLabel.RICCATI1, ProblemLabel.RICCATI2):
            if args.alpha is None:
                raise GfdInputError(f"{label.value} needs --alpha")
            shape = ShapeParam(args.beta) if args.beta is not None else None
            curve = closed_curve(label, grid, FracOrder(args.alpha), shape=shape)
        else:
            raise GfdInputError(f"no closed form for {label.value}; use --method series or numeric")
    else:
        problem = make_problem(label, args.alpha, args.beta, k=args.k, lam=args.lam)
        curve = solve_numeric_on_grid(problem, grid, steps_per_unit=args.steps_per_unit)

    path = write_curve_csv(curve, _output_path(args, f"{label.value}_{method.value}.csv"))
    print(f"✓ {label.value} ({method.value}): {len(curve.xs)} samples -> {path}")
    print(f"  y({curve.xs[-1]:g}) = {curve.end_value:.12g}")
    return 0


def _print_report(report) -> None:
    table = report.table
    _banner(f"Table {table.id.value}: {table.title}")
    print(f"{'t':>5} {'method':>8} {'computed':>12} {'reference':>12} {'deviation':>11}")
    for r in report.rows:
        ok = r.deviation <= report.tolerance
        d = table.cell_decimals(r.reference)
        print(f"{r.t:5.1f} {r.method:>8} {r.computed:12.{d}f} {r.reference:12.{d}f} {r.deviation:11.2e} {_mark(ok)}")
    ctx = report.context_methods
    if ctx:
        print(f"\ncontext ({', '.join(ctx)}):")
        for row in table.rows:
            values = report.context_for(row.t)
            cells = ["—" if values[m] is None else f"{values[m]:.{table.cell_decimals(values[m])}f}" for m in ctx]
            print(f"{row.t:5.1f}  " + "  ".join(f"{c:>12}" for c in cells))
    status = "PASS" if report.passed else "FAIL"
    print(f"\n{status}: max deviation {report.max_deviation:.3e} (tolerance {report.tolerance:g}, prefactor {report.prefactor_mode.value})")


def cmd_table(args) -> int:
    report = reproduce_table(args.id, args.tolerance, args.prefactor_mode, args.context)
    path = write_report(report, _output_path(args, f"table{report.table.id.value}.csv"))
    _print_report(report)
    print(f"✓ Report written: {path}")
    record_run(_database_url(args), summary_from_report(report))
    return 0 if report.passed else 1


def cmd_figure(args) -> int:
    problem, order = get_figure(args.id)
    out = _output_path(args, f"figure{args.id}.csv")
    curves = emit_error_curves(problem, order, args.grid, out, args.prefactor_mode)
    n = len(curves.points)
    print(f"{_mark(curves.ordering_holds)} figure {args.id}: {problem.value} alpha={order.alpha:g}, "
          f"{n - curves.n_violations}/{n} points with err_gfd < err_cd -> {curves.path}")
    return 0 if curves.ordering_holds else 1


def cmd_verify(args) -> int:
    if args.list:
        for name in check_names():
            print(name)
        return 0
    summary = run_verification_suite(args.filter, args.tolerance, args.prefactor_mode)

    _banner(f"Verification suite (prefactor={summary.prefactor_mode.value}"
            + (f", tolerance={summary.tolerance:g}" if summary.tolerance is not None else "") + ")")
    for r in summary.results:
        dev = "" if r.max_deviation is None else f"{r.max_deviation:10.3e}"
        print(f"{_mark(r.passed)} {r.group:<9} {r.name:<18} {dev:>10}  {r.detail}")
    print(f"{'='*70}")
    print(f"{summary.n_checks - summary.n_failed}/{summary.n_checks} checks passed")

    record_run(_database_url(args), summary)
    return summary.exit_code


def cmd_history(args) -> int:
    runs = load_history(_database_url(args), args.limit)
    _banner(f"Recorded runs (newest first, up to {args.limit})")
    if not runs:
        print("(no runs recorded)")
        return 0
    print(f"{'id':>5} {'command':<8} {'started_at':<20} {'mode':<4} {'checks':>7} {'failed':>7}  filter")
    for run in runs:
        print(f"{run.id:>5} {run.command:<8} {run.started_at or '':<20} {run.prefactor_mode:<4} "
              f"{run.n_checks:>7} {run.n_failed:>7}  {run.filter or ''} {_mark(run.passed)}")
    return 0


# =========================================================
# parser
# =========================================================
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="Debug logging")
    common.add_argument("--database-url", help="Override DATABASE_URL (run history)")
    common.add_argument("--output-dir", help="Directory for generated files (default: GFD_OUTPUT_DIR or data)")

    def operator_args(p):
        p.add_argument("--expr", required=True, help='Generalized polynomial, e.g. "2*t^3/2 - t + 0.5"')
        p.add_argument("--alpha", type=float, required=True)
        p.add_argument("--beta", type=float, help="Shape parameter (default: beta = alpha)")
        p.add_argument("--strategy", choices=[s.value for s in BetaStrategy],
                       help="fixed (needs --beta), alpha, or exponent (beta = k per term)")

    parser = argparse.ArgumentParser(prog="gfdcalc", description="Generalized fractional derivative calculator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deriv", parents=[common], help="GFD of a generalized polynomial")
    operator_args(p)
    p.add_argument("--at", type=float, required=True, help="Evaluation point t > 0")
    p.set_defaults(func=cmd_deriv)

    p = sub.add_parser("integrate", parents=[common], help="Fractional integral of a generalized polynomial")
    operator_args(p)
    p.add_argument("--to", type=float, required=True, help="Upper limit t > 0")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("solve", parents=[common], help="Solve one of the worked fractional IVPs")
    p.add_argument("--problem", required=True, choices=[l.value for l in ProblemLabel if l is not ProblemLabel.CUSTOM])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--k", type=float, default=1.0, help="Rate of exp(kx) in example1")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="lambda of example4")
    p.add_argument("--grid", type=int, default=100, help="Number of grid points in (0, x_end]")
    p.add_argument("--x-end", type=float, default=1.0)
    p.add_argument("--method", choices=[m.value for m in SolveMethod], default=SolveMethod.NUMERIC_RK.value)
    p.add_argument("--terms", type=int, help="Series terms (series method)")
    p.add_argument("--steps-per-unit", type=int, default=4096, help="RK4 steps per unit of u = x^alpha")
    p.add_argument("--out", help="Output CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", parents=[common], help="Reproduce a reference table")
    p.add_argument("--id", required=True, choices=["1", "2", "3"])
    p.add_argument("--tolerance", type=float, help="Override the table tolerance")
    p.add_argument("--prefactor-mode", choices=[m.value for m in PrefactorMode], default="gfd")
    p.add_argument("--out", help="Output file (.csv or .xlsx)")
    p.add_argument("--context", nargs="+", metavar="METHOD",
                   help="Echo only these reference columns (aliases such as EHPM accepted)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("figure", parents=[common], help="Error curves of GFD and CD against alpha = 1")
    p.add_argument("--id", type=int, required=True, choices=[1, 2, 3])
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--prefactor-mode", choices=[m.value for m in PrefactorMode], default="gfd")
    p.add_argument("--out", help="Output CSV")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", parents=[common], help="Run the verification suite")
    p.add_argument("--filter", help="Check name substring or group (specfun, fracops, tables, figures, odesolve)")
    p.add_argument("--tolerance", type=float, help="Override the table tolerances")
    p.add_argument("--prefactor-mode", choices=[m.value for m in PrefactorMode], default="gfd")
    p.add_argument("--list", action="store_true", help="List check names and exit")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("history", parents=[common], help="List recorded runs")
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(func=cmd_history)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.func(args)
    except GfdError as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
