"""Table and figure reproduction, the verification suite and run history.

Everything here returns plain result objects; printing and exit codes are the
CLI's business (see ``gfdcalc.main``).
"""
import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special
from sqlalchemy import inspect
from sqlalchemy.exc import SQLAlchemyError
from sqlmodel import Session, create_engine, select

from .errors import GfdError, GfdInputError, OutputError
from .expr import ElementaryKind, ElementarySpec, GeneralizedPolynomial, evaluate, taylor_expand
from .fracops import (
    BetaStrategy,
    DifferentiableFn,
    OperatorParams,
    compose_check,
    elementary_series_derivative,
    fractional_integral,
    fractional_integral_fn,
    fractional_integral_poly,
    gfd_closed,
    gfd_limit,
    mvt_consistent_h,
    mvt_search,
    product_rule_residual,
    quotient_rule_residual,
    rolle_point,
)
from .models import CheckRecord, TableReproduction, VerificationRun
from .odesolve import (
    DerivativeKind,
    ProblemLabel,
    SolutionCurve,
    abs_rel_error_curve,
    conformable_closed,
    convergence_study,
    example4_closed,
    gfd_riccati_closed,
    make_problem,
    series_solution_ex1,
    series_solution_ex2,
    solve_numeric,
    uniform_grid,
)
from .reference import CD, FIGURES, PRESENT, ReferenceTable, TableId, get_table
from .specfun import FracOrder, ShapeParam, gfd_prefactor, ln_gamma

logger = logging.getLogger(__name__)

# both error columns below this count as exact (alpha = 1)
ORDERING_FLOOR = 1e-12
ODE_STEPS = 4096
ODE_TOL = 1e-6
ODE_X_MIN = 1.0 / 64.0
HALVING_STEPS = (16, 32, 64)
MIN_HALVING_RATIO = 8.0
COMPOSITION_SEED = 20240817
COMPOSITION_INSTANCES = 20
FIGURE_GRID = 100
GAMMA_KERNEL_POINTS = (0.1, 0.25, 0.5, 0.75, 1.0 - 1e-7, 1.0 + 1e-6, 1.15, 1.5, 2.0 - 1e-5, 2.0 + 1e-8, 2.5, 3.7, 10.0, 42.5)


class PrefactorMode(enum.Enum):
    GFD = "gfd"
    CD = "cd"  # prefactor forced to 1


def _now() -> str:
    return datetime.now().isoformat(timespec="seconds")


# =========================================================
# table reproduction
# =========================================================
class ComparisonRow(NamedTuple):
    t: float
    method: str
    computed: float
    reference: float
    deviation: float


@dataclass(frozen=True)
class ReproductionReport:
    table: ReferenceTable
    rows: Tuple[ComparisonRow, ...]
    tolerance: float
    prefactor_mode: PrefactorMode = PrefactorMode.GFD
    # selected context columns, already resolved through the table aliases
    context: Tuple[str, ...] = ()

    @property
    def max_deviation(self) -> float:
        return max(r.deviation for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    @property
    def context_methods(self) -> Tuple[str, ...]:
        """Printed columns that are echoed but not recomputed; all of them unless a selection was made."""
        if self.context:
            return self.context
        return tuple(m for m in self.table.methods if m not in (PRESENT, CD))

    def context_for(self, t: float) -> Dict[str, Optional[float]]:
        for i, row in enumerate(self.table.rows):
            if row.t == t:
                return {m: self.table.column(m)[i] for m in self.context_methods}
        return {}


def _select_context(table: ReferenceTable, context: Optional[Sequence[str]]) -> Tuple[str, ...]:
    selected: List[str] = []
    for name in context or ():
        table.column(name)  # unknown names raise GfdInputError
        key = table.resolve(name)
        if key not in selected:
            selected.append(key)
    return tuple(selected)


def reproduce_table(table_id, tolerance: Optional[float] = None, prefactor_mode=PrefactorMode.GFD,
                    context: Optional[Sequence[str]] = None) -> ReproductionReport:
    """Recompute the Present and CD columns of a reference table from the closed forms.

    ``prefactor_mode=cd`` computes the Present column with A = 1, which
    should make the regression fail. ``context`` picks the echoed columns by
    name or alias (for Table 2, EHPM names the MHPM column).
    """
    table = get_table(table_id)
    mode = PrefactorMode(prefactor_mode)
    tol = table.tolerance if tolerance is None else float(tolerance)
    if not (tol >= 0.0) or not math.isfinite(tol):
        raise GfdInputError(f"tolerance must be a finite number >= 0, got {tolerance!r}")
    selected = _select_context(table, context)

    present = gfd_riccati_closed if mode is PrefactorMode.GFD else conformable_closed
    computers = ((PRESENT, present), (CD, conformable_closed))
    rows = []
    for ref in table.rows:
        for method, compute in computers:
            computed = compute(table.problem, ref.t, table.alpha)
            reference = ref.columns[method]
            rows.append(ComparisonRow(ref.t, method, computed, reference, abs(computed - reference)))
    report = ReproductionReport(table, tuple(rows), tol, mode, selected)
    logger.debug("table %s: max deviation %.3g (tolerance %.3g)", table.id.value, report.max_deviation, tol)
    return report


def _cell(value: Optional[float]) -> str:
    return "—" if value is None else f"{value:.10g}"


REPORT_HEADER = ["table", "t", "method", "computed", "reference", "deviation", "within_tolerance"]


def _report_records(report: ReproductionReport) -> List[list]:
    records = []
    for r in report.rows:
        context = report.context_for(r.t)
        records.append(
            [
                report.table.id.value,
                f"{r.t:.1f}",
                r.method,
                f"{r.computed:.10f}",
                f"{r.reference:.10g}",
                f"{r.deviation:.3e}",
                "yes" if r.deviation <= report.tolerance else "no",
            ]
            + [_cell(context.get(m)) for m in report.context_methods]
        )
    return records


def write_report_csv(report: ReproductionReport, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(REPORT_HEADER + list(report.context_methods))
            writer.writerows(_report_records(report))
    except OSError as exc:
        raise OutputError(f"cannot write table report: {exc.strerror or exc}", path) from exc
    return path


def write_report_xlsx(report: ReproductionReport, path) -> Path:
    """Same records as the CSV, on a styled worksheet."""
    try:
        from openpyxl import Workbook
        from openpyxl.styles import Alignment, Font, PatternFill
    except ImportError as exc:
        raise OutputError("openpyxl is not installed; use a .csv output path", path) from exc

    path = Path(path)
    wb = Workbook()
    ws = wb.active
    ws.title = f"Table {report.table.id.value}"
    ws.append(REPORT_HEADER + list(report.context_methods))

    header_fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
    header_font = Font(bold=True, color="FFFFFF")
    for cell in ws[1]:
        cell.fill = header_fill
        cell.font = header_font
        cell.alignment = Alignment(horizontal="center", vertical="center", wrap_text=True)

    for r in report.rows:
        context = report.context_for(r.t)
        ws.append(
            [report.table.id.value, r.t, r.method, r.computed, r.reference, r.deviation,
             "yes" if r.deviation <= report.tolerance else "no"]
            + [context.get(m) if context.get(m) is not None else "—" for m in report.context_methods]
        )

    ws.column_dimensions["A"].width = 8   # table
    ws.column_dimensions["B"].width = 8   # t
    ws.column_dimensions["C"].width = 10  # method
    for col in ["D", "E", "F"]:
        ws.column_dimensions[col].width = 18
    ws.column_dimensions["G"].width = 16

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        wb.save(path)
    except OSError as exc:
        raise OutputError(f"cannot write table report: {exc.strerror or exc}", path) from exc
    return path


def write_report(report: ReproductionReport, path) -> Path:
    if str(path).lower().endswith(".xlsx"):
        return write_report_xlsx(report, path)
    return write_report_csv(report, path)


# =========================================================
# error curves
# =========================================================
class ErrorPoint(NamedTuple):
    x: float
    err_gfd: float
    err_cd: float

    @property
    def ordered(self) -> bool:
        if self.err_gfd <= ORDERING_FLOOR and self.err_cd <= ORDERING_FLOOR:
            return True
        return self.err_gfd < self.err_cd


@dataclass(frozen=True)
class ErrorCurves:
    problem: ProblemLabel
    order: FracOrder
    points: Tuple[ErrorPoint, ...]
    path: Optional[Path] = None

    @property
    def ordering_holds(self) -> bool:
        return all(p.ordered for p in self.points)

    @property
    def n_violations(self) -> int:
        return sum(1 for p in self.points if not p.ordered)


def error_curve_points(problem, order: FracOrder, grid: Sequence[float], prefactor_mode=PrefactorMode.GFD) -> Tuple[ErrorPoint, ...]:
    mode = PrefactorMode(prefactor_mode)
    gfd_kind = DerivativeKind.GFD if mode is PrefactorMode.GFD else DerivativeKind.CD
    gfd = abs_rel_error_curve(problem, gfd_kind, order, grid)
    cd = abs_rel_error_curve(problem, DerivativeKind.CD, order, grid)
    return tuple(ErrorPoint(x, eg, ec) for (x, eg), (_, ec) in zip(gfd, cd))


def emit_error_curves(problem, order: FracOrder, grid_size: int, out_path, prefactor_mode=PrefactorMode.GFD) -> ErrorCurves:
    """Write ``x,err_gfd,err_cd`` for x = i/n, i = 1..n, and report the ordering."""
    if int(grid_size) != grid_size or grid_size < 2:
        raise GfdInputError(f"grid_size must be an integer >= 2, got {grid_size!r}")
    problem = ProblemLabel(problem)
    points = error_curve_points(problem, order, uniform_grid(int(grid_size)), prefactor_mode)

    path = Path(out_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["x", "err_gfd", "err_cd"])
            for p in points:
                writer.writerow([f"{p.x:.12g}", f"{p.err_gfd:.12e}", f"{p.err_cd:.12e}"])
    except OSError as exc:
        raise OutputError(f"cannot write error curves: {exc.strerror or exc}", path) from exc

    curves = ErrorCurves(problem, order, points, path)
    if not curves.ordering_holds:
        logger.warning("%d of %d points break err_gfd < err_cd", curves.n_violations, len(points))
    return curves


def write_curve_csv(curve: SolutionCurve, path) -> Path:
    """``x,y`` samples of a solution curve."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["x", "y"])
            for x, y in curve.samples:
                writer.writerow([f"{x:.12g}", f"{y:.15e}"])
    except OSError as exc:
        raise OutputError(f"cannot write solution: {exc.strerror or exc}", path) from exc
    return path


def get_figure(figure_id) -> Tuple[ProblemLabel, FracOrder]:
    try:
        problem, alpha = FIGURES[int(figure_id)]
    except (KeyError, ValueError, TypeError):
        raise GfdInputError(f"unknown figure id {figure_id!r}; expected 1, 2 or 3") from None
    return problem, FracOrder(alpha)


# =========================================================
# verification suite
# =========================================================
@dataclass(frozen=True)
class CheckResult:
    name: str
    group: str
    passed: bool
    max_deviation: Optional[float] = None
    detail: str = ""


@dataclass
class SuiteOptions:
    tolerance: Optional[float] = None
    prefactor_mode: PrefactorMode = PrefactorMode.GFD
    reports: List[ReproductionReport] = field(default_factory=list)


@dataclass(frozen=True)
class VerificationSummary:
    results: Tuple[CheckResult, ...]
    filter: Optional[str] = None
    tolerance: Optional[float] = None
    prefactor_mode: PrefactorMode = PrefactorMode.GFD
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    reports: Tuple[ReproductionReport, ...] = ()
    command: str = "verify"

    @property
    def n_checks(self) -> int:
        return len(self.results)

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.results if not r.passed)

    @property
    def passed(self) -> bool:
        return self.n_failed == 0

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


CheckFn = Callable[[SuiteOptions], Tuple[bool, Optional[float], str]]
_CHECKS: List[Tuple[str, str, CheckFn]] = []


def _check(name: str, group: str):
    def register(fn: CheckFn) -> CheckFn:
        _CHECKS.append((name, group, fn))
        return fn

    return register


def check_names() -> List[str]:
    return [name for name, _, _ in _CHECKS]


def _selected(flt: Optional[str]) -> List[Tuple[str, str, CheckFn]]:
    if not flt:
        return list(_CHECKS)
    return [c for c in _CHECKS if flt == c[1] or flt in c[0]]


def _fn(f, df, name: str) -> DifferentiableFn:
    return DifferentiableFn(f, df, name=name)


# -- specfun ------------------------------------------------------------
def _ln_gamma_oracle(x: float) -> float:
    # gammaln reduces x < 2 through log(1/x), which loses relative accuracy at the
    # zeros; next to 1 and 2 integrate the digamma function from the zero instead
    for root in (1.0, 2.0):
        if abs(x - root) <= 0.25:
            value, _ = integrate.quad(lambda s: special.digamma(root + s), 0.0, x - root,
                                      epsabs=0.0, epsrel=1e-13)
            return float(value)
    return float(special.gammaln(x))


@_check("gamma_kernel", "specfun")
def _check_gamma_kernel(opts: SuiteOptions):
    dev = 0.0
    for x in GAMMA_KERNEL_POINTS:
        expected = _ln_gamma_oracle(x)
        dev = max(dev, abs(ln_gamma(x) - expected) / abs(expected))
    return dev <= 1e-12, dev, "ln_gamma relative to scipy, including next to 1 and 2"


@_check("prefactor", "specfun")
def _check_prefactor(opts: SuiteOptions):
    dev = 0.0
    for alpha in (0.25, 0.5, 0.75, 0.9):
        # beta = alpha gives Gamma(alpha)
        a = gfd_prefactor(FracOrder(alpha), ShapeParam(alpha))
        dev = max(dev, abs(a - math.gamma(alpha)) / math.gamma(alpha))
        for beta in (0.5, 1.0, 1.5, 2.0):
            a = gfd_prefactor(FracOrder(alpha), ShapeParam(beta))
            expected = math.gamma(beta) / math.gamma(beta - alpha + 1.0)
            dev = max(dev, abs(a - expected) / expected)
    unit = all(gfd_prefactor(FracOrder(1.0), ShapeParam(b)) == 1.0 for b in (0.5, 1.0, 2.0))
    return unit and dev <= 1e-12, dev, "A(alpha, beta) against math.gamma; A(1, beta) = 1"


# -- fracops ------------------------------------------------------------
LIMIT_ALPHAS = (0.25, 0.5, 0.75, 1.0)
LIMIT_BETAS = (0.5, 1.0, 1.5, 2.0)
LIMIT_POINTS = (0.25, 1.0, 2.0)


@_check("limit_vs_closed", "fracops")
def _check_limit(opts: SuiteOptions):
    fns = (
        DifferentiableFn.power(2.0),
        DifferentiableFn.power(1.5),
        DifferentiableFn.sine(),
        DifferentiableFn.exponential(),
    )
    dev = 0.0
    for fn in fns:
        for alpha in LIMIT_ALPHAS:
            for beta in LIMIT_BETAS:
                p = OperatorParams.of(alpha, beta)
                for t in LIMIT_POINTS:
                    dev = max(dev, abs(gfd_limit(fn, p, t) - gfd_closed(fn, p, t)))
    return dev <= 1e-6, dev, "4 functions x 4x4 (alpha, beta) grid x 3 points"


@_check("linearity", "fracops")
def _check_linearity(opts: SuiteOptions):
    f, g = DifferentiableFn.power(2.0), DifferentiableFn.sine()
    dev = 0.0
    for a, b in ((2.5, -1.25), (-0.5, 3.0)):
        combined = f.scale(a) + g.scale(b)
        for alpha, beta in ((0.5, 0.5), (0.8, 1.7), (1.0, 1.0)):
            p = OperatorParams.of(alpha, beta)
            for t in (0.3, 1.0, 2.2):
                lhs = gfd_closed(combined, p, t)
                rhs = a * gfd_closed(f, p, t) + b * gfd_closed(g, p, t)
                dev = max(dev, abs(lhs - rhs) / (1.0 + abs(lhs)))
    return dev <= 1e-12, dev, "a f + b g"


_EXPONENT_POOL = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 0.3, 0.5, 1.5, 2.25, 3.75)


def random_composition_instances(n: int = COMPOSITION_INSTANCES, seed: int = COMPOSITION_SEED):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        exponents = rng.choice(_EXPONENT_POOL, size=3, replace=False)
        coeffs = rng.uniform(-3.0, 3.0, size=3)
        poly = GeneralizedPolynomial.from_terms(zip(coeffs, exponents))
        a1, a2 = rng.uniform(0.05, 0.5, size=2)
        yield poly, FracOrder(a1), FracOrder(a2)


@_check("composition", "fracops")
def _check_composition(opts: SuiteOptions):
    gap = 0.0
    for poly, a1, a2 in random_composition_instances():
        gap = max(gap, compose_check(poly, a1, a2).max_relative_gap())
    return gap <= 1e-12, gap, f"{COMPOSITION_INSTANCES} seeded random series"


@_check("product_quotient", "fracops")
def _check_product_quotient(opts: SuiteOptions):
    t_pow, t_sq = DifferentiableFn.power(1.0), DifferentiableFn.power(2.0)
    one = DifferentiableFn.constant(1.0)
    cases = (
        (product_rule_residual, t_pow, t_sq, OperatorParams.of(0.5, 0.5), 1.0),
        (product_rule_residual, DifferentiableFn.sine(), DifferentiableFn.cosine(), OperatorParams.of(0.8, 0.8), 0.7),
        (product_rule_residual, DifferentiableFn.constant(3.0), DifferentiableFn.exponential(), OperatorParams.of(0.6, 1.2), 1.3),
        (quotient_rule_residual, t_sq, t_pow, OperatorParams.of(0.5, 0.5), 2.0),
        (quotient_rule_residual, one, one + t_sq, OperatorParams.of(0.6, 0.6), 1.0),
        (quotient_rule_residual, DifferentiableFn.sine(), DifferentiableFn.sine(), OperatorParams.of(0.7, 1.4), 0.9),
    )
    dev = 0.0
    for residual, f, g, p, t in cases:
        combined = f * g if residual is product_rule_residual else f / g
        scale = 1.0 + abs(gfd_closed(combined, p, t))
        dev = max(dev, residual(f, g, p, t) / scale)
    return dev <= 1e-10, dev, f"{len(cases)} product/quotient instances"


def rolle_instances() -> List[Tuple[DifferentiableFn, float, float, OperatorParams]]:
    """Ten (f, a, b, p) with f(a) = f(b) and one sign change of f' inside."""
    pi = math.pi
    # b > 1 with b^3 - 3b = 0.5^3 - 1.5
    b_cubic = optimize.brentq(lambda b: b ** 3 - 3.0 * b + 1.375, 1.2, 2.5, xtol=1e-15)
    return [
        (_fn(lambda t: (t - 1) * (t - 2), lambda t: 2 * t - 3, "(t-1)(t-2)"), 1.0, 2.0, OperatorParams.of(0.5, 0.5)),
        (_fn(lambda t: (t - 1) * (t - 3), lambda t: 2 * t - 4, "(t-1)(t-3)"), 1.0, 3.0, OperatorParams.of(0.75, 1.5)),
        (_fn(lambda t: (t - 0.5) * (t - 2.5), lambda t: 2 * t - 3, "(t-0.5)(t-2.5)"), 0.5, 2.5, OperatorParams.of(0.9, 0.9)),
        (_fn(lambda t: math.sin(pi * t), lambda t: pi * math.cos(pi * t), "sin(pi t)"), 1.0, 2.0, OperatorParams.of(0.5, 0.5)),
        (_fn(lambda t: math.cos(pi * t), lambda t: -pi * math.sin(pi * t), "cos(pi t)"), 0.5, 1.5, OperatorParams.of(0.3, 2.0)),
        (_fn(lambda t: math.sin(2 * pi * t), lambda t: 2 * pi * math.cos(2 * pi * t), "sin(2 pi t)"), 0.5, 1.0, OperatorParams.of(0.6, 1.0)),
        (_fn(lambda t: t ** 3 - 3 * t, lambda t: 3 * t * t - 3, "t^3 - 3t"), 0.5, b_cubic, OperatorParams.of(0.5, 0.5)),
        (_fn(lambda t: math.exp(-(t - 2) ** 2), lambda t: -2 * (t - 2) * math.exp(-(t - 2) ** 2), "exp(-(t-2)^2)"), 1.0, 3.0, OperatorParams.of(0.8, 1.1)),
        (_fn(lambda t: (t - 1.5) ** 4 - (t - 1.5) ** 2, lambda t: 4 * (t - 1.5) ** 3 - 2 * (t - 1.5), "(t-1.5)^4 - (t-1.5)^2"), 1.0, 2.0, OperatorParams.of(0.4, 0.7)),
        (_fn(lambda t: 1 / (1 + (t - 2) ** 2), lambda t: -2 * (t - 2) / (1 + (t - 2) ** 2) ** 2, "1/(1+(t-2)^2)"), 1.0, 3.0, OperatorParams.of(1.0, 1.0)),
    ]


@_check("rolle", "fracops")
def _check_rolle(opts: SuiteOptions):
    dev, inside = 0.0, True
    instances = rolle_instances()
    for fn, a, b, p in instances:
        c = rolle_point(fn, a, b, p)
        inside = inside and a < c < b
        dev = max(dev, abs(gfd_closed(fn, p, c)))
    return inside and dev <= 1e-10, dev, f"{len(instances)} instances with f(a) = f(b)"


@_check("mvt", "fracops")
def _check_mvt(opts: SuiteOptions):
    line = DifferentiableFn.power(1.0)
    half = OperatorParams.of(0.5, 0.5)
    # default h = 1/Gamma(alpha) asks for c = 9 on [1, 4]
    absent = mvt_search(line, 1.0, 4.0, half) is None
    classical = mvt_search(line, 1.0, 4.0, OperatorParams.of(1.0, 1.0), h=1.0) == 1.0
    root = DifferentiableFn.power(0.5)
    consistent = mvt_search(root, 1.0, 4.0, half, h=mvt_consistent_h(half)) is not None
    passed = absent and classical and consistent
    detail = f"default h absent={absent}, classical={classical}, consistent h found={consistent}"
    return passed, None, detail


_INVERSION_FAMILY = (
    ("1", DifferentiableFn.constant(1.0), GeneralizedPolynomial.constant(1.0)),
    ("x", DifferentiableFn.power(1.0), GeneralizedPolynomial.monomial(1.0, 1.0)),
    ("x^2", DifferentiableFn.power(2.0), GeneralizedPolynomial.monomial(1.0, 2.0)),
    ("sin", DifferentiableFn.sine(), None),
    ("exp", DifferentiableFn.exponential(), None),
)


@_check("inversion", "fracops")
def _check_inversion(opts: SuiteOptions):
    dev = 0.0
    for alpha in (0.5, 0.75, 0.9):
        p = OperatorParams.of(alpha)
        a = p.prefactor()
        for _, fn, poly in _INVERSION_FAMILY:
            integral = fractional_integral_fn(fn, p)
            for t in (0.5, 1.0):
                # difference quotients of the quadrature values, not the analytic df
                dev = max(dev, abs(gfd_limit(integral, p, t) - fn(t)))
                if poly is not None:
                    expected = evaluate(fractional_integral_poly(poly, p), t)
                else:
                    # x^(alpha-1) handled by QUADPACK's algebraic weight in x itself
                    weighted, _ = integrate.quad(fn.f, 0.0, t, weight="alg", wvar=(alpha - 1.0, 0.0), epsabs=0.0, epsrel=1e-12)
                    expected = weighted / a
                dev = max(dev, abs(fractional_integral(fn, p, t) - expected))
    return dev <= 1e-6, dev, "D I f = f for 1, x, x^2, sin, exp; I f against closed forms and weighted quadrature"


@_check("caputo_compat", "fracops")
def _check_caputo(opts: SuiteOptions):
    dev = 0.0
    for kind in ElementaryKind:
        poly = taylor_expand(ElementarySpec(kind, 1.0, 10))
        for alpha in (0.3, 0.5, 0.9):
            order = FracOrder(alpha)
            series = elementary_series_derivative(kind, 1.0, order, 10)
            p = OperatorParams(order, None, BetaStrategy.BETA_EQUALS_EXPONENT)
            for t in (0.5, 1.0):
                lhs = evaluate(series, t)
                dev = max(dev, abs(lhs - gfd_closed(poly, p, t)) / (1.0 + abs(lhs)))
    return dev <= 1e-12, dev, "exp/sin/cos series rule vs per-term beta"


# -- tables and figures ---------------------------------------------------
def _table_check(table_id: TableId):
    def run(opts: SuiteOptions):
        report = reproduce_table(table_id, opts.tolerance, opts.prefactor_mode)
        opts.reports.append(report)
        return report.passed, report.max_deviation, f"tolerance {report.tolerance:g}"

    return run


for _tid in TableId:
    _check(f"table{_tid.value}", "tables")(_table_check(_tid))


def _figure_check(figure_id: int):
    def run(opts: SuiteOptions):
        problem, order = get_figure(figure_id)
        points = error_curve_points(problem, order, uniform_grid(FIGURE_GRID), opts.prefactor_mode)
        curves = ErrorCurves(problem, order, points)
        ok = curves.ordering_holds and len(points) == FIGURE_GRID
        gap = max(p.err_gfd - p.err_cd for p in points) if points else None
        return ok, gap, f"{problem.value} alpha={order.alpha:g}: {len(points) - curves.n_violations}/{len(points)} ordered"

    return run


for _fid in sorted(FIGURES):
    _check(f"figure{_fid}", "figures")(_figure_check(_fid))


# -- odesolve -------------------------------------------------------------
def _ode_cross_check(label: ProblemLabel, alpha: Optional[float], exact: Callable[[float], float]):
    problem = make_problem(label, alpha)
    curve = solve_numeric(problem, 1.0, ODE_STEPS)
    dev = max(abs(y - exact(x)) for x, y in curve.samples if x >= ODE_X_MIN)
    rows = convergence_study(problem, 1.0, exact, HALVING_STEPS)
    ratios = [r.ratio for r in rows[1:]]
    fourth_order = all(r is not None and r >= MIN_HALVING_RATIO for r in ratios)
    ratio_text = ", ".join("-" if r is None else f"{r:.1f}" for r in ratios)
    return dev <= ODE_TOL and fourth_order, dev, f"halving ratios {ratio_text}"


@_check("ode_riccati1", "odesolve")
def _check_ode_riccati1(opts: SuiteOptions):
    order = FracOrder(0.75)
    return _ode_cross_check(ProblemLabel.RICCATI1, 0.75, lambda x: gfd_riccati_closed(ProblemLabel.RICCATI1, x, order))


@_check("ode_riccati2", "odesolve")
def _check_ode_riccati2(opts: SuiteOptions):
    order = FracOrder(0.9)
    return _ode_cross_check(ProblemLabel.RICCATI2, 0.9, lambda x: gfd_riccati_closed(ProblemLabel.RICCATI2, x, order))


@_check("ode_example4", "odesolve")
def _check_ode_example4(opts: SuiteOptions):
    return _ode_cross_check(ProblemLabel.EXAMPLE4, None, lambda x: example4_closed(x, 1.0))


def _series_check(label: ProblemLabel, series: Callable[[float], float]):
    curve = solve_numeric(make_problem(label), 1.0, ODE_STEPS)
    dev = max(abs(y - series(x)) for x, y in curve.samples if x >= ODE_X_MIN)
    return dev <= ODE_TOL, dev, "series vs RK4"


@_check("series_example1", "odesolve")
def _check_series1(opts: SuiteOptions):
    return _series_check(ProblemLabel.EXAMPLE1, lambda x: series_solution_ex1(1.0, x, 40).value)


@_check("series_example2", "odesolve")
def _check_series2(opts: SuiteOptions):
    return _series_check(ProblemLabel.EXAMPLE2, lambda x: series_solution_ex2(x, 20).value)


def run_verification_suite(filter: Optional[str] = None, tolerance: Optional[float] = None, prefactor_mode=PrefactorMode.GFD) -> VerificationSummary:
    """Run every registered check (or those matching ``filter`` by name or group).

    ``tolerance`` overrides the table tolerances; a check that raises counts
    as failed with the error as its detail.
    """
    selected = _selected(filter)
    if not selected:
        raise GfdInputError(f"no check matches {filter!r}; known checks: {', '.join(check_names())}")
    opts = SuiteOptions(tolerance, PrefactorMode(prefactor_mode))
    started = _now()
    results = []
    for name, group, fn in selected:
        try:
            passed, deviation, detail = fn(opts)
        except GfdError as exc:
            logger.warning("check %s raised: %s", name, exc)
            passed, deviation, detail = False, None, f"{type(exc).__name__}: {exc}"
        except Exception as exc:
            logger.exception("check %s crashed", name)
            passed, deviation, detail = False, None, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, group, bool(passed), deviation, detail))
        logger.debug("check %s: %s", name, "ok" if passed else "FAILED")
    return VerificationSummary(
        tuple(results), filter, tolerance, opts.prefactor_mode, started, _now(), tuple(opts.reports)
    )


def summary_from_report(report: ReproductionReport, started_at: Optional[str] = None) -> VerificationSummary:
    """Wrap a single table reproduction so it can be recorded like a suite run."""
    result = CheckResult(
        f"table{report.table.id.value}", "tables", report.passed, report.max_deviation, f"tolerance {report.tolerance:g}"
    )
    return VerificationSummary(
        (result,), None, report.tolerance, report.prefactor_mode, started_at or _now(), _now(), (report,), command="table"
    )


# =========================================================
# run history
# =========================================================
HISTORY_TABLES = ("verificationrun", "checkrecord", "tablereproduction")


def _missing_tables(engine) -> List[str]:
    existing = set(inspect(engine).get_table_names())
    return [t for t in HISTORY_TABLES if t not in existing]


def record_run(database_url: Optional[str], summary: VerificationSummary) -> Optional[int]:
    """Store a run with its checks and table rows; returns the run id.

    Never raises: without a URL this is a no-op, and database trouble is
    logged as a warning.
    """
    if not database_url:
        return None
    try:
        engine = create_engine(database_url, echo=False)
        missing = _missing_tables(engine)
        if missing:
            logger.warning(
                "history tables missing (%s); run python -m gfdcalc.scripts.setup_db --create-tables",
                ", ".join(missing),
            )
            return None
        with Session(engine) as session:
            run = VerificationRun(
                command=summary.command,
                started_at=summary.started_at,
                finished_at=summary.finished_at,
                filter=summary.filter,
                tolerance_override=summary.tolerance,
                prefactor_mode=summary.prefactor_mode.value,
                passed=summary.passed,
                n_checks=summary.n_checks,
                n_failed=summary.n_failed,
            )
            session.add(run)
            session.flush()
            run_id = run.id
            for r in summary.results:
                session.add(CheckRecord(
                    run_id=run_id,
                    name=r.name,
                    group=r.group,
                    passed=r.passed,
                    max_deviation=r.max_deviation if r.max_deviation is None or math.isfinite(r.max_deviation) else None,
                    detail=r.detail,
                ))
            for report in summary.reports:
                for row in report.rows:
                    session.add(TableReproduction(
                        run_id=run_id,
                        table_id=report.table.id.value,
                        t=row.t,
                        method=row.method,
                        computed=row.computed,
                        reference=row.reference,
                        deviation=row.deviation,
                    ))
            session.commit()
        logger.debug("recorded run %s", run_id)
        return run_id
    except SQLAlchemyError as exc:
        logger.warning("could not record run history: %s", exc)
        return None


def load_history(database_url: str, limit: int = 20) -> List[VerificationRun]:
    """Recorded runs, newest first."""
    if not database_url:
        raise GfdInputError("no database configured; pass --database-url or set DATABASE_URL")
    if limit < 1:
        raise GfdInputError(f"limit must be >= 1, got {limit}")
    try:
        engine = create_engine(database_url, echo=False)
        missing = _missing_tables(engine)
        if missing:
            raise GfdInputError(
                f"history tables missing ({', '.join(missing)}); run python -m gfdcalc.scripts.setup_db --create-tables"
            )
        with Session(engine) as session:
            stmt = select(VerificationRun).order_by(VerificationRun.id.desc()).limit(limit)
            return list(session.exec(stmt).all())
    except SQLAlchemyError as exc:
        raise GfdInputError(f"cannot read run history: {exc}") from exc


def load_checks(database_url: str, run_ids: Optional[Sequence[int]] = None) -> List[Tuple[VerificationRun, CheckRecord]]:
    """(run, check) pairs ordered by run then check id."""
    try:
        engine = create_engine(database_url, echo=False)
        with Session(engine) as session:
            stmt = select(VerificationRun, CheckRecord).where(CheckRecord.run_id == VerificationRun.id)
            if run_ids:
                stmt = stmt.where(VerificationRun.id.in_(list(run_ids)))
            stmt = stmt.order_by(VerificationRun.id, CheckRecord.id)
            return list(session.exec(stmt).all())
    except SQLAlchemyError as exc:
        raise GfdInputError(f"cannot read run history: {exc}") from exc
