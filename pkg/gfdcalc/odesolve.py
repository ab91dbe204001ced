"""Fractional IVPs D^alpha y = f(x, y), y(0) = y0 in the GFD sense.

Every problem is turned into a classical ODE; the change of variable
u = x^alpha removes the x^(alpha-1) singularity so a fixed-step RK4 march
is enough. Closed forms for the Riccati problems and the series solutions of
the two forcing-only examples live here too.
"""
import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import DivergenceError, GfdDomainError, GfdInputError
from .expr import ElementaryKind, ElementarySpec, GeneralizedPolynomial, evaluate, taylor_expand
from .fracops import BetaStrategy
from .specfun import FracOrder, ShapeParam, gamma, gfd_prefactor, ln_gamma

logger = logging.getLogger(__name__)

Rhs = Callable[[float, float], float]

MIN_STEPS = 16
LN_1_PLUS_SQRT2 = math.log(1.0 + math.sqrt(2.0))
SQRT2 = math.sqrt(2.0)
EXAMPLE1_TERMS = 40
EXAMPLE2_TERMS = 20
FORCING_TRUNCATION = 30
DEFAULT_ERROR_GRID = 100


class ProblemLabel(enum.Enum):
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    EXAMPLE3 = "example3"
    EXAMPLE4 = "example4"
    RICCATI1 = "riccati1"
    RICCATI2 = "riccati2"
    CUSTOM = "custom"


class SolveMethod(enum.Enum):
    CLOSED_FORM = "closed"
    SERIES = "series"
    NUMERIC_RK = "numeric"


class DerivativeKind(enum.Enum):
    GFD = "gfd"
    CD = "cd"


@dataclass(frozen=True)
class GfdProblem:
    """D^alpha y = rhs(x, y), y(0) = y0.

    ``forcing`` is the same right-hand side as a generalized polynomial in x
    when it does not depend on y; BetaEqualsExponent problems need it.
    """

    rhs: Rhs
    order: FracOrder
    shape: Optional[ShapeParam] = None
    y0: float = 0.0
    label: ProblemLabel = ProblemLabel.CUSTOM
    beta_strategy: BetaStrategy = BetaStrategy.BETA_EQUALS_ALPHA
    forcing: Optional[GeneralizedPolynomial] = None
    k: Optional[float] = None
    lam: Optional[float] = None

    def __post_init__(self):
        if self.beta_strategy is BetaStrategy.FIXED_BETA and self.shape is None:
            raise GfdDomainError("FixedBeta problems need an explicit beta")
        if self.beta_strategy is BetaStrategy.BETA_EQUALS_EXPONENT and self.forcing is None:
            raise GfdDomainError("BetaEqualsExponent problems need a polynomial forcing term")
        if not math.isfinite(self.y0):
            raise GfdDomainError(f"y0 must be finite, got {self.y0!r}")

    @property
    def alpha(self) -> float:
        return self.order.alpha

    def resolved_shape(self) -> ShapeParam:
        if self.beta_strategy is BetaStrategy.FIXED_BETA:
            return self.shape
        return ShapeParam(self.order.alpha)


@dataclass(frozen=True)
class ClassicalIvp:
    """dy/dx = x^(alpha-1) g(x, y) and its regularised form dy/du in u = x^alpha."""

    alpha: float
    y0: float
    dydx: Rhs
    dydu: Rhs
    description: str

    def u_of_x(self, x: float) -> float:
        return x ** self.alpha

    def x_of_u(self, u: float) -> float:
        return u ** (1.0 / self.alpha)


@dataclass(frozen=True, eq=False)
class SolutionCurve:
    xs: np.ndarray
    ys: np.ndarray
    method: SolveMethod
    n_terms: Optional[int] = None
    n_steps: Optional[int] = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise GfdInputError("solution samples must be matching 1-D arrays")
        if np.any(np.diff(xs) <= 0.0) or np.any(xs < 0.0):
            raise GfdInputError("solution abscissae must be non-negative and strictly increasing")
        if not np.all(np.isfinite(ys)):
            raise GfdInputError("solution values must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    @property
    def end_value(self) -> float:
        return float(self.ys[-1])


# =========================================================
# problem registry
# =========================================================
def make_problem(
    label,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    k: float = 1.0,
    lam: float = 1.0,
    y0: float = 0.0,
) -> GfdProblem:
    """Build one of the worked problems with its beta convention.

    Riccati problems take beta = alpha unless beta is given; example1 and example2
    take beta equal to each solution exponent; example3 and example4 are fixed at
    alpha = beta = 1/2.
    """
    label = ProblemLabel(label)
    if label in (ProblemLabel.RICCATI1, ProblemLabel.RICCATI2):
        if alpha is None:
            raise GfdInputError(f"{label.value} needs an order alpha")
        strategy = BetaStrategy.FIXED_BETA if beta is not None else BetaStrategy.BETA_EQUALS_ALPHA
        shape = ShapeParam(beta) if beta is not None else None
        if label is ProblemLabel.RICCATI1:
            rhs = lambda x, y: 1.0 - y * y
        else:
            rhs = lambda x, y: 2.0 * y - y * y + 1.0
        return GfdProblem(rhs, FracOrder(alpha), shape, y0, label, strategy)

    if label is ProblemLabel.EXAMPLE1:
        forcing = taylor_expand(ElementarySpec(ElementaryKind.EXP, k, FORCING_TRUNCATION))
        return GfdProblem(
            lambda x, y: math.exp(k * x), FracOrder(0.5 if alpha is None else alpha), None, y0, label,
            BetaStrategy.BETA_EQUALS_EXPONENT, forcing, k=k,
        )
    if label is ProblemLabel.EXAMPLE2:
        forcing = taylor_expand(ElementarySpec(ElementaryKind.SIN, 1.0, FORCING_TRUNCATION)).shifted(2.0)
        return GfdProblem(
            lambda x, y: x * x * math.sin(x), FracOrder(0.5 if alpha is None else alpha), None, y0, label,
            BetaStrategy.BETA_EQUALS_EXPONENT, forcing,
        )

    if alpha not in (None, 0.5) or beta not in (None, 0.5):
        raise GfdInputError(f"{label.value} is posed at alpha = beta = 1/2 only")
    half = FracOrder(0.5)
    if label is ProblemLabel.EXAMPLE3:
        c = 2.0 / gamma(2.5)
        rhs = lambda x, y: x * x + c * x ** 1.5 - y
        return GfdProblem(rhs, half, ShapeParam(0.5), y0, label, BetaStrategy.FIXED_BETA)
    if label is ProblemLabel.EXAMPLE4:
        a = math.sqrt(math.pi)
        slope = lam * a - 1.0

        def rhs(x: float, y: float) -> float:
            return a * (y + 1.0) / (2.0 * (1.0 + slope * math.sqrt(x)))

        return GfdProblem(rhs, half, ShapeParam(0.5), y0, label, BetaStrategy.FIXED_BETA, lam=lam)
    raise GfdInputError("custom problems are built directly with GfdProblem(...)")


# =========================================================
# classical transform and the RK4 march
# =========================================================
def transform_to_classical(p: GfdProblem) -> ClassicalIvp:
    """dy/dx = (1/A) x^(alpha-1) f(x, y), regularised to dy/du = f(u^(1/alpha), y) / (alpha A)."""
    alpha = p.alpha
    if p.beta_strategy is BetaStrategy.BETA_EQUALS_EXPONENT:
        # each forcing term c x^m solves with exponent m + alpha, so beta = m + alpha
        weighted = []
        for c, m in p.forcing.terms:
            weighted.append((c / gfd_prefactor(p.order, ShapeParam(m + alpha)), m))
        g = GeneralizedPolynomial.from_terms(weighted)
        in_u = GeneralizedPolynomial.from_terms((c / alpha, m / alpha) for c, m in g.terms)
        return ClassicalIvp(
            alpha,
            p.y0,
            lambda x, y: x ** (alpha - 1.0) * evaluate(g, x),
            lambda u, y: evaluate(in_u, u),
            f"dy/du = {in_u}  (u = x^{alpha:g}, beta per term)",
        )

    a = gfd_prefactor(p.order, p.resolved_shape())
    gain = 1.0 / (alpha * a)
    rhs = p.rhs
    if alpha == 1.0:
        dydu = lambda u, y: gain * rhs(u, y)
    else:
        dydu = lambda u, y: gain * rhs(u ** (1.0 / alpha), y)
    return ClassicalIvp(
        alpha,
        p.y0,
        lambda x, y: x ** (alpha - 1.0) * rhs(x, y) / a,
        dydu,
        f"dy/du = {gain:.12g} * f(u^(1/{alpha:g}), y)  (u = x^{alpha:g}, A = {a:.12g})",
    )


def _rk4_march(dydu: Rhs, u0: float, y0: float, u1: float, n_steps: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    step = (u1 - u0) / n_steps
    us = u0 + step * np.arange(n_steps + 1)
    us[-1] = u1
    ys = np.empty(n_steps + 1)
    ys[0] = y = y0
    for i in range(n_steps):
        u = us[i]
        k1 = dydu(u, y)
        k2 = dydu(u + 0.5 * step, y + 0.5 * step * k1)
        k3 = dydu(u + 0.5 * step, y + 0.5 * step * k2)
        k4 = dydu(u + step, y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(y):
            last_x = float(us[i]) ** (1.0 / alpha)
            raise DivergenceError(f"solution left the finite range after x={last_x:.6g}", last_x=last_x)
        ys[i + 1] = y
    return us, ys


def solve_numeric(p: GfdProblem, x_end: float, n_steps: int) -> SolutionCurve:
    """Fixed-step RK4 in u = x^alpha over [0, x_end^alpha]; samples reported in x."""
    if n_steps < MIN_STEPS:
        raise GfdInputError(f"n_steps must be >= {MIN_STEPS}, got {n_steps}")
    if not x_end > 0.0:
        raise GfdInputError(f"x_end must be > 0, got {x_end!r}")
    ivp = transform_to_classical(p)
    us, ys = _rk4_march(ivp.dydu, 0.0, p.y0, ivp.u_of_x(x_end), int(n_steps), p.alpha)
    xs = us ** (1.0 / p.alpha)
    xs[-1] = x_end
    return SolutionCurve(xs, ys, SolveMethod.NUMERIC_RK, n_steps=int(n_steps))


def solve_numeric_on_grid(p: GfdProblem, grid: Sequence[float], steps_per_unit: int = 4096) -> SolutionCurve:
    """RK4 marched from 0 through each grid point; the curve starts at (0, y0)."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise GfdInputError("grid must be positive and strictly increasing")
    ivp = transform_to_classical(p)
    u_prev, y = 0.0, p.y0
    xs, ys = [0.0], [p.y0]
    for x in grid:
        u = ivp.u_of_x(x)
        n = max(MIN_STEPS, int(math.ceil((u - u_prev) * steps_per_unit)))
        _, seg = _rk4_march(ivp.dydu, u_prev, y, u, n, p.alpha)
        y = float(seg[-1])
        xs.append(float(x))
        ys.append(y)
        u_prev = u
    return SolutionCurve(np.array(xs), np.array(ys), SolveMethod.NUMERIC_RK, n_steps=steps_per_unit)


class ConvergenceRow(NamedTuple):
    n_steps: int
    max_error: float
    ratio: Optional[float]


def convergence_study(p: GfdProblem, x_end: float, exact: Callable[[float], float], n_steps_list: Sequence[int]) -> List[ConvergenceRow]:
    """Max deviation from ``exact`` over the RK nodes as the step is halved."""
    rows: List[ConvergenceRow] = []
    for n in n_steps_list:
        curve = solve_numeric(p, x_end, n)
        err = float(max(abs(y - exact(x)) for x, y in curve.samples))
        ratio = rows[-1].max_error / err if rows and err > 0.0 else None
        rows.append(ConvergenceRow(int(n), err, ratio))
    return rows


# =========================================================
# closed forms
# =========================================================
def _riccati1(s: float) -> float:
    return math.tanh(s)


def _riccati2(s: float) -> float:
    return 1.0 + SQRT2 * math.tanh(SQRT2 * s - LN_1_PLUS_SQRT2)


def _stretched(x: float, alpha: float, a: float) -> float:
    if x < 0.0:
        raise GfdDomainError(f"closed forms are defined for x >= 0, got {x!r}")
    return x ** alpha / (alpha * a)


def riccati1_closed(x: float, order: FracOrder, shape: Optional[ShapeParam] = None) -> float:
    """tanh(x^alpha / (alpha A)), the solution of D^alpha y + y^2 = 1, y(0) = 0.

    ``shape`` defaults to beta = alpha.
    """
    return gfd_riccati_closed(ProblemLabel.RICCATI1, x, order, shape)


def riccati2_closed(x: float, order: FracOrder, shape: Optional[ShapeParam] = None) -> float:
    """1 + sqrt2 tanh(sqrt2 x^alpha/(alpha A) - ln(1 + sqrt2)) for D^alpha y = 2y - y^2 + 1, y(0) = 0."""
    return gfd_riccati_closed(ProblemLabel.RICCATI2, x, order, shape)


def _riccati_form(problem) -> Callable[[float], float]:
    problem = ProblemLabel(problem)
    if problem is ProblemLabel.RICCATI1:
        return _riccati1
    if problem is ProblemLabel.RICCATI2:
        return _riccati2
    raise GfdInputError(f"closed forms exist for riccati1 and riccati2 only, got {problem.value}")


def conformable_closed(problem, x: float, order: FracOrder) -> float:
    """The same closed forms with the prefactor replaced by 1."""
    return _riccati_form(problem)(_stretched(x, order.alpha, 1.0))


def exact_alpha1(problem, x: float) -> float:
    """Classical (alpha = 1) solution used as the error baseline."""
    return _riccati_form(problem)(_stretched(x, 1.0, 1.0))


def gfd_riccati_closed(problem, x: float, order: FracOrder, shape: Optional[ShapeParam] = None) -> float:
    form = _riccati_form(problem)
    shape = shape or ShapeParam(order.alpha)
    return form(_stretched(x, order.alpha, gfd_prefactor(order, shape)))


def example4_closed(x: float, lam: float = 1.0) -> float:
    """Separated solution of example4 with y(0) = 0, A = sqrt(pi), u = sqrt(x)."""
    if x < 0.0:
        raise GfdDomainError(f"x must be >= 0, got {x!r}")
    u = math.sqrt(x)
    c = lam * math.sqrt(math.pi) - 1.0
    if abs(c) < 1e-12:
        return math.expm1(u)
    base = 1.0 + c * u
    if base <= 0.0:
        raise GfdDomainError(f"example4 solution blows up before x={x:g} for lambda={lam:g}")
    return math.exp(math.log(base) / c) - 1.0


# =========================================================
# series solutions of example1 and example2
# =========================================================
class SeriesSum(NamedTuple):
    value: float
    tail_bound: float


def series_solution_ex1(k: float, x: float, n_terms: int = EXAMPLE1_TERMS) -> SeriesSum:
    """sum_{n<N} k^n x^(n+1/2) / Gamma(n + 3/2), with the first omitted term as tail bound."""
    if n_terms < 1:
        raise GfdInputError(f"n_terms must be >= 1, got {n_terms}")
    if x < 0.0:
        raise GfdDomainError(f"x must be >= 0, got {x!r}")
    if x == 0.0:
        return SeriesSum(0.0, 0.0)
    total = 0.0
    for n in range(n_terms):
        total += k ** n * x ** (n + 0.5) / gamma(n + 1.5)
    tail = abs(k) ** n_terms * x ** (n_terms + 0.5) / gamma(n_terms + 1.5)
    return SeriesSum(total, tail)


def series_solution_ex2(x: float, n_terms: int = EXAMPLE2_TERMS, alternating: bool = True) -> SeriesSum:
    """sum_{n<N} (-1)^n (2n+3)(2n+2) x^(2n+7/2) / Gamma(2n + 9/2).

    ``alternating=False`` drops the (-1)^n of the sine series, which is the
    series for x^2 sinh x instead.
    """
    if n_terms < 1:
        raise GfdInputError(f"n_terms must be >= 1, got {n_terms}")
    if x < 0.0:
        raise GfdDomainError(f"x must be >= 0, got {x!r}")
    if x == 0.0:
        return SeriesSum(0.0, 0.0)

    def term(n: int) -> float:
        sign = -1.0 if (alternating and n % 2) else 1.0
        log_mag = math.log((2 * n + 3) * (2 * n + 2)) + (2 * n + 3.5) * math.log(x) - ln_gamma(2 * n + 4.5)
        return sign * math.exp(log_mag)

    total = math.fsum(term(n) for n in range(n_terms))
    return SeriesSum(total, abs(term(n_terms)))


# =========================================================
# error curves
# =========================================================
def method_value(problem, method: DerivativeKind, x: float, order: FracOrder) -> float:
    if DerivativeKind(method) is DerivativeKind.GFD:
        return gfd_riccati_closed(problem, x, order)
    return conformable_closed(problem, x, order)


def abs_rel_error_curve(problem, method, order: FracOrder, grid: Sequence[float]) -> List[Tuple[float, float]]:
    """|y_method(x) - y_exact(x)| / |y_exact(x)| against the alpha = 1 solution."""
    method = DerivativeKind(method)
    out = []
    for x in grid:
        x = float(x)
        if x <= 0.0:
            logger.warning("skipping grid point x=%g: relative error needs x > 0", x)
            continue
        exact = exact_alpha1(problem, x)
        if exact == 0.0:
            logger.warning("skipping grid point x=%g: exact solution is 0", x)
            continue
        out.append((x, abs(method_value(problem, method, x, order) - exact) / abs(exact)))
    return out


def uniform_grid(n_points: int = DEFAULT_ERROR_GRID, x_end: float = 1.0) -> np.ndarray:
    """n points x_i = i * x_end / n, i = 1..n."""
    if n_points < 1:
        raise GfdInputError(f"grid needs at least one point, got {n_points}")
    return x_end * np.arange(1, n_points + 1) / n_points


def closed_curve(problem, grid: Sequence[float], order: FracOrder, lam: float = 1.0, shape: Optional[ShapeParam] = None) -> SolutionCurve:
    problem = ProblemLabel(problem)
    xs = np.concatenate(([0.0], np.asarray(grid, dtype=float)))
    if problem is ProblemLabel.EXAMPLE4:
        ys = [example4_closed(x, lam) for x in xs]
    else:
        ys = [gfd_riccati_closed(problem, x, order, shape) for x in xs]
    return SolutionCurve(xs, np.array(ys), SolveMethod.CLOSED_FORM)


def series_curve(problem, grid: Sequence[float], k: float = 1.0, n_terms: Optional[int] = None) -> SolutionCurve:
    problem = ProblemLabel(problem)
    xs = np.concatenate(([0.0], np.asarray(grid, dtype=float)))
    if problem is ProblemLabel.EXAMPLE1:
        n = n_terms or EXAMPLE1_TERMS
        ys = [series_solution_ex1(k, x, n).value for x in xs]
    elif problem is ProblemLabel.EXAMPLE2:
        n = n_terms or EXAMPLE2_TERMS
        ys = [series_solution_ex2(x, n).value for x in xs]
    else:
        raise GfdInputError(f"series solutions exist for example1 and example2 only, got {problem.value}")
    return SolutionCurve(xs, np.array(ys), SolveMethod.SERIES, n_terms=n)
