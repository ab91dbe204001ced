"""The fractional operators: GFD by limit and closed form, the monomial and
series (Caputo-matching) rules, composition, product/quotient rules, the
fractional integral and the Rolle / mean-value point finders.
"""
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import integrate, optimize

from .errors import (
    GfdDivisionError,
    GfdDomainError,
    GfdInputError,
    PropagationError,
    SearchFailureError,
)
from .expr import (
    ElementaryKind,
    ElementarySpec,
    GeneralizedPolynomial,
    Term,
    classical_derivative,
    evaluate,
    taylor_expand,
)
from .specfun import (
    FracOrder,
    ShapeParam,
    caputo_coefficient,
    gamma,
    gfd_prefactor,
)

logger = logging.getLogger(__name__)

RealFn = Callable[[float], float]

FD_CHECK_POINTS = (0.5, 1.0, 1.5)
FD_CHECK_RTOL = 1e-6
LIMIT_STEPS = (1e-4, 5e-5, 2.5e-5)
ROLLE_SCAN_POINTS = 1001
MVT_SCAN_POINTS = 2001
MVT_MATCH_TOL = 1e-8
# halvings of u = x^alpha below the upper limit sampled for divergence at 0
INTEGRABILITY_HALVINGS = (10, 20, 30)


# =========================================================
# function representation
# =========================================================
@dataclass(frozen=True)
class DifferentiableFn:
    """A map on (0, inf) together with its first derivative.

    Construction checks ``df`` against a central difference of ``f`` at
    ``check_points`` (relative error <= 1e-6); pass ``check_points=()`` to skip.
    """

    f: RealFn
    df: RealFn
    name: str = "f"
    check_points: Tuple[float, ...] = field(default=FD_CHECK_POINTS, repr=False, compare=False)

    def __post_init__(self):
        for t in self.check_points:
            h = 1e-4 * max(1.0, abs(t))
            if t - h <= 0.0:
                continue
            numeric = (self.f(t + h) - self.f(t - h)) / (2.0 * h)
            exact = self.df(t)
            if not math.isfinite(exact) or abs(numeric - exact) > FD_CHECK_RTOL * max(1.0, abs(exact)):
                raise GfdDomainError(
                    f"df of {self.name} is not the derivative of f at t={t:g} "
                    f"(finite difference {numeric:.10g}, df {exact:.10g})"
                )

    def __call__(self, t: float) -> float:
        return self.f(t)

    def __add__(self, other: "DifferentiableFn") -> "DifferentiableFn":
        return DifferentiableFn(
            lambda t: self.f(t) + other.f(t),
            lambda t: self.df(t) + other.df(t),
            name=f"({self.name} + {other.name})",
            check_points=(),
        )

    def scale(self, factor: float) -> "DifferentiableFn":
        return DifferentiableFn(
            lambda t: factor * self.f(t),
            lambda t: factor * self.df(t),
            name=f"{factor:g}*{self.name}",
            check_points=(),
        )

    def __mul__(self, other: "DifferentiableFn") -> "DifferentiableFn":
        return DifferentiableFn(
            lambda t: self.f(t) * other.f(t),
            lambda t: self.df(t) * other.f(t) + self.f(t) * other.df(t),
            name=f"({self.name} * {other.name})",
            check_points=(),
        )

    def __truediv__(self, other: "DifferentiableFn") -> "DifferentiableFn":
        def quotient_df(t):
            g = other.f(t)
            return (self.df(t) * g - self.f(t) * other.df(t)) / (g * g)

        return DifferentiableFn(
            lambda t: self.f(t) / other.f(t),
            quotient_df,
            name=f"({self.name} / {other.name})",
            check_points=(),
        )

    # -- common families -------------------------------------------------
    @classmethod
    def power(cls, k: float, coeff: float = 1.0) -> "DifferentiableFn":
        return cls(
            lambda t: coeff * t ** k,
            lambda t: coeff * k * t ** (k - 1.0) if k != 0.0 else 0.0,
            name=f"{coeff:g}*t^{k:g}",
        )

    @classmethod
    def constant(cls, value: float) -> "DifferentiableFn":
        return cls(lambda t: value, lambda t: 0.0, name=f"{value:g}")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "DifferentiableFn":
        return cls(lambda t: math.exp(rate * t), lambda t: rate * math.exp(rate * t), name=f"exp({rate:g}t)")

    @classmethod
    def sine(cls, rate: float = 1.0) -> "DifferentiableFn":
        return cls(lambda t: math.sin(rate * t), lambda t: rate * math.cos(rate * t), name=f"sin({rate:g}t)")

    @classmethod
    def cosine(cls, rate: float = 1.0) -> "DifferentiableFn":
        return cls(lambda t: math.cos(rate * t), lambda t: -rate * math.sin(rate * t), name=f"cos({rate:g}t)")


def as_differentiable(poly: GeneralizedPolynomial, name: str = "p") -> DifferentiableFn:
    derivative = classical_derivative(poly)
    return DifferentiableFn(lambda t: evaluate(poly, t), lambda t: evaluate(derivative, t), name=name, check_points=())


# =========================================================
# operator parameters
# =========================================================
class BetaStrategy(enum.Enum):
    FIXED_BETA = "fixed"
    BETA_EQUALS_ALPHA = "alpha"
    BETA_EQUALS_EXPONENT = "exponent"


@dataclass(frozen=True)
class OperatorParams:
    order: FracOrder
    shape: Optional[ShapeParam] = None
    beta_strategy: BetaStrategy = BetaStrategy.FIXED_BETA

    def __post_init__(self):
        if self.beta_strategy is BetaStrategy.FIXED_BETA and self.shape is None:
            raise GfdDomainError("FixedBeta strategy requires an explicit beta")

    @classmethod
    def of(cls, alpha: float, beta: Optional[float] = None, strategy: Union[str, BetaStrategy, None] = None) -> "OperatorParams":
        """Build from bare floats; without a strategy, a given beta means FixedBeta and none means beta = alpha."""
        if strategy is None:
            strategy = BetaStrategy.FIXED_BETA if beta is not None else BetaStrategy.BETA_EQUALS_ALPHA
        strategy = BetaStrategy(strategy)
        if beta is not None and strategy is not BetaStrategy.FIXED_BETA:
            raise GfdDomainError(f"beta={beta:g} conflicts with strategy '{strategy.value}', which sets beta itself")
        shape = ShapeParam(beta) if beta is not None else None
        return cls(FracOrder(alpha), shape, strategy)

    @property
    def alpha(self) -> float:
        return self.order.alpha

    def resolve_shape(self, exponent: Optional[float] = None) -> ShapeParam:
        if self.beta_strategy is BetaStrategy.FIXED_BETA:
            return self.shape
        if self.beta_strategy is BetaStrategy.BETA_EQUALS_ALPHA:
            return ShapeParam(self.order.alpha)
        if exponent is None:
            raise GfdDomainError("BetaEqualsExponent is only defined for generalized polynomial inputs")
        return ShapeParam(exponent)

    def prefactor(self, exponent: Optional[float] = None) -> float:
        return gfd_prefactor(self.order, self.resolve_shape(exponent))


def _require_positive(t: float) -> float:
    t = float(t)
    if not (t > 0.0) or not math.isfinite(t):
        raise GfdDomainError(f"evaluation point must be t > 0, got {t!r}")
    return t


# =========================================================
# limit definition and closed form
# =========================================================
def gfd_closed(fn: Union[DifferentiableFn, GeneralizedPolynomial], p: OperatorParams, t: float) -> float:
    """A(alpha, beta) * t^(1-alpha) * f'(t).

    Generalized polynomials are accepted under every strategy; with
    BetaEqualsExponent the prefactor is taken per term.
    """
    t = _require_positive(t)
    if isinstance(fn, GeneralizedPolynomial):
        # summed termwise: the derivative may carry exponents <= -1
        return math.fsum(c * t ** e for c, e in gfd_series_terms(fn, p))
    if p.beta_strategy is BetaStrategy.BETA_EQUALS_EXPONENT:
        raise GfdDomainError("BetaEqualsExponent is only defined for generalized polynomial inputs")
    return p.prefactor() * t ** (1.0 - p.alpha) * fn.df(t)


def cd_closed(fn: DifferentiableFn, order: FracOrder, t: float) -> float:
    """Conformable derivative t^(1-alpha) * f'(t)."""
    t = _require_positive(t)
    return t ** (1.0 - order.alpha) * fn.df(t)


def gfd_limit(fn: Union[DifferentiableFn, RealFn], p: OperatorParams, t: float) -> float:
    """Difference-quotient estimate of the defining limit.

    Uses only values of f: symmetric quotients in epsilon with the substituted
    step h = A * eps * t^(1-alpha) taken from LIMIT_STEPS, then two rounds of
    Richardson extrapolation.
    """
    t = _require_positive(t)
    f = fn.f if isinstance(fn, DifferentiableFn) else fn
    a = p.prefactor()
    scale = a * t ** (1.0 - p.alpha)
    base = min(max(1.0, t), t / (8.0 * LIMIT_STEPS[0]))

    quotients = []
    for step in LIMIT_STEPS:
        h = step * base
        eps = h / scale
        quotients.append((f(t + scale * eps) - f(t - scale * eps)) / (2.0 * eps))
    d1, d2, d3 = quotients
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d3 - d2) / 3.0
    return (16.0 * r2 - r1) / 15.0


@dataclass(frozen=True)
class ZeroLimit:
    value: Optional[float]
    diverged: bool


def gfd_at_zero(fn: DifferentiableFn, p: OperatorParams, j_min: int = 8, j_max: int = 64) -> ZeroLimit:
    """Right limit of the GFD at t -> 0+ over the grid t = 2^-j.

    The log-magnitude trend over the finest points decides divergence; a
    convergent sequence is finished with Aitken extrapolation.
    """
    js = np.arange(j_min, j_max + 1)
    values = np.array([gfd_closed(fn, p, 2.0 ** -int(j)) for j in js])
    if not np.all(np.isfinite(values)):
        return ZeroLimit(None, True)
    tail = values[-16:]
    if np.all(tail == 0.0):
        return ZeroLimit(0.0, False)

    mags = np.abs(tail)
    if np.all(mags > 0.0):
        slope = np.polyfit(js[-16:], np.log(mags), 1)[0]
        if slope > 1e-6:
            logger.debug("GFD at 0 diverges: log-magnitude slope %.3g per halving", slope)
            return ZeroLimit(None, True)

    s0, s1, s2 = values[-3:]
    denom = s2 - 2.0 * s1 + s0
    if denom == 0.0 or abs(s2 - s1) < 1e-15 * max(1.0, abs(s2)):
        return ZeroLimit(float(s2), False)
    limit = s2 - (s2 - s1) ** 2 / denom
    return ZeroLimit(float(limit), False)


def gfd_monomial(k: float, p: OperatorParams) -> Tuple[float, float]:
    """(coeff, exponent) of the GFD of t^k: (k * A, k - alpha)."""
    if k <= -1.0:
        raise GfdDomainError(f"monomial exponent must exceed -1, got {k!r}")
    if k == 0.0:
        return 0.0, -p.alpha
    a = p.prefactor(exponent=k)
    return k * a, k - p.alpha


def gfd_series_terms(poly: GeneralizedPolynomial, p: OperatorParams) -> Tuple[Term, ...]:
    """Raw (coeff, exponent) pairs of the GFD of a generalized polynomial.

    Unlike :func:`gfd_series_derivative` the exponents are not required to
    exceed -1, so t^k with -1 < k < alpha - 1 is still differentiable.
    """
    terms = []
    for c, k in poly.terms:
        coeff, exponent = gfd_monomial(k, p)
        if coeff != 0.0:
            terms.append((c * coeff, exponent))
    return tuple(sorted(terms, key=lambda term: term[1]))


def gfd_series_derivative(poly: GeneralizedPolynomial, p: OperatorParams) -> GeneralizedPolynomial:
    """GFD of a generalized polynomial, term by term, under ``p.beta_strategy``."""
    return GeneralizedPolynomial.from_terms(gfd_series_terms(poly, p))


# =========================================================
# Caputo-matching series rule and composition
# =========================================================
def _caputo_termwise(poly: GeneralizedPolynomial, alpha: float) -> GeneralizedPolynomial:
    terms = []
    for c, k in poly.terms:
        coeff = caputo_coefficient(k, alpha)
        if coeff == 0.0:
            continue
        if k - alpha <= -1.0:
            raise GfdDomainError(f"order {alpha:g} pushes exponent {k:g} to {k - alpha:g} <= -1")
        terms.append((c * coeff, k - alpha))
    return GeneralizedPolynomial.from_terms(terms)


def caputo_series_derivative(poly: GeneralizedPolynomial, order: FracOrder) -> GeneralizedPolynomial:
    """c * t^k -> c * Gamma(k+1)/Gamma(k-alpha+1) * t^(k-alpha); constants -> 0."""
    for _, k in poly.terms:
        if k < 0.0:
            raise GfdDomainError(f"series derivative needs exponents >= 0, got {k:g}")
    return _caputo_termwise(poly, order.alpha)


@dataclass(frozen=True)
class CompositionCheck:
    lhs: GeneralizedPolynomial
    rhs: GeneralizedPolynomial

    def max_relative_gap(self) -> float:
        """Largest relative coefficient gap; inf when the exponent sets differ."""
        if len(self.lhs.terms) != len(self.rhs.terms):
            return math.inf
        if any(abs(a - b) > 1e-12 for a, b in zip(self.lhs.exponents, self.rhs.exponents)):
            return math.inf
        gap = 0.0
        for (cl, _), (cr, _) in zip(self.lhs.terms, self.rhs.terms):
            gap = max(gap, abs(cl - cr) / max(abs(cl), abs(cr)))
        return gap


def compose_check(poly: GeneralizedPolynomial, a1: FracOrder, a2: FracOrder) -> CompositionCheck:
    """Both sides of D^a1 D^a2 f = D^(a1+a2) f for a series f.

    The inner derivative may produce exponents in (-1, 0); those are carried
    through the monomial rule exactly as the outer step requires.
    """
    combined = a1.alpha + a2.alpha
    for _, k in poly.terms:
        if k < 0.0:
            raise GfdDomainError(f"series derivative needs exponents >= 0, got {k:g}")
        if k != 0.0 and k - combined <= -1.0:
            raise GfdDomainError(f"combined order {combined:g} pushes exponent {k:g} to {k - combined:g} <= -1")
    lhs = _caputo_termwise(caputo_series_derivative(poly, a2), a1.alpha)
    rhs = _caputo_termwise(poly, combined)
    return CompositionCheck(lhs, rhs)


# =========================================================
# product and quotient rules
# =========================================================
def product_rule_residual(f: DifferentiableFn, g: DifferentiableFn, p: OperatorParams, t: float) -> float:
    t = _require_positive(t)
    lhs = gfd_closed(f * g, p, t)
    rhs = f.f(t) * gfd_closed(g, p, t) + g.f(t) * gfd_closed(f, p, t)
    return abs(lhs - rhs)


def quotient_rule_residual(f: DifferentiableFn, g: DifferentiableFn, p: OperatorParams, t: float) -> float:
    t = _require_positive(t)
    gt = g.f(t)
    if gt == 0.0:
        raise GfdDivisionError(f"denominator {g.name} vanishes at t={t:g}")
    lhs = gfd_closed(f / g, p, t)
    rhs = (gt * gfd_closed(f, p, t) - f.f(t) * gfd_closed(g, p, t)) / (gt * gt)
    return abs(lhs - rhs)


# =========================================================
# fractional integral
# =========================================================
def _require_integrable(integrand: RealFn, upper: float, alpha: float) -> None:
    # int_0 g(u) du diverges when |g(u)| * u does not shrink as u -> 0+
    weights = []
    for j in INTEGRABILITY_HALVINGS:
        u = upper * 2.0 ** -j
        if u ** (1.0 / alpha) == 0.0:
            continue
        weights.append(abs(integrand(u)) * u)
    if len(weights) < 2 or not all(w > 0.0 for w in weights):
        return
    if all(later >= earlier * (1.0 - 1e-9) for earlier, later in zip(weights, weights[1:])):
        raise GfdDomainError(
            f"fractional integral diverges at 0: f(x) x^(alpha-1) is not integrable (alpha={alpha:g})"
        )


def fractional_integral(fn: Union[DifferentiableFn, RealFn], p: OperatorParams, t: float, tol: float = 1e-10) -> float:
    """(1/A) * int_0^t f(x) x^(alpha-1) dx.

    Integrated in u = x^alpha, where the kernel becomes the constant 1/alpha.
    """
    t = _require_positive(t)
    f = fn.f if isinstance(fn, DifferentiableFn) else fn
    alpha = p.alpha
    a = p.prefactor()

    def integrand(u: float) -> float:
        # quadrature nodes are interior, so x > 0
        x = u ** (1.0 / alpha)
        value = f(x)
        if not math.isfinite(value):
            raise PropagationError(f"integrand is not finite at x={x:g}")
        return value

    _require_integrable(integrand, t ** alpha, alpha)
    value, abserr = integrate.quad(integrand, 0.0, t ** alpha, epsabs=tol, epsrel=1e-12, limit=200)
    if abserr > 10.0 * max(tol, 1e-10 * abs(value)):
        logger.warning("fractional integral error estimate %.3g exceeds tolerance %.3g", abserr, tol)
    return value / (alpha * a)


def fractional_integral_fn(fn: Union[DifferentiableFn, RealFn], p: OperatorParams, tol: float = 1e-13) -> DifferentiableFn:
    """t -> I_alpha f(t) as a DifferentiableFn; df = f(t) t^(alpha-1) / A."""
    f = fn.f if isinstance(fn, DifferentiableFn) else fn
    a = p.prefactor()
    return DifferentiableFn(
        lambda t: fractional_integral(f, p, t, tol=tol),
        lambda t: f(t) * t ** (p.alpha - 1.0) / a,
        name="I_alpha f",
    )


def fractional_integral_poly(poly: GeneralizedPolynomial, p: OperatorParams) -> GeneralizedPolynomial:
    """Closed-form integral of a generalized polynomial: c t^k -> c/(A (k+alpha)) t^(k+alpha).

    With BetaEqualsExponent, beta = k + alpha per term.
    """
    alpha = p.alpha
    terms = []
    for c, k in poly.terms:
        if k + alpha <= 0.0:
            raise GfdDomainError(f"fractional integral of t^{k:g} diverges at 0 for alpha={alpha:g} (needs k + alpha > 0)")
        a = p.prefactor(exponent=k + alpha)
        terms.append((c / (a * (k + alpha)), k + alpha))
    return GeneralizedPolynomial.from_terms(terms)


# =========================================================
# Rolle and mean-value points
# =========================================================
def _no_exponent_strategy(p: OperatorParams):
    if p.beta_strategy is BetaStrategy.BETA_EQUALS_EXPONENT:
        raise GfdDomainError("BetaEqualsExponent is only defined for generalized polynomial inputs")


def rolle_point(fn: DifferentiableFn, a: float, b: float, p: OperatorParams) -> float:
    """c in (a, b) with GFD f(c) = 0, given f(a) = f(b).

    A * t^(1-alpha) > 0 on t > 0, so the GFD vanishes exactly where f' does;
    the search brackets a sign change of f' and bisects it.
    """
    _no_exponent_strategy(p)
    if not (0.0 < a < b):
        raise GfdInputError(f"need 0 < a < b, got a={a!r}, b={b!r}")
    fa, fb = fn.f(a), fn.f(b)
    if abs(fa - fb) > 1e-12 * max(1.0, abs(fa)):
        raise GfdInputError(f"f(a) = {fa:.15g} differs from f(b) = {fb:.15g}")

    grid = np.linspace(a, b, ROLLE_SCAN_POINTS)
    slopes = np.array([fn.df(x) for x in grid])
    for i in range(1, len(grid) - 1):
        if slopes[i] == 0.0:
            return float(grid[i])
    for i in range(len(grid) - 1):
        if slopes[i] * slopes[i + 1] < 0.0:
            c = optimize.bisect(fn.df, grid[i], grid[i + 1], xtol=1e-12 * (b - a), rtol=8.9e-16)
            return float(c)
    raise SearchFailureError(f"no sign change of the derivative of {fn.name} on [{a:g}, {b:g}]")


def mvt_consistent_h(p: OperatorParams) -> float:
    """Gamma(beta-alpha+1) / (alpha * Gamma(beta)) = 1 / (alpha * A)."""
    _no_exponent_strategy(p)
    return 1.0 / (p.alpha * p.prefactor())


def mvt_search(fn: DifferentiableFn, a: float, b: float, p: OperatorParams, h: Optional[float] = None) -> Optional[float]:
    """c in [a, b] with GFD f(c) = (f(b) - f(a)) / (h (b^alpha - a^alpha)), or None.

    ``h`` defaults to 1/Gamma(alpha).
    """
    _no_exponent_strategy(p)
    if not (0.0 < a < b):
        raise GfdInputError(f"need 0 < a < b, got a={a!r}, b={b!r}")
    if h is None:
        h = 1.0 / gamma(p.alpha)
    if not h > 0.0:
        raise GfdInputError(f"h must be positive, got {h!r}")
    alpha = p.alpha
    target = (fn.f(b) - fn.f(a)) / (h * (b ** alpha - a ** alpha))

    def gap(c: float) -> float:
        return gfd_closed(fn, p, c) - target

    grid = np.linspace(a, b, MVT_SCAN_POINTS)
    gaps = np.array([gap(x) for x in grid])
    hits = np.flatnonzero(np.abs(gaps) <= MVT_MATCH_TOL)
    if hits.size:
        return float(grid[hits[0]])
    for i in range(len(grid) - 1):
        if gaps[i] * gaps[i + 1] < 0.0:
            return float(optimize.bisect(gap, grid[i], grid[i + 1], xtol=1e-12 * (b - a), rtol=8.9e-16))
    return None


# =========================================================
# elementary functions through the series rule
# =========================================================
def elementary_series_derivative(kind: ElementaryKind, rate: float, order: FracOrder, truncation_order: int = 30) -> GeneralizedPolynomial:
    """Series-rule derivative of exp / sin / cos (the Caputo value)."""
    return caputo_series_derivative(taylor_expand(ElementarySpec(kind, rate, truncation_order)), order)
