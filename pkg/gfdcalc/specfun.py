"""Gamma-function kernel and the GFD prefactor A(alpha, beta) = Gamma(beta) / Gamma(beta - alpha + 1)."""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import GfdDomainError

# Lanczos approximation, g = 7, n = 9 (double precision coefficients)
LANCZOS_G = 7.0
LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# ln Gamma(1 + e) = -gamma_E e + sum_{k>=2} (-1)^k zeta(k) e^k / k, used for |e| <= radius
# so the zeros of ln Gamma at 1 and 2 keep full relative precision
SERIES_RADIUS = 0.2
SERIES_TERMS = 40
_LN_GAMMA_1P_COEFFS = tuple(
    float((-1) ** k * special.zeta(k) / k) for k in range(2, SERIES_TERMS + 2)
)


@dataclass(frozen=True)
class FracOrder:
    """Fractional order alpha, 0 < alpha <= 1."""

    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not math.isfinite(alpha) or not (0.0 < alpha <= 1.0):
            raise GfdDomainError(f"order alpha must satisfy 0 < alpha <= 1, got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class ShapeParam:
    """Shape parameter beta > 0 of the GFD prefactor."""

    beta: float

    def __post_init__(self):
        beta = float(self.beta)
        if not math.isfinite(beta) or beta <= 0.0:
            raise GfdDomainError(f"shape beta must be > 0, got {self.beta!r}")
        object.__setattr__(self, "beta", beta)


def _lanczos_ln_gamma(x: float) -> float:
    # valid for x >= 0.5
    z = x - 1.0
    acc = LANCZOS_COEFFS[0]
    for i, c in enumerate(LANCZOS_COEFFS[1:], start=1):
        acc += c / (z + i)
    t = z + LANCZOS_G + 0.5
    return LN_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def _ln_gamma_1p(eps: float) -> float:
    # ln Gamma(1 + eps) for |eps| <= SERIES_RADIUS
    acc = 0.0
    for c in reversed(_LN_GAMMA_1P_COEFFS):
        acc = acc * eps + c
    return eps * (-np.euler_gamma + eps * acc)


def ln_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0.

    Lanczos away from 1 and 2; around them a power series in x - 1 (and
    Gamma(2 + e) = (1 + e) Gamma(1 + e)) so the result stays accurate
    relative to its own size as it passes through zero.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise GfdDomainError(f"ln_gamma requires x > 0, got {x!r}")
    if x == 1.0 or x == 2.0:
        return 0.0
    if abs(x - 1.0) <= SERIES_RADIUS:
        return _ln_gamma_1p(x - 1.0)
    if abs(x - 2.0) <= SERIES_RADIUS:
        eps = x - 2.0
        return math.log1p(eps) + _ln_gamma_1p(eps)
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        return math.log(math.pi / math.sin(math.pi * x)) - ln_gamma(1.0 - x)
    return _lanczos_ln_gamma(x)


def gamma(x: float) -> float:
    """Gamma(x) for real x that is not a pole (0, -1, -2, ...)."""
    x = float(x)
    if not math.isfinite(x):
        raise GfdDomainError(f"gamma requires a finite argument, got {x!r}")
    if x > 0.0:
        return math.exp(ln_gamma(x))
    if x == math.floor(x):
        raise GfdDomainError(f"gamma has a pole at {x!r}")
    # x < 0: Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
    return math.pi / (math.sin(math.pi * x) * math.exp(ln_gamma(1.0 - x)))


def reciprocal_gamma(x: float) -> float:
    """1 / Gamma(x), which is 0 at the poles of Gamma."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / gamma(x)


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b) for a, b > 0, evaluated in log space."""
    return math.exp(ln_gamma(a) - ln_gamma(b))


def gfd_prefactor(order: FracOrder, shape: ShapeParam) -> float:
    """A(alpha, beta) = Gamma(beta) / Gamma(beta - alpha + 1); always positive."""
    alpha, beta = order.alpha, shape.beta
    if alpha == 1.0:
        return 1.0
    return gamma_ratio(beta, beta - alpha + 1.0)


def caputo_coefficient(k: float, alpha: float) -> float:
    """Gamma(k + 1) / Gamma(k - alpha + 1), the monomial rule for t^k.

    The constant term (k == 0) maps to 0. ``alpha`` is a bare float so that
    combined orders above 1 can be used when composing operators.
    """
    if k == 0.0:
        return 0.0
    if k <= -1.0:
        raise GfdDomainError(f"monomial exponent must exceed -1, got {k!r}")
    return gamma(k + 1.0) * reciprocal_gamma(k - alpha + 1.0)
