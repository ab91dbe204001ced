"""Generalized polynomials (finite sums of c * t^k, k > -1) and Maclaurin truncations
of exp, sin and cos in that representation.
"""
import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Tuple

import numpy as np

from .errors import GfdDomainError

# exponents closer than this are the same exponent
EXPONENT_MERGE_TOL = 1e-12
DEFAULT_TRUNCATION_ORDER = 30

Term = Tuple[float, float]


def _canonical_terms(terms: Iterable[Term]) -> Tuple[Term, ...]:
    pairs = []
    for coeff, exponent in terms:
        coeff, exponent = float(coeff), float(exponent)
        if not (math.isfinite(coeff) and math.isfinite(exponent)):
            raise GfdDomainError(f"non-finite term {coeff!r}*t^{exponent!r}")
        if exponent <= -1.0:
            raise GfdDomainError(f"exponent must exceed -1, got {exponent!r}")
        pairs.append((exponent, coeff))
    pairs.sort(key=lambda p: p[0])

    merged: List[List[float]] = []
    for exponent, coeff in pairs:
        if merged and abs(exponent - merged[-1][0]) <= EXPONENT_MERGE_TOL:
            merged[-1][1] += coeff
        else:
            merged.append([exponent, coeff])
    return tuple((c, k) for k, c in merged if c != 0.0)


@dataclass(frozen=True)
class GeneralizedPolynomial:
    """Canonical sum of ``coeff * t**exponent`` terms.

    ``terms`` holds (coeff, exponent) pairs with strictly increasing exponents,
    every exponent above -1 and no zero coefficients. Build instances through
    :meth:`from_terms`, which normalises arbitrary input.
    """

    terms: Tuple[Term, ...] = ()

    @classmethod
    def from_terms(cls, terms: Iterable[Term]) -> "GeneralizedPolynomial":
        return cls(_canonical_terms(terms))

    @classmethod
    def monomial(cls, coeff: float, exponent: float) -> "GeneralizedPolynomial":
        return cls.from_terms([(coeff, exponent)])

    @classmethod
    def constant(cls, value: float) -> "GeneralizedPolynomial":
        return cls.from_terms([(value, 0.0)])

    def normalized(self) -> "GeneralizedPolynomial":
        return GeneralizedPolynomial.from_terms(self.terms)

    @property
    def exponents(self) -> Tuple[float, ...]:
        return tuple(k for _, k in self.terms)

    @property
    def coefficients(self) -> Tuple[float, ...]:
        return tuple(c for c, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "GeneralizedPolynomial") -> "GeneralizedPolynomial":
        if not isinstance(other, GeneralizedPolynomial):
            return NotImplemented
        return GeneralizedPolynomial.from_terms(self.terms + other.terms)

    def __sub__(self, other: "GeneralizedPolynomial") -> "GeneralizedPolynomial":
        if not isinstance(other, GeneralizedPolynomial):
            return NotImplemented
        return self + other.scale(-1.0)

    def scale(self, factor: float) -> "GeneralizedPolynomial":
        return GeneralizedPolynomial.from_terms((c * factor, k) for c, k in self.terms)

    def shifted(self, by: float) -> "GeneralizedPolynomial":
        """Multiply by t**by."""
        return GeneralizedPolynomial.from_terms((c, k + by) for c, k in self.terms)

    def __call__(self, t: float) -> float:
        return evaluate(self, t)

    def __str__(self) -> str:
        return format_poly(self)


class ElementaryKind(enum.Enum):
    EXP = "exp"
    SIN = "sin"
    COS = "cos"


@dataclass(frozen=True)
class ElementarySpec:
    """exp(rate*t), sin(rate*t) or cos(rate*t), truncated at order N."""

    kind: ElementaryKind
    rate: float
    truncation_order: int = DEFAULT_TRUNCATION_ORDER

    def __post_init__(self):
        if int(self.truncation_order) != self.truncation_order or self.truncation_order < 1:
            raise GfdDomainError(f"truncation order must be a positive integer, got {self.truncation_order!r}")
        if not math.isfinite(self.rate):
            raise GfdDomainError(f"rate must be finite, got {self.rate!r}")


def taylor_expand(spec: ElementarySpec) -> GeneralizedPolynomial:
    """Degree-capped Maclaurin series.

    Exp keeps exponents 0..N, Sin the odd exponents up to 2N+1 and Cos the even
    exponents up to 2N.
    """
    rate, n_max = float(spec.rate), int(spec.truncation_order)
    terms: List[Term] = []
    if spec.kind is ElementaryKind.EXP:
        coeff = 1.0
        for n in range(n_max + 1):
            if n:
                coeff *= rate / n
            terms.append((coeff, float(n)))
    elif spec.kind is ElementaryKind.SIN:
        coeff = rate
        for n in range(n_max + 1):
            if n:
                coeff *= -rate * rate / ((2 * n) * (2 * n + 1))
            terms.append((coeff, float(2 * n + 1)))
    else:
        coeff = 1.0
        for n in range(n_max + 1):
            if n:
                coeff *= -rate * rate / ((2 * n - 1) * (2 * n))
            terms.append((coeff, float(2 * n)))
    return GeneralizedPolynomial.from_terms(terms)


def _power(t: float, k: float) -> float:
    if t == 0.0:
        if k < 0.0:
            raise GfdDomainError(f"t = 0 with negative exponent {k!r}")
        return 1.0 if k == 0.0 else 0.0
    return math.exp(k * math.log(t))


def evaluate(poly: GeneralizedPolynomial, t: float) -> float:
    """Sum of c * t^k in increasing-exponent order."""
    t = float(t)
    if t < 0.0 or not math.isfinite(t):
        raise GfdDomainError(f"generalized polynomials are evaluated at t >= 0, got {t!r}")
    total = 0.0
    for c, k in poly.terms:
        total += c * _power(t, k)
    return total


def evaluate_many(poly: GeneralizedPolynomial, ts) -> np.ndarray:
    """Vectorised :func:`evaluate` over a positive grid."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts <= 0.0):
        raise GfdDomainError("evaluate_many requires every grid point > 0")
    out = np.zeros_like(ts)
    log_t = np.log(ts)
    for c, k in poly.terms:
        out += c * np.exp(k * log_t)
    return out


def classical_derivative(poly: GeneralizedPolynomial) -> GeneralizedPolynomial:
    """Termwise d/dt; constants drop."""
    terms = []
    for c, k in poly.terms:
        if k == 0.0:
            continue
        if k - 1.0 <= -1.0:
            raise GfdDomainError(f"derivative of t^{k:g} leaves the k > -1 class")
        terms.append((c * k, k - 1.0))
    return GeneralizedPolynomial.from_terms(terms)


# =========================================================
# literal parser:  "c1*t^k1 + c2*t^k2"
# =========================================================
_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_RATIO = rf"{_NUM}(?:/{_NUM})?"
_TERM_RE = re.compile(
    rf"(?P<sign>[+-]?)"
    rf"(?P<coeff>{_RATIO})?"
    rf"(?:(?P<star>\*)?(?P<var>t)(?:\^(?P<exp>\(\s*-?{_RATIO}\s*\)|-?{_RATIO}))?)?"
)


def _parse_ratio(text: str) -> float:
    text = text.strip("()")
    negative = text.startswith("-")
    if negative:
        text = text[1:]
    num, _, den = text.partition("/")
    value = Fraction(num) / Fraction(den) if den else Fraction(num)
    return float(-value if negative else value)


def parse_poly(text: str) -> GeneralizedPolynomial:
    """Parse a literal such as ``"2*t^3/2 - t + 0.5"``.

    Whitespace is ignored; exponents may be decimals or fractions ``p/q``
    (optionally parenthesised). The variable must be ``t``.
    """
    source = re.sub(r"\s+", "", text or "")
    if not source:
        raise GfdDomainError("empty polynomial literal")

    terms: List[Term] = []
    pos = 0
    while pos < len(source):
        m = _TERM_RE.match(source, pos)
        if m is None or m.end() == pos or (not m.group("coeff") and not m.group("var")):
            raise GfdDomainError(f"cannot parse polynomial literal near {source[pos:pos + 12]!r}")
        if pos > 0 and not m.group("sign"):
            raise GfdDomainError(f"expected '+' or '-' before {source[pos:pos + 12]!r}")
        if m.group("star") and not m.group("coeff"):
            raise GfdDomainError(f"dangling '*' near {source[pos:pos + 12]!r}")
        coeff = _parse_ratio(m.group("coeff")) if m.group("coeff") else 1.0
        if m.group("sign") == "-":
            coeff = -coeff
        if m.group("var"):
            exponent = _parse_ratio(m.group("exp")) if m.group("exp") else 1.0
        else:
            exponent = 0.0
        terms.append((coeff, exponent))
        pos = m.end()
    return GeneralizedPolynomial.from_terms(terms)


def format_poly(poly: GeneralizedPolynomial) -> str:
    return format_terms(poly.terms)


def format_terms(terms: Iterable[Term]) -> str:
    """Render (coeff, exponent) pairs in order, without the exponent > -1 check."""
    terms = [(c, k) for c, k in terms if c != 0.0]
    if not terms:
        return "0"
    parts = []
    for i, (c, k) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0.0:
            body = f"{mag:.12g}"
        else:
            power = "t" if k == 1.0 else f"t^{k:.12g}"
            body = power if mag == 1.0 else f"{mag:.12g}*{power}"
        if i == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)
