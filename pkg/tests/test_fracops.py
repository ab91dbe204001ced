import math

import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import integrate, special

from gfdcalc.errors import GfdDivisionError, GfdDomainError, GfdInputError, PropagationError, SearchFailureError
from gfdcalc.expr import ElementaryKind, GeneralizedPolynomial, evaluate
from gfdcalc.fracops import (
    BetaStrategy,
    DifferentiableFn,
    OperatorParams,
    as_differentiable,
    caputo_series_derivative,
    cd_closed,
    compose_check,
    elementary_series_derivative,
    fractional_integral,
    fractional_integral_fn,
    fractional_integral_poly,
    gfd_at_zero,
    gfd_closed,
    gfd_limit,
    gfd_monomial,
    gfd_series_derivative,
    gfd_series_terms,
    mvt_consistent_h,
    mvt_search,
    product_rule_residual,
    quotient_rule_residual,
    rolle_point,
)
from gfdcalc.specfun import FracOrder

SQRT_PI = math.sqrt(math.pi)
HALF = OperatorParams.of(0.5, 0.5)


# -- closed form and limit ------------------------------------------------
def test_gfd_closed_examples():
    assert gfd_closed(DifferentiableFn.power(2.0), OperatorParams.of(0.5, 2.0), 1.0) == pytest.approx(1.5045055, abs=1e-7)
    assert gfd_closed(DifferentiableFn.constant(7.0), OperatorParams.of(0.3, 1.7), 0.3) == 0.0
    assert gfd_closed(DifferentiableFn.power(3.0), OperatorParams.of(1.0, 1.0), 2.0) == pytest.approx(12.0)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_gfd_closed_needs_positive_t(t):
    with pytest.raises(GfdDomainError):
        gfd_closed(DifferentiableFn.power(2.0), HALF, t)


def test_cd_closed_has_unit_prefactor():
    fn = DifferentiableFn.power(2.0)
    # t^(1-alpha) * 2t = 2 * 8
    assert cd_closed(fn, FracOrder(0.5), 4.0) == pytest.approx(16.0)


def test_gfd_limit_examples():
    assert gfd_limit(DifferentiableFn.power(2.0), OperatorParams.of(0.5, 2.0), 1.0) == pytest.approx(1.5045055, abs=1e-6)
    assert gfd_limit(DifferentiableFn.sine(), OperatorParams.of(1.0, 1.0), 0.5) == pytest.approx(math.cos(0.5), abs=1e-6)
    fn = DifferentiableFn.power(1.5)
    assert gfd_limit(fn, HALF, 0.25) == pytest.approx(gfd_closed(fn, HALF, 0.25), abs=1e-6)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5, 2.0])
def test_limit_agrees_with_closed_form(alpha, beta):
    p = OperatorParams.of(alpha, beta)
    for fn in (DifferentiableFn.power(2.0), DifferentiableFn.power(1.5), DifferentiableFn.sine(), DifferentiableFn.exponential()):
        for t in (0.25, 1.0, 2.0):
            assert abs(gfd_limit(fn, p, t) - gfd_closed(fn, p, t)) <= 1e-6


def test_gfd_limit_accepts_bare_callable():
    p = OperatorParams.of(0.5, 2.0)
    assert gfd_limit(lambda t: t * t, p, 1.0) == pytest.approx(1.5045055, abs=1e-6)


def test_gfd_at_zero():
    assert gfd_at_zero(DifferentiableFn.power(1.0), HALF).value == pytest.approx(0.0, abs=1e-6)
    root = gfd_at_zero(DifferentiableFn.power(0.5), HALF)
    assert not root.diverged
    assert root.value == pytest.approx(SQRT_PI / 2.0, abs=1e-7)
    quarter = gfd_at_zero(DifferentiableFn.power(0.25), HALF)
    assert quarter.diverged and quarter.value is None


@given(
    st.floats(min_value=-5, max_value=5),
    st.floats(min_value=-5, max_value=5),
    st.floats(min_value=0.05, max_value=1.0),
    st.floats(min_value=0.1, max_value=3.0),
)
def test_linearity(a, b, alpha, t):
    f, g = DifferentiableFn.power(2.0), DifferentiableFn.cosine()
    p = OperatorParams.of(alpha, 1.3)
    lhs = gfd_closed(f.scale(a) + g.scale(b), p, t)
    rhs = a * gfd_closed(f, p, t) + b * gfd_closed(g, p, t)
    assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs) + abs(a * gfd_closed(f, p, t)) + abs(b * gfd_closed(g, p, t)))


def test_differentiable_fn_rejects_wrong_derivative():
    with pytest.raises(GfdDomainError):
        DifferentiableFn(math.sin, math.sin, name="bad")


def test_operator_params():
    with pytest.raises(GfdDomainError):
        OperatorParams(FracOrder(0.5))
    assert OperatorParams.of(0.7).beta_strategy is BetaStrategy.BETA_EQUALS_ALPHA
    assert OperatorParams.of(0.7).prefactor() == pytest.approx(special.gamma(0.7), rel=1e-12)
    exponent = OperatorParams.of(0.5, strategy="exponent")
    with pytest.raises(GfdDomainError):
        gfd_closed(DifferentiableFn.power(2.0), exponent, 1.0)


@pytest.mark.parametrize("strategy", ["alpha", "exponent"])
def test_operator_params_rejects_beta_with_derived_strategy(strategy):
    with pytest.raises(GfdDomainError):
        OperatorParams.of(0.5, 2.0, strategy)
    assert OperatorParams.of(0.5, 2.0, "fixed").resolve_shape().beta == 2.0


# -- monomial and series rules ---------------------------------------------
def test_gfd_monomial():
    coeff, exponent = gfd_monomial(2.0, OperatorParams.of(0.5, 2.0))
    assert coeff == pytest.approx(1.5045055, abs=1e-7) and exponent == 1.5
    assert gfd_monomial(1.0, OperatorParams.of(1.0, 1.0)) == (1.0, 0.0)
    coeff, exponent = gfd_monomial(0.5, HALF)
    assert coeff == pytest.approx(0.8862269, abs=1e-7) and exponent == 0.0
    with pytest.raises(GfdDomainError):
        gfd_monomial(-1.0, HALF)


def test_beta_equals_exponent_is_caputo():
    p = OperatorParams.of(0.5, strategy="exponent")
    coeff, _ = gfd_monomial(2.0, p)
    assert coeff == pytest.approx(special.gamma(3.0) / special.gamma(2.5), rel=1e-12)


def test_gfd_series_derivative_and_polynomial_input():
    poly = GeneralizedPolynomial.from_terms([(3.0, 0.0), (2.0, 2.0)])
    p = OperatorParams.of(0.5, 2.0)
    d = gfd_series_derivative(poly, p)
    assert d.exponents == (1.5,)
    assert gfd_closed(poly, p, 1.0) == pytest.approx(2.0 * 1.5045055, abs=1e-6)
    assert gfd_closed(poly, p, 0.7) == pytest.approx(gfd_closed(as_differentiable(poly), p, 0.7), rel=1e-12)


def test_gfd_closed_polynomial_with_steep_negative_power():
    # t^(-1/2) at alpha = 3/4 differentiates to a t^(-5/4) term
    poly = GeneralizedPolynomial.from_terms([(1.0, -0.5)])
    p = OperatorParams.of(0.75)
    ((coeff, exponent),) = gfd_series_terms(poly, p)
    assert coeff == pytest.approx(-0.5 * special.gamma(0.75), rel=1e-12) and exponent == -1.25
    expected = gfd_closed(DifferentiableFn.power(-0.5), p, 0.8)
    assert gfd_closed(poly, p, 0.8) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(GfdDomainError):
        gfd_series_derivative(poly, p)


def test_caputo_series_derivative():
    d = caputo_series_derivative(GeneralizedPolynomial.monomial(1.0, 2.0), FracOrder(0.5))
    assert d.exponents == (1.5,)
    assert d.coefficients[0] == pytest.approx(1.5045055, abs=1e-7)
    assert caputo_series_derivative(GeneralizedPolynomial.constant(5.0), FracOrder(0.5)).is_zero()
    with pytest.raises(GfdDomainError):
        caputo_series_derivative(GeneralizedPolynomial.monomial(1.0, -0.5), FracOrder(0.5))


def test_elementary_series_derivative_exp():
    d = elementary_series_derivative(ElementaryKind.EXP, 1.0, FracOrder(0.5), truncation_order=10)
    coeff, exponent = d.terms[0]
    assert exponent == 0.5
    assert coeff == pytest.approx(1.0 / special.gamma(1.5), rel=1e-12)


# -- composition ----------------------------------------------------------
def test_compose_check_examples():
    check = compose_check(GeneralizedPolynomial.monomial(1.0, 3.0), FracOrder(0.5), FracOrder(0.25))
    assert check.lhs.exponents == check.rhs.exponents == (2.25,)
    assert check.rhs.coefficients[0] == pytest.approx(special.gamma(4.0) / special.gamma(3.25), rel=1e-12)
    assert check.max_relative_gap() <= 1e-12

    check = compose_check(GeneralizedPolynomial.monomial(1.0, 2.0), FracOrder(0.5), FracOrder(0.5))
    assert check.rhs.exponents == (1.0,)
    assert check.rhs.coefficients[0] == pytest.approx(2.0, rel=1e-12)
    assert check.max_relative_gap() <= 1e-12


def test_compose_check_underflow():
    with pytest.raises(GfdDomainError):
        compose_check(GeneralizedPolynomial.monomial(1.0, 0.25), FracOrder(0.9), FracOrder(0.9))


POOL = [0.0, 1.0, 2.0, 3.0, 4.0, 0.3, 0.5, 1.5, 2.25, 3.75]


@settings(max_examples=60)
@given(
    st.lists(st.tuples(st.floats(min_value=-3, max_value=3), st.sampled_from(POOL)), min_size=1, max_size=5),
    st.floats(min_value=0.05, max_value=0.5),
    st.floats(min_value=0.05, max_value=0.5),
)
def test_composition_property(terms, a1, a2):
    poly = GeneralizedPolynomial.from_terms(terms)
    assume(all(abs(k - a2) > 1e-6 for k in poly.exponents))
    assume(all(abs(c) > 1e-6 for c in poly.coefficients))
    check = compose_check(poly, FracOrder(a1), FracOrder(a2))
    assert check.max_relative_gap() <= 1e-12


# -- product and quotient rules --------------------------------------------
@pytest.mark.parametrize(
    "f,g,p,t",
    [
        (DifferentiableFn.power(1.0), DifferentiableFn.power(2.0), HALF, 1.0),
        (DifferentiableFn.sine(), DifferentiableFn.cosine(), OperatorParams.of(0.8, 0.8), 0.7),
        (DifferentiableFn.constant(4.0), DifferentiableFn.exponential(2.0), OperatorParams.of(0.4, 1.1), 1.3),
    ],
)
def test_product_rule(f, g, p, t):
    scale = 1.0 + abs(gfd_closed(f * g, p, t))
    assert product_rule_residual(f, g, p, t) <= 1e-10 * scale


@pytest.mark.parametrize(
    "f,g,p,t",
    [
        (DifferentiableFn.power(2.0), DifferentiableFn.power(1.0), HALF, 2.0),
        (DifferentiableFn.constant(1.0), DifferentiableFn.constant(1.0) + DifferentiableFn.power(2.0), OperatorParams.of(0.6, 0.6), 1.0),
        (DifferentiableFn.cosine(), DifferentiableFn.cosine(), OperatorParams.of(0.9, 0.9), 0.4),
    ],
)
def test_quotient_rule(f, g, p, t):
    scale = 1.0 + abs(gfd_closed(f / g, p, t))
    assert quotient_rule_residual(f, g, p, t) <= 1e-10 * scale


def test_quotient_of_equal_functions_has_zero_derivative():
    f = DifferentiableFn.cosine()
    assert gfd_closed(f / f, HALF, 0.4) == 0.0


def test_quotient_rule_zero_denominator():
    g = DifferentiableFn(lambda t: t - 1.0, lambda t: 1.0, name="t-1")
    with pytest.raises(GfdDivisionError):
        quotient_rule_residual(DifferentiableFn.power(2.0), g, HALF, 1.0)


# -- fractional integral ----------------------------------------------------
def test_fractional_integral_of_t():
    # (1/A) t^(k+alpha)/(k+alpha) with A = Gamma(1/2)
    expected = 1.0 / (SQRT_PI * 1.5)
    assert fractional_integral(DifferentiableFn.power(1.0), HALF, 1.0) == pytest.approx(expected, abs=1e-10)


def test_fractional_integral_classical():
    assert fractional_integral(lambda t: 1.0, OperatorParams.of(1.0, 1.0), 2.0) == pytest.approx(2.0, abs=1e-10)


def test_fractional_integral_matches_closed_form_for_polynomials():
    poly = GeneralizedPolynomial.from_terms([(1.0, 0.0), (-2.0, 0.5), (0.75, 2.0)])
    for alpha in (0.3, 0.6, 0.9):
        p = OperatorParams.of(alpha)
        closed = fractional_integral_poly(poly, p)
        assert fractional_integral(lambda x: evaluate(poly, x), p, 1.5) == pytest.approx(evaluate(closed, 1.5), abs=1e-9)


def test_fractional_integral_propagation_error():
    with pytest.raises(PropagationError):
        fractional_integral(lambda t: float("nan"), HALF, 1.0)


@pytest.mark.parametrize("alpha", [0.5, 0.75, 0.9])
@pytest.mark.parametrize(
    "fn",
    [DifferentiableFn.constant(1.0), DifferentiableFn.power(1.0), DifferentiableFn.power(2.0), DifferentiableFn.sine(), DifferentiableFn.exponential()],
    ids=["1", "x", "x^2", "sin", "exp"],
)
def test_derivative_inverts_integral(alpha, fn):
    p = OperatorParams.of(alpha)

    def integral(x):
        return fractional_integral(fn, p, x, tol=1e-13)

    # difference quotients of the quadrature values only
    for t in (0.5, 1.0):
        assert abs(gfd_limit(integral, p, t) - fn(t)) <= 1e-6


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.75, 0.9])
@pytest.mark.parametrize("fn", [DifferentiableFn.sine(), DifferentiableFn.exponential()], ids=["sin", "exp"])
def test_fractional_integral_matches_weighted_quadrature(alpha, fn):
    p = OperatorParams.of(alpha)
    for t in (0.5, 1.0, 2.0):
        # QUADPACK integrates f(x) x^(alpha-1) on [0, t] with the algebraic weight directly
        weighted, _ = integrate.quad(fn.f, 0.0, t, weight="alg", wvar=(alpha - 1.0, 0.0), epsabs=0.0, epsrel=1e-12)
        assert fractional_integral(fn, p, t) == pytest.approx(weighted / p.prefactor(), rel=1e-10)


def test_fractional_integral_fn_is_quadrature_valued():
    p = OperatorParams.of(0.75)
    integral = fractional_integral_fn(DifferentiableFn.sine(), p)
    assert integral(1.0) == pytest.approx(fractional_integral(math.sin, p, 1.0, tol=1e-13), rel=1e-13)


def test_fractional_integral_poly_inverse():
    poly = GeneralizedPolynomial.from_terms([(1.0, 0.0), (3.0, 1.0)])
    p = OperatorParams.of(0.6, 1.4)
    back = gfd_series_derivative(fractional_integral_poly(poly, p), p)
    assert back.exponents == pytest.approx(poly.exponents)
    for got, want in zip(back.coefficients, poly.coefficients):
        assert got == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("k, alpha", [(-0.5, 0.5), (-0.8, 0.5), (-0.9, 0.3)])
def test_fractional_integral_poly_rejects_divergent_terms(k, alpha):
    poly = GeneralizedPolynomial.from_terms([(1.0, 1.0), (2.0, k)])
    with pytest.raises(GfdDomainError):
        fractional_integral_poly(poly, OperatorParams.of(alpha))


@pytest.mark.parametrize("k, alpha", [(-0.5, 0.5), (-0.8, 0.5), (-0.9, 0.3)])
def test_fractional_integral_rejects_divergent_integrand(k, alpha):
    with pytest.raises(GfdDomainError):
        fractional_integral(lambda x: x ** k, OperatorParams.of(alpha), 1.0)


def test_fractional_integral_of_integrable_negative_power():
    # t^(-1/4) at alpha = 1/2: k + alpha = 1/4 > 0
    p = OperatorParams.of(0.5)
    closed = evaluate(fractional_integral_poly(GeneralizedPolynomial.monomial(1.0, -0.25), p), 1.0)
    assert closed == pytest.approx(1.0 / (SQRT_PI * 0.25), rel=1e-12)
    assert fractional_integral(lambda x: x ** -0.25, p, 1.0) == pytest.approx(closed, rel=1e-9)


# -- Rolle and mean value ---------------------------------------------------
def test_rolle_examples():
    quad = DifferentiableFn(lambda t: (t - 1) * (t - 2), lambda t: 2 * t - 3, name="(t-1)(t-2)")
    assert rolle_point(quad, 1.0, 2.0, HALF) == pytest.approx(1.5, abs=1e-12)
    wave = DifferentiableFn(lambda t: math.sin(math.pi * t), lambda t: math.pi * math.cos(math.pi * t), name="sin(pi t)")
    c = rolle_point(wave, 1.0, 2.0, HALF)
    assert c == pytest.approx(1.5, abs=1e-9)
    assert abs(gfd_closed(wave, HALF, c)) <= 1e-10


def test_rolle_cubic():
    from scipy.optimize import brentq

    cubic = DifferentiableFn(lambda t: t ** 3 - 3 * t, lambda t: 3 * t * t - 3, name="t^3-3t")
    b = brentq(lambda x: x ** 3 - 3 * x + 1.375, 1.2, 2.5, xtol=1e-15)
    c = rolle_point(cubic, 0.5, b, HALF)
    assert c == pytest.approx(1.0, abs=1e-9)
    assert abs(gfd_closed(cubic, HALF, c)) <= 1e-10


def test_rolle_errors():
    with pytest.raises(GfdInputError):
        rolle_point(DifferentiableFn.power(2.0), 1.0, 2.0, HALF)
    tilt = DifferentiableFn(lambda t: 1e-14 * t, lambda t: 1e-14, name="tilt")
    with pytest.raises(SearchFailureError):
        rolle_point(tilt, 1.0, 2.0, HALF)


def test_mvt_default_constant_has_no_point():
    # c would have to be 9, outside [1, 4]
    assert mvt_search(DifferentiableFn.power(1.0), 1.0, 4.0, HALF) is None


def test_mvt_classical_case():
    assert mvt_search(DifferentiableFn.power(1.0), 1.0, 4.0, OperatorParams.of(1.0, 1.0), h=1.0) == 1.0


def test_mvt_consistent_constant():
    h = mvt_consistent_h(HALF)
    assert h == pytest.approx(2.0 / SQRT_PI, rel=1e-12)
    assert mvt_search(DifferentiableFn.power(0.5), 1.0, 4.0, HALF, h=h) == 1.0


def test_mvt_rejects_bad_interval():
    with pytest.raises(GfdInputError):
        mvt_search(DifferentiableFn.power(1.0), 2.0, 1.0, HALF)
