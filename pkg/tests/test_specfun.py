import math

import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from gfdcalc.errors import GfdDomainError
from gfdcalc.specfun import (
    FracOrder,
    ShapeParam,
    caputo_coefficient,
    gamma,
    gamma_ratio,
    gfd_prefactor,
    ln_gamma,
    reciprocal_gamma,
)


@pytest.mark.parametrize("x", [0.01, 0.1, 0.3, 0.5, 0.75, 0.8, 1.2, 1.25, 1.5, 1.8, 2.2, 2.5, 3.7, 10.0, 50.5, 171.3])
def test_ln_gamma_matches_scipy(x):
    assert ln_gamma(x) == pytest.approx(special.gammaln(x), rel=1e-12)


def _ln_gamma_from_digamma(x, root):
    # ln Gamma(root) = 0 for root 1 and 2, so ln Gamma(x) is the digamma integral from root
    value, _ = integrate.quad(lambda s: special.digamma(root + s), 0.0, x - root,
                              epsabs=0.0, epsrel=1e-13)
    return value


@pytest.mark.parametrize("x, root", [
    (1.0 - 1e-6, 1.0), (1.0 + 1e-6, 1.0), (1.0 + 1e-4, 1.0), (1.0 - 0.05, 1.0), (1.0 + 0.15, 1.0),
    (2.0 - 1e-5, 2.0), (2.0 + 1e-8, 2.0), (2.0 + 0.01, 2.0), (2.0 - 0.15, 2.0),
])
def test_ln_gamma_relative_accuracy_next_to_its_zeros(x, root):
    assert ln_gamma(x) == pytest.approx(_ln_gamma_from_digamma(x, root), rel=1e-12)


@pytest.mark.parametrize("x", [0.1, 0.5, 0.9, 1.5, 7.3])
def test_ln_gamma_recurrence(x):
    # Gamma(x + 1) = x Gamma(x)
    assert math.exp(ln_gamma(x + 1.0)) == pytest.approx(x * math.exp(ln_gamma(x)), rel=1e-12)


def test_ln_gamma_exact_at_one_and_two():
    assert ln_gamma(1.0) == 0.0
    assert ln_gamma(2.0) == 0.0


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan"), float("inf")])
def test_ln_gamma_rejects_non_positive(x):
    with pytest.raises(GfdDomainError):
        ln_gamma(x)


def test_gamma_values():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-13)
    # reflection keeps the sign
    assert gamma(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-12)
    assert gamma(-1.5) == pytest.approx(special.gamma(-1.5), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -3.0])
def test_gamma_poles(x):
    with pytest.raises(GfdDomainError):
        gamma(x)
    assert reciprocal_gamma(x) == 0.0


def test_gamma_ratio():
    assert gamma_ratio(5.0, 3.0) == pytest.approx(12.0, rel=1e-13)


def test_prefactor_example():
    # D^1/2 of t^2 at t = 1 with beta = 2 is 2A
    a = gfd_prefactor(FracOrder(0.5), ShapeParam(2.0))
    assert 2.0 * a == pytest.approx(1.5045055, abs=1e-7)


@given(st.floats(min_value=0.05, max_value=1.0))
def test_prefactor_with_beta_alpha_is_gamma_alpha(alpha):
    a = gfd_prefactor(FracOrder(alpha), ShapeParam(alpha))
    assert a == pytest.approx(special.gamma(alpha), rel=1e-12)
    assert a > 0.0


@given(st.floats(min_value=0.01, max_value=20.0))
def test_prefactor_is_one_at_alpha_one(beta):
    assert gfd_prefactor(FracOrder(1.0), ShapeParam(beta)) == 1.0


@pytest.mark.parametrize("alpha", [0.0, -0.2, 1.5, float("nan")])
def test_frac_order_range(alpha):
    with pytest.raises(GfdDomainError):
        FracOrder(alpha)


@pytest.mark.parametrize("beta", [0.0, -1.0, float("inf")])
def test_shape_param_range(beta):
    with pytest.raises(GfdDomainError):
        ShapeParam(beta)


def test_caputo_coefficient():
    assert caputo_coefficient(0.0, 0.5) == 0.0
    assert caputo_coefficient(2.0, 0.5) == pytest.approx(2.0 / special.gamma(2.5), rel=1e-12)
    # k - alpha + 1 = 0 is a pole of the denominator
    assert caputo_coefficient(0.5, 1.5) == 0.0
    with pytest.raises(GfdDomainError):
        caputo_coefficient(-1.0, 0.5)
