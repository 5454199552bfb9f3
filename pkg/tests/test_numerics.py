import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from isoqec import numerics
from isoqec.numerics import LogScaled, NumericalFailure

SIGMAS = (0.0, 0.25, 0.5, 0.75, 0.9)


@pytest.mark.parametrize("k,expected", [(-1, 1), (0, 1), (1, 1), (2, 2), (5, 15), (6, 48), (7, 105), (20, 3715891200)])
def test_double_factorial_values(k, expected):
    assert int(numerics.double_factorial(k)) == expected
    assert math.isclose(math.exp(numerics.log_double_factorial(k)), expected, rel_tol=1e-13)


def test_double_factorial_rejects_below_minus_one():
    with pytest.raises(ValueError):
        numerics.double_factorial(-2)


@given(st.integers(min_value=1, max_value=400))
def test_log_double_factorial_pairs_to_factorial(k):
    lhs = numerics.log_double_factorial(k) + numerics.log_double_factorial(k - 1)
    assert lhs == pytest.approx(math.lgamma(k + 1), rel=1e-13, abs=1e-13)


def test_large_double_factorial_stays_log_scaled():
    v = numerics.double_factorial(1001)
    assert v.exact is None
    assert math.isinf(float(v))
    with pytest.raises(ValueError):
        int(v)


def test_df_ratio_matches_exact_integers():
    assert numerics.df_ratio([7, 6], [5]) == pytest.approx(105 * 48 / 15, rel=1e-14)


def test_log_scaled_arithmetic():
    a = LogScaled.from_int(12)
    b = LogScaled.from_float(-0.5)
    assert (a * LogScaled.from_int(3)).exact == 36
    assert float(a * b) == pytest.approx(-6.0)
    assert float(a / b) == pytest.approx(-24.0)
    assert float(b**3) == pytest.approx(-0.125)
    assert float(LogScaled.from_float(0.0) * a) == 0.0
    with pytest.raises(ZeroDivisionError):
        a / LogScaled.from_float(0.0)


@given(st.floats(min_value=-1e200, max_value=1e200, allow_nan=False).filter(lambda x: abs(x) > 1e-200))
def test_log_scaled_float_round_trip(x):
    assert float(LogScaled.from_float(x)) == pytest.approx(x, rel=1e-13)


@pytest.mark.parametrize("k", range(0, 21))
def test_wallis_against_scipy(k):
    ref, _ = integrate.quad(lambda t: math.sin(t) ** k, 0, math.pi, epsabs=0, epsrel=1e-13)
    assert numerics.wallis_integral(k) == pytest.approx(ref, rel=1e-12)


@given(st.integers(0, 12), st.integers(0, 12))
@settings(max_examples=60)
def test_cos_sin_halfpi_is_a_beta_function(a, b):
    expected = 0.5 * special.beta((a + 1) / 2, (b + 1) / 2)
    assert numerics.cos_sin_halfpi_integral(a, b) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("kind", numerics.KERNEL_KINDS)
@pytest.mark.parametrize("d", range(1, 9))
def test_kernel_closed_forms_match_quadrature(kind, d):
    for sigma in SIGMAS:
        f = numerics.kernel_integrand(kind, d, sigma)
        ref = numerics.integrate_adaptive(f, 0, math.pi, 1e-13).value
        scale = numerics.integrate_adaptive(lambda t: np.abs(f(t)), 0, math.pi, 1e-13).value
        assert abs(numerics.kernel_integral(kind, d, sigma) - ref) <= 1e-11 * max(abs(ref), scale)


def test_kernel_rejects_bad_sigma():
    with pytest.raises(ValueError):
        numerics.kernel_integral("plain", 2, 1.0)


def test_sphere_surface_low_dimensions():
    assert float(numerics.sphere_surface(1)) == pytest.approx(2 * math.pi)
    assert float(numerics.sphere_surface(2)) == pytest.approx(4 * math.pi)
    assert float(numerics.sphere_surface(3)) == pytest.approx(2 * math.pi**2)
    assert math.exp(numerics.log_sphere_surface(0)) == 2.0


@pytest.mark.parametrize("dim", range(1, 60))
def test_sphere_surface_from_gamma_function(dim):
    n = dim + 1
    expected = math.log(2) + 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n)
    assert numerics.log_sphere_surface(dim) == pytest.approx(expected, rel=1e-13)


def test_integrate_adaptive_handles_breakpoints():
    res = numerics.integrate_adaptive(lambda t: np.abs(t - 0.3), 0, 1, 1e-12, points=[0.3])
    assert res.value == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-13)
    assert res.error_estimate <= 1e-12


def test_integrate_adaptive_zero_integral():
    res = numerics.integrate_adaptive(lambda t: np.cos(t), 0, math.pi, 1e-12)
    assert abs(res.value) < 1e-14


def test_integrate_adaptive_refuses_impossible_tolerance():
    with pytest.raises(NumericalFailure):
        numerics.integrate_adaptive(np.sin, 0, 1, 1e-30)


def test_integrate_adaptive_budget_exhaustion_reports_estimate():
    with pytest.raises(NumericalFailure) as info:
        numerics.integrate_adaptive(lambda t: np.sin(1 / t), 1e-6, 1, 1e-13, max_evals=2000)
    assert info.value.estimate is not None


def test_gauss_legendre_exact_for_polynomials():
    x, w = numerics.gauss_legendre(8)
    for p in range(16):
        assert np.dot(w, x**p) == pytest.approx((1 + (-1) ** p) / (p + 1), abs=1e-14)


def test_sum_series_geometric_and_failure():
    s = numerics.sum_series_detailed(lambda k: 0.5**k, rel_tol=1e-13)
    assert s.value == pytest.approx(1.0, rel=1e-13)
    assert s.terms < 60
    with pytest.raises(NumericalFailure):
        numerics.sum_series(lambda k: 1.0 / k, rel_tol=1e-10, k_max=500)
    assert numerics.sum_series(lambda k: 0.0) == 0.0
    with pytest.raises(NumericalFailure):
        numerics.sum_series(lambda k: 0.5**k, rel_tol=1e-30)
