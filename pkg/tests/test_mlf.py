import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erfcx, gamma

from fracback.exceptions import DomainError
from fracback.mlf import (
    MlParams,
    check_complete_monotone,
    check_log_convex,
    ml_eval,
    ml_inverse_bound_c1,
    ml_time_deriv,
    ml_values,
)

mpmath.mp.dps = 50


def mp_series(alpha, beta, x, terms=1000):
    """High-precision power series oracle."""
    x = mpmath.mpf(x)
    a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
    return float(mpmath.fsum(x**k / mpmath.gamma(a * k + b) for k in range(terms)))


def E(alpha, x, beta=1.0, **kw):
    return ml_eval(MlParams(alpha, beta), x, **kw).value


# --- point values ----------------------------------------------------------


def test_exp_value():
    assert E(1.0, -1.0) == pytest.approx(math.exp(-1), rel=1e-15)


def test_constant_terms():
    assert E(0.5, 0.0) == 1.0
    assert E(0.7, 0.0, beta=2.0) == pytest.approx(1.0, abs=1e-15)


def test_half_order_erfc():
    assert E(0.5, -1.0) == pytest.approx(float(erfcx(1.0)), rel=1e-13)
    assert E(0.5, -1.0) == pytest.approx(0.4275835761558070, rel=1e-13)


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("alpha,beta", [(0.3, 1.0), (0.5, 1.0), (0.7, 0.7), (0.9, 1.5), (0.5, 2.0)])
def test_against_series_oracle(alpha, beta, x):
    ref = mp_series(alpha, beta, -x)
    assert E(alpha, -x, beta) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize(
    "alpha,x", [(0.2, 2.5), (0.2, 3.0), (0.5, 7.0), (0.5, 15.0), (0.8, 20.0), (0.8, 60.0), (0.8, 90.0)]
)
def test_large_arguments_against_mpmath(alpha, x):
    n = x ** (1 / alpha)
    with mpmath.workdps(int(n / 2) + 40):
        ref = mp_series(alpha, 1.0, -x, terms=int(3 * n / alpha) + 200)
    assert E(alpha, -x) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("gap", [1e-4, 1e-8, 1e-12, 2**-53])
@pytest.mark.parametrize("beta", [1.0, 0.5])
@pytest.mark.parametrize("x", [6.0, 13.0, 20.0])
def test_order_near_one(gap, beta, x):
    # the integrand peak narrows like 1 - alpha; values must still match the series
    alpha = 1.0 - gap
    with mpmath.workdps(60):
        ref = mp_series(alpha, beta, -x, terms=400)
    assert E(alpha, -x, beta) == pytest.approx(ref, abs=1e-13)


def test_asymptotic_tail_matches_leading_term():
    alpha, x = 0.6, 1e4
    assert E(alpha, -x) == pytest.approx(1 / (x * gamma(1 - alpha)), rel=1e-3)


def test_regimes_reported():
    assert ml_eval(MlParams(1.0), -3.0).regime == "closed_form"
    assert ml_eval(MlParams(0.5), -0.5).regime == "series"
    assert ml_eval(MlParams(0.5), -100.0).regime == "asymptotic"
    assert ml_eval(MlParams(0.3), -10.0).regime == "integral"


def test_error_estimate_small():
    for x in (0.0, -1.0, -7.0, -30.0, -70.0, -1e4):
        assert ml_eval(MlParams(0.4), x).est_abs_error <= 1e-12


# --- errors ----------------------------------------------------------------


@pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (1.2, 1.0), (-0.5, 1.0), (0.5, 0.0), (0.5, -1.0)])
def test_bad_parameters(alpha, beta):
    with pytest.raises(DomainError):
        MlParams(alpha, beta)


def test_positive_argument_rejected():
    with pytest.raises(DomainError):
        ml_eval(MlParams(0.5), 1.0)


def test_positive_argument_opt_in():
    assert E(0.5, 2.0, allow_positive=True) == pytest.approx(mp_series(0.5, 1.0, 2.0), rel=1e-12)
    with pytest.raises(DomainError):
        ml_eval(MlParams(0.5), 51.0, allow_positive=True)


def test_alpha_one_any_sign():
    assert E(1.0, 2.0) == pytest.approx(math.exp(2.0))


# --- derivative ------------------------------------------------------------


def test_time_deriv_values():
    assert ml_time_deriv(1.0, 2.0, 0.5) == pytest.approx(-2 * math.exp(-1), rel=1e-14)
    assert ml_time_deriv(0.5, 0.0, 1.0) == 0.0


def test_time_deriv_finite_difference():
    h = 1e-6
    fd = (E(0.7, -((1 + h) ** 0.7)) - E(0.7, -((1 - h) ** 0.7))) / (2 * h)
    assert ml_time_deriv(0.7, 1.0, 1.0) == pytest.approx(fd, rel=1e-6)


def test_time_deriv_domain():
    with pytest.raises(DomainError):
        ml_time_deriv(0.5, 1.0, 0.0)


@given(
    alpha=st.floats(0.2, 0.95),
    lam=st.floats(0.1, 20.0),
    t=st.floats(0.05, 3.0),
)
def test_time_deriv_property(alpha, lam, t):
    h = 1e-5 * t
    f = lambda s: E(alpha, -lam * s**alpha)
    fd = (f(t + h) - f(t - h)) / (2 * h)
    d = ml_time_deriv(alpha, lam, t)
    assert d <= 0
    assert d == pytest.approx(fd, rel=1e-5, abs=1e-9)


# --- invariants ------------------------------------------------------------


def test_exp_agreement_dense():
    x = np.linspace(-700, 0, 701)
    v = ml_values(1.0, 1.0, x)
    assert np.all(np.abs(v - np.exp(x)) <= 1e-12 * (1 + np.exp(x)))


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 0.9])
def test_bounded_and_monotone_on_negative_axis(alpha):
    x = -np.geomspace(1e-3, 1e3, 200)[::-1]
    v = ml_values(alpha, 1.0, x)
    assert np.all(v > 0) and np.all(v <= 1)
    assert np.all(np.diff(v) >= -1e-14)


@given(
    alpha=st.floats(0.1, 1.0),
    beta=st.floats(0.2, 2.0),
    x=st.floats(-80.0, 0.0),
)
def test_recurrence(alpha, beta, x):
    lhs = E(alpha, x, beta)
    rhs = x * E(alpha, x, alpha + beta) + 1 / gamma(beta)
    assert lhs == pytest.approx(rhs, abs=1e-10)


@given(alpha=st.floats(0.1, 0.99), beta=st.floats(0.1, 1.0), x=st.floats(-1e4, 0.0))
def test_range_for_beta_at_least_alpha(alpha, beta, x):
    if beta < alpha:
        beta = alpha
    v = E(alpha, x, beta)
    assert 0 < v <= 1 / gamma(beta) + 1e-15


# --- inverse bound ---------------------------------------------------------


def test_c1_dense_recheck():
    c1 = ml_inverse_bound_c1(0.5, 1.0, 1.0)
    assert c1 >= 1 / (2 * E(0.5, -1.0))
    z = np.geomspace(1.0, 1e6, 10_000)
    e = ml_values(0.5, 1.0, -z)
    assert np.all(1 / e <= c1 * (1 + z))


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_c1_tail_limit(alpha):
    z = 1e6
    ratio = 1 / (E(alpha, -z) * (1 + z))
    assert ratio == pytest.approx(gamma(1 - alpha), rel=0.05)


def test_c1_tail_dominated():
    assert ml_inverse_bound_c1(0.5, 1.0, 1e8) == pytest.approx(math.sqrt(math.pi), rel=0.011)


@pytest.mark.parametrize("args", [(1.0, 1.0, 1.0), (0.0, 1.0, 1.0), (0.5, 0.0, 1.0), (0.5, 1.0, 0.0)])
def test_c1_domain(args):
    with pytest.raises(DomainError):
        ml_inverse_bound_c1(*args)


# --- shape checks ----------------------------------------------------------


GRID = np.linspace(0.1, 5.0, 50)


def test_cm_exponential():
    assert check_complete_monotone(lambda t: np.exp(-t), GRID, 4).passed


def test_cm_mittag_leffler():
    f = lambda t: ml_values(0.5, 1.0, -np.sqrt(t))
    assert check_complete_monotone(f, GRID, 4).passed


def test_cm_oscillating_fails():
    rep = check_complete_monotone(lambda t: np.sin(t) + 2, GRID, 2)
    assert not rep.passed
    assert len(rep.orders) == 3


def test_cm_short_grid():
    with pytest.raises(DomainError):
        check_complete_monotone(np.exp, [0.1, 0.2, 0.3], 4)


def test_log_convex_examples():
    t = np.linspace(0.0, 2.0, 41)
    assert check_log_convex(np.column_stack([t, np.exp(t**2)])).passed
    assert check_log_convex(np.column_stack([t, ml_values(0.7, 1.0, -(t**0.7))])).passed
    assert not check_log_convex(np.column_stack([t, np.exp(-(t**2))])).passed


def test_log_convex_nonpositive():
    with pytest.raises(DomainError):
        check_log_convex([(0, 1.0), (1, 0.0), (2, 1.0)])


@pytest.mark.parametrize("alpha,beta", [(0.3, 0.5), (0.5, 0.5), (0.5, 1.0), (0.7, 0.9)])
@pytest.mark.parametrize("lam", [0.0, 1.0, 10.0])
def test_second_family_log_convex(alpha, beta, lam):
    t = np.linspace(5 / 64, 5.0, 64)
    f = t ** (beta - 1) * ml_values(alpha, beta, -lam * t**alpha)
    assert check_log_convex(np.column_stack([t, f])).passed
