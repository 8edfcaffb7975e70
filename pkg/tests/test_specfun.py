import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from intmeans.specfun import (DEFAULT_CONTROL, DomainError, K_bound, PoleError,
                              SeriesControl, SeriesDivergenceError, gamma_kernel,
                              gamma_ratio, hyp2f1_at_1, hyp2f1_series, hyp2f1_series_at_1,
                              kappa, log_gamma, pochhammer, ratio_sum, sigma)


# ------------------------------------------------------------ log-Gamma

def test_log_gamma_at_one_is_zero():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)


def test_log_gamma_against_mpmath():
    xs = np.concatenate([np.linspace(0.1, 3, 97), np.linspace(3, 200, 211)])
    ours = log_gamma(xs)
    for x, v in zip(xs, ours):
        ref = float(mpmath.loggamma(mpmath.mpf(x)))
        assert abs(v - ref) <= 1e-13 * max(1.0, abs(ref)), x


def test_log_gamma_rejects_nonpositive():
    with pytest.raises(DomainError):
        log_gamma(0.0)
    with pytest.raises(DomainError):
        gamma_kernel(np.array([1.0, -2.5]))


def test_gamma_ratio_matches_mpmath():
    r = gamma_ratio([3.5, 7.25], [2.0, 4.5])
    ref = mpmath.gamma(3.5) * mpmath.gamma(7.25) / (mpmath.gamma(2) * mpmath.gamma(4.5))
    assert r == pytest.approx(float(ref), rel=1e-13)


def test_gamma_ratio_overflow_is_reported():
    with pytest.raises(OverflowError):
        gamma_ratio([400.0], [1.0])


# ------------------------------------------------------------ Pochhammer

def test_pochhammer_examples():
    assert pochhammer(3.7, 0) == 1.0
    assert pochhammer(1, 4) == 24
    assert pochhammer(-0.5, 2) == pytest.approx(-0.25, abs=1e-16)


@given(st.floats(-20, 20), st.integers(0, 150))
def test_pochhammer_against_mpmath(a, n):
    ref = mpmath.rf(mpmath.mpf(a), n)
    if abs(ref) > 1e300:
        return
    v = pochhammer(a, n)
    assert abs(v - float(ref)) <= 1e-11 * abs(float(ref)) + 1e-300


def test_pochhammer_hits_zero_for_nonpositive_integer_base():
    assert pochhammer(-3.0, 100) == 0.0


def test_pochhammer_overflow():
    with pytest.raises(OverflowError):
        pochhammer(10.0, 400)


def test_pochhammer_rejects_negative_n():
    with pytest.raises(DomainError):
        pochhammer(1.0, -1)


# ------------------------------------------------------------ series control

def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(rel_tol=0)
    with pytest.raises(ValueError):
        SeriesControl(abs_tol=-1)
    with pytest.raises(ValueError):
        SeriesControl(max_terms=0)


def test_series_reports_nonconvergence_instead_of_truncating():
    with pytest.raises(SeriesDivergenceError):
        ratio_sum([0.5, 0.5], [1.0, 1.0])
    # Convergent but too slow for the allowed number of terms.
    with pytest.raises(SeriesDivergenceError):
        ratio_sum([0.5, 30.0], [1.0, 30.6], SeriesControl(max_terms=40))


@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(1.2, 6))
def test_ratio_sum_error_bound_covers_true_value(a, b, excess):
    c = a + b + excess
    s = ratio_sum([a, b], [c, 1.0])
    exact = float(mpmath.hyp2f1(a, b, c, 1))
    assert abs(s.value - exact) <= max(s.error, 1e-14 * abs(exact)) * 10 + 1e-14


# ------------------------------------------------------------ 2F1

def test_hyp2f1_trivial_a_zero():
    assert hyp2f1_at_1(0.0, 0.7, 2.1) == pytest.approx(1.0, abs=1e-15)


def test_hyp2f1_half_is_two_over_pi():
    assert hyp2f1_at_1(0.5, -0.5, 1.0) == pytest.approx(2 / math.pi, rel=1e-14)


def test_hyp2f1_closed_form_vs_series():
    assert hyp2f1_at_1(0.3, 0.2, 2.0) == pytest.approx(
        hyp2f1_series_at_1(0.3, 0.2, 2.0).value, rel=1e-10)


def test_hyp2f1_errors():
    with pytest.raises(SeriesDivergenceError):
        hyp2f1_at_1(0.5, 0.6, 1.0)
    with pytest.raises(PoleError):
        hyp2f1_at_1(0.5, 0.6, -2.0)


@given(st.floats(-2, 3), st.floats(-2, 3), st.floats(0.1, 4))
def test_hyp2f1_closed_form_matches_partial_sums(a, b, excess):
    c = a + b + 1.05 + excess
    if c <= 0 and c == round(c):
        return
    closed = hyp2f1_at_1(a, b, c)
    series = hyp2f1_series_at_1(a, b, c)
    assert abs(closed - series.value) <= 1e-10 * max(1.0, abs(closed))


@pytest.mark.parametrize("theta", [0.05, 0.3, 0.5, 0.9])
def test_hyp2f1_gamma_quotient_value_closed_vs_series(theta):
    closed = hyp2f1_at_1(1 - theta, -theta, 1.0)
    series = hyp2f1_series_at_1(1 - theta, -theta, 1.0)
    assert closed == pytest.approx(series.value, abs=1e-10)
    ref = math.gamma(2 * theta + 1) / (2 * math.gamma(theta + 1) ** 2)
    assert closed == pytest.approx(ref, rel=1e-13)


@given(st.floats(0.01, 1.0))
def test_hyp2f1_theta_family_nonincreasing_in_x(theta):
    xs = np.linspace(0, 0.999, 41)
    vals = [hyp2f1_series(1 - theta, -theta, 1.0, x) for x in xs]
    assert all(b <= a + 1e-13 for a, b in zip(vals, vals[1:]))


def test_hyp2f1_series_inside_disk_against_mpmath():
    for a, b, c, x in ((0.75, -0.25, 1, 0.09), (1.5, 2.5, 3.2, -0.7), (0.3, 0.2, 2.0, 0.95)):
        assert hyp2f1_series(a, b, c, x) == pytest.approx(float(mpmath.hyp2f1(a, b, c, x)),
                                                          rel=1e-11)


# ------------------------------------------------------------ sigma

@given(st.floats(-0.99, 20))
def test_sigma_beta_zero_is_one(alpha):
    assert sigma(alpha, 0.0) == pytest.approx(1.0, rel=1e-13)


def test_sigma_examples():
    assert sigma(0.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(DomainError):
        sigma(-1.0, 0.5)
    with pytest.raises(DomainError):
        sigma(0.5, -1.0)


def test_sigma_against_mpmath_formula():
    for a, b in ((0.5, 0.25), (3.0, -0.5), (19.0, 7.5)):
        inv = (mpmath.gamma(a + 2) * mpmath.gamma(a + 2 * b + 3)
               / ((1 + b) * mpmath.gamma(a + b + 2) * mpmath.gamma(a + b + 3)))
        assert sigma(a, b) == pytest.approx(float(1 / inv), rel=1e-13)


@given(st.floats(-0.9, 10), st.floats(-0.9, 10), st.integers(0, 6))
def test_sigma_shift_ratio_identity(alpha, beta, n):
    lhs = sigma(alpha, beta + n) / sigma(alpha, beta)
    rhs = ((n + 1 + beta) / (1 + beta) * pochhammer(alpha + beta + 2, n)
           * pochhammer(alpha + beta + 3, n) / pochhammer(alpha + 2 * beta + 3, 2 * n))
    assert lhs == pytest.approx(rhs, rel=1e-11)


# ------------------------------------------------------------ kappa and K

def _kappa_mpmath(alpha, theta):
    a, t = mpmath.mpf(alpha), mpmath.mpf(theta)
    pre = ((1 - t) * mpmath.gamma(a + 2) * mpmath.gamma(a + 2 - 2 * t)
           / (mpmath.gamma(a + 2 - t) * mpmath.gamma(a + 3 - t)))

    def term(n):
        return ((a + 3 - 2 * t + 2 * n) * mpmath.rf(1 - t, n) * mpmath.rf(2 - t, n)
                * mpmath.rf(a + 2 - 2 * t, n) ** 2
                / (mpmath.rf(a + 2 - t, n) * mpmath.rf(a + 3 - t, n) * mpmath.factorial(n + 1) ** 2))
    return float(pre * mpmath.nsum(term, [0, mpmath.inf], method="e"))


def test_kappa_vanishes_at_theta_one():
    assert kappa(1.3, 1.0) == 0.0
    assert kappa(5.0, 1.0, method="hyp4f3") == 0.0


def test_kappa_series_vs_hyp4f3_example():
    assert kappa(1.0, 0.5) == pytest.approx(kappa(1.0, 0.5, method="hyp4f3"), rel=1e-10)


def test_kappa_positive_example():
    assert kappa(2.0, 0.25) > 0


@pytest.mark.parametrize("alpha,theta", [(1.0, 0.5), (0.5, 0.25), (4.0, 0.75), (2.0, 0.25)])
def test_kappa_against_mpmath(alpha, theta):
    assert kappa(alpha, theta) == pytest.approx(_kappa_mpmath(alpha, theta), rel=1e-7)


def test_kappa_domain():
    with pytest.raises(DomainError):
        kappa(0.0, 0.5)
    with pytest.raises(DomainError):
        kappa(1.0, 0.0)
    with pytest.raises(ValueError):
        kappa(1.0, 0.5, method="other")


def test_kappa_two_methods_agree_on_grid():
    alphas = np.array([0.1, 0.5, 1, 2, 4, 8])
    thetas = np.array([0.05, 0.1, 0.25, 0.5, 0.75, 1.0])
    a, t = np.meshgrid(alphas, thetas)
    ok = a - 2 * t + 1 > 0
    s = kappa(a[ok], t[ok])
    h = kappa(a[ok], t[ok], method="hyp4f3")
    assert np.all(np.abs(s - h) <= 1e-10 * np.maximum(1, np.abs(s)))
    assert np.all(s >= 0)


def test_K_bound_examples():
    assert K_bound(1.0, 1.0) == pytest.approx(3.0, rel=1e-14)
    for beta in (0.1, 0.7, 4.0, 19.0):
        assert K_bound(beta, 1.0) == pytest.approx((beta + 2) / beta, rel=1e-13)


def test_K_bound_stable_under_tighter_control():
    a = K_bound(0.5, 0.5)
    b = K_bound(0.5, 0.5, SeriesControl(rel_tol=DEFAULT_CONTROL.rel_tol / 2))
    assert 0 < a < math.inf
    assert abs(a - b) <= 1e-9


def test_K_bound_domain():
    with pytest.raises(DomainError):
        K_bound(0.0, 0.5)
    with pytest.raises(DomainError):
        K_bound(1.0, 1.5)


@given(st.floats(0.01, 20), st.floats(0.01, 1.0))
def test_K_bound_positive_and_continuous(beta, theta):
    k = K_bound(beta, theta)
    assert k > 0
    k2 = K_bound(beta * (1 + 1e-7), theta)
    assert abs(k2 - k) <= 1e-4 * k
