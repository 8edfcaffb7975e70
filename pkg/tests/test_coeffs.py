import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from intmeans.coeffs import (A_coefficients, SingularBasisError, a_coeff, assemble_row,
                             b_coeff, derived_A, kronecker_sum, one_term_margin, one_term_rhs,
                             printed_A12, row_basis_coefficients, row_weight)
from intmeans.specfun import DomainError, K_bound, sigma


def b_ref(N, alpha, theta):
    return float((-1) ** (N + 1) * mpmath.rf(1 - theta, N + 1)
                 / (mpmath.factorial(N + 1) * mpmath.rf(alpha - 2 * theta + N + 2, N + 1)))


def a_ref(k, N, alpha, theta):
    return float((-1) ** (N - k) / (mpmath.factorial(k) * mpmath.factorial(N - k))
                 * mpmath.rf(-theta + k + 2, N - k) / mpmath.rf(alpha - 2 * theta + N + k + 3, N - k))


# ------------------------------------------------------------ b and a

@given(st.integers(0, 6), st.floats(0.01, 8), st.floats(0.01, 1.0))
def test_b_and_a_against_definition(N, beta, theta):
    alpha = beta + 2 * theta - 1
    assert b_coeff(N, alpha, theta) == pytest.approx(b_ref(N, alpha, theta), rel=1e-12, abs=1e-300)
    for k in range(N + 1):
        assert a_coeff(k, N, alpha, theta) == pytest.approx(a_ref(k, N, alpha, theta), rel=1e-12)


def test_b0_matches_one_term_row():
    beta, theta = 0.7, 0.3
    alpha = beta + 2 * theta - 1
    assert b_coeff(0, alpha, theta) == pytest.approx(-(1 - theta) / (beta + 1), rel=1e-15)


def test_diagonal_a_is_inverse_factorial():
    for N in range(7):
        assert a_coeff(N, N, 0.4, 0.6) == pytest.approx(1 / math.factorial(N), rel=1e-15)


def test_a01_matches_two_term_row():
    beta, theta = 1.3, 0.4
    alpha = beta + 2 * theta - 1
    a01 = a_coeff(0, 1, alpha, theta)
    assert a01 == pytest.approx(-(2 - theta) / (beta + 3), rel=1e-15)
    assert a01 / (2 - theta) * (1 - theta) / 2 == pytest.approx(-(1 - theta) / (2 * (beta + 3)))


def test_coefficient_domain():
    with pytest.raises(DomainError):
        b_coeff(1, -0.5, 0.5)
    with pytest.raises(DomainError):
        a_coeff(2, 1, 1.0, 0.5)


# ------------------------------------------------------------ Kronecker identity

@given(st.floats(0.01, 6), st.floats(0.01, 1.0))
def test_kronecker_identity(beta, theta):
    alpha = beta + 2 * theta - 1
    for N in range(7):
        for n in range(N + 1):
            assert kronecker_sum(n, N, alpha, beta) == pytest.approx(float(n == N), abs=1e-12)


# ------------------------------------------------------------ one-term margin

def test_one_term_margin_negative_near_theta_one():
    for tau, beta in ((-1, 0.5), (2.0, 5.0), (0.3 + 1j, 1.0)):
        assert one_term_margin(tau, beta, 0.999) < 0


def test_one_term_margin_regression():
    assert one_term_margin(-1, 1.0, 0.5) == pytest.approx(2.716244362101688, rel=1e-10)


def test_one_term_margin_positive_near_origin():
    t, eps = 0.05, 0.05
    beta = (0.5 + eps) * t * t
    assert one_term_margin(-t, beta, 0.05) > 0
    # For t > 0 the threshold is smaller; the asymptotic regime is reached by t = 0.01.
    assert one_term_margin(0.01, (0.5 + eps) * 1e-4, 0.01) > 0


def test_one_term_margin_rejects_zero_tau():
    with pytest.raises(DomainError):
        one_term_margin(0, 1.0, 0.5)


def test_one_term_margin_has_no_nan_on_dense_grid():
    beta = np.linspace(0.01, 20, 120)
    theta = np.linspace(0.005, 1.0, 120)
    b, t = np.meshgrid(beta, theta)
    m = one_term_margin(-1.5, b, t)
    assert np.all(np.isfinite(m))


# ------------------------------------------------------------ rows

def test_row0_coefficient():
    tau, beta, theta = -1.0, 0.5, 0.3
    (c,) = row_basis_coefficients(0, tau, beta, theta)
    assert complex(c) == pytest.approx(-(1 - theta) / (beta + 1) + (1 - theta) / tau, rel=1e-14)


def test_row0_coefficient_reproduces_one_term_rhs():
    tau, beta, theta = 0.7 - 0.4j, 1.1, 0.35
    (c,) = row_basis_coefficients(0, tau, beta, theta)
    gq = (math.gamma(beta + 1 + 2 * theta) * math.gamma(beta + 2)
          / (math.gamma(beta + 1 + theta) * math.gamma(beta + 2 + theta)))
    expected = abs(complex(c)) ** 2 * (beta + 1) * (beta + 2) * gq / (1 - theta)
    assert one_term_rhs(tau, beta, theta) == pytest.approx(expected, rel=1e-12)


def test_row_weight_is_inverse_sigma():
    beta, theta = 0.8, 0.3
    for N in range(3):
        assert row_weight(N, beta, theta) * sigma(beta + 2 * theta - 1, N - theta) == \
            pytest.approx(1.0, rel=1e-13)


def test_row2_at_theta_one_has_no_b_term():
    row = assemble_row(2, -1, 0.5, 1.0)
    assert row.b == 0
    assert not row.phi_terms[0].terms


def test_row_requires_nonzero_tau():
    with pytest.raises(SingularBasisError):
        row_basis_coefficients(1, 0.0, 0.5, 0.5)


def test_row_labels():
    assert assemble_row(1, 2.0, 3.0, 0.5).basis_labels == ("g''", "(phi''/phi')^2 g")


# ------------------------------------------------------------ A coefficients

def test_real_tau_gives_real_entries():
    ac = A_coefficients(np.linspace(0.1, 1, 7), -1.0, 0.6, order=3)
    for v in (ac.a1, ac.a2, ac.a3, ac.a4, ac.a5):
        assert np.isrealobj(v)


def test_derived_matches_printed_example():
    (d1, d2), _ = derived_A(1, 0.5, -1, 0.5)
    p1, p2, _ = printed_A12(0.5, -1, 0.5)
    assert d1 == pytest.approx(p1, rel=1e-12)
    assert d2 == pytest.approx(p2, rel=1e-12)


@pytest.mark.parametrize("tau", [-20.0, -2.0, -1.0, -0.1, 0.25, 1.0, 6.0, 0.5 + 0.5j])
def test_derived_matches_printed_on_grid(tau):
    thetas = np.linspace(0.02, 1.0, 25)
    for beta in (0.05, 0.4, 1.2, 5.0, 19.0):
        (d1, d2), pos = derived_A(1, thetas, tau, beta)
        p1, p2, pos2 = printed_A12(thetas, tau, beta)
        assert np.array_equal(pos, pos2)
        ok = np.asarray(pos)
        np.testing.assert_allclose(np.asarray(d1)[ok], np.asarray(p1)[ok], rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(np.asarray(d2)[ok], np.asarray(p2)[ok], rtol=1e-12, atol=1e-14)


def test_theta_one_is_the_one_term_free_case():
    (a0,), _ = derived_A(0, 1.0, -1, 0.5)
    assert a0 == 0
    ac = A_coefficients(1.0, -1, 0.5)
    k = K_bound(0.5, 1.0)
    gq = math.gamma(0.5 + 3) * math.gamma(0.5 + 4) / (math.gamma(0.5 + 3) * math.gamma(0.5 + 4))
    bracket2 = (1 + 0.5) / 6 - 2 / 8
    assert ac.a2 == pytest.approx(bracket2 * math.sqrt(gq / k), rel=1e-13)


def test_positivity_flag_masks_values():
    ac = A_coefficients(np.array([0.01, 0.5]), -1, 3.0)
    assert list(ac.positive) == [True, False]
    assert np.isnan(ac.a1[1]) and np.isfinite(ac.a1[0])


def test_A_coefficients_domain():
    with pytest.raises(DomainError):
        A_coefficients(0.5, -1, 0.0)
    with pytest.raises(DomainError):
        A_coefficients(0.5, 0, 1.0)
    with pytest.raises(DomainError):
        A_coefficients(1.5, -1, 1.0)
    with pytest.raises(DomainError):
        A_coefficients(0.5, -1, 1.0, order=4)
