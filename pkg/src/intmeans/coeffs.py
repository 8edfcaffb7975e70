"""Numerical coefficients of the multi-term norm inequality.

Row N of the inequality is applied to g = (phi')^lambda with lambda = tau/2
and rewritten over a fixed function basis:

    N = 0: g'
    N = 1: g'', (phi''/phi')^2 g
    N = 2: g''', d/dz[(phi''/phi')^2 g], (phi''/phi')^3 g

A_1, A_2 are also available from their closed forms; the row pipeline must
reproduce them.  A_3..A_5 come from the N = 2 row only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .phiforms import (CoeffPoly, PhiForm, derivative_of_product,
                       omega_form, phi_k_form)
from .specfun import (DEFAULT_CONTROL, DomainError, K_bound, SeriesControl,
                      log_gamma, log_inverse_sigma)

BOUNDARY_TOL = 1e-12


class SingularBasisError(ArithmeticError):
    """The monomial-to-basis change of variables is singular at this lambda."""


def _poch(a, n: int):
    out = np.ones_like(np.asarray(a, dtype=float)) * 1.0
    for j in range(n):
        out = out * (a + j)
    return out


def _scalar(x, *like):
    if all(np.ndim(v) == 0 for v in like):
        return np.asarray(x).reshape(()).item()
    return x


def _check_alpha_theta(alpha, theta):
    if np.any(~(alpha - 2 * theta + 1 > 0)):
        raise DomainError("need alpha > 2 theta - 1")


def b_coeff(N: int, alpha, theta):
    """b_N = (-1)^{N+1} (1-theta)_{N+1} / ((N+1)! (alpha-2theta+N+2)_{N+1})."""
    alpha, theta = np.asarray(alpha, dtype=float), np.asarray(theta, dtype=float)
    _check_alpha_theta(alpha, theta)
    out = ((-1) ** (N + 1) * _poch(1 - theta, N + 1)
           / (math.factorial(N + 1) * _poch(alpha - 2 * theta + N + 2, N + 1)))
    return _scalar(out, alpha, theta)


def a_coeff(k: int, N: int, alpha, theta):
    """a_{k,N} = ((-1)^{N-k}/(k!(N-k)!)) (k+2-theta)_{N-k} / (alpha-2theta+N+k+3)_{N-k}."""
    if not 0 <= k <= N:
        raise DomainError("need 0 <= k <= N")
    alpha, theta = np.asarray(alpha, dtype=float), np.asarray(theta, dtype=float)
    _check_alpha_theta(alpha, theta)
    out = ((-1) ** (N - k) / (math.factorial(k) * math.factorial(N - k))
           * _poch(k + 2 - theta, N - k) / _poch(alpha - 2 * theta + N + k + 3, N - k))
    return _scalar(out, alpha, theta)


def kronecker_sum(n: int, N: int, alpha: float, beta: float) -> float:
    """Sum_k a_{k,N} n! C(k,n) (beta+n+2)_{k-n} / (alpha+2beta+2n+4)_{k-n}.

    Here a_{k,N} is written with a free parameter beta in place of -theta;
    the sum equals 1 when n = N and 0 when n < N.
    """
    total = 0.0
    for k in range(n, N + 1):
        a = ((-1) ** (N - k) / (math.factorial(k) * math.factorial(N - k))
             * _poch(beta + k + 2, N - k) / _poch(alpha + 2 * beta + N + k + 3, N - k))
        total += (a * math.factorial(n) * math.comb(k, n)
                  * _poch(beta + n + 2, k - n) / _poch(alpha + 2 * beta + 2 * n + 4, k - n))
    return float(total)


def row_weight(N: int, beta, theta):
    """1/sigma(alpha, N - theta) at alpha = beta + 2 theta - 1."""
    beta, theta = np.asarray(beta, dtype=float), np.asarray(theta, dtype=float)
    return _scalar(np.exp(log_inverse_sigma(beta + 2 * theta - 1, N - theta)), beta, theta)


def one_term_rhs(tau, beta, theta):
    """(1-theta)(beta+1)(beta+2)|1/(beta+1) - 1/tau|^2 Gamma quotient."""
    beta, theta = np.asarray(beta, dtype=float), np.asarray(theta, dtype=float)
    gq = np.exp(log_gamma(beta + 1 + 2 * theta) + log_gamma(beta + 2)
                - log_gamma(beta + 1 + theta) - log_gamma(beta + 2 + theta))
    return ((1 - theta) * (beta + 1) * (beta + 2)
            * abs(1 / (beta + 1) - 1 / complex(tau)) ** 2 * gq)


def one_term_margin(tau, beta, theta, ctl: SeriesControl | None = None):
    """Right side minus K(beta, theta); positive means the one-term criterion holds."""
    if complex(tau) == 0:
        raise DomainError("tau must be nonzero")
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(~(theta_arr > 0)) or np.any(~(theta_arr <= 1)):
        raise DomainError("theta must lie in (0, 1]")
    out = one_term_rhs(tau, beta, theta_arr) - K_bound(beta, theta_arr, ctl)
    return _scalar(out, beta, theta)


# Canonical basis per row: labels and their phi-forms (in lambda).
BASIS_LABELS = {
    0: ("g'",),
    1: ("g''", "(phi''/phi')^2 g"),
    2: ("g'''", "d[(phi''/phi')^2 g]", "(phi''/phi')^3 g"),
}


@lru_cache(maxsize=None)
def _basis_forms(N: int):
    lam = CoeffPoly.variable("λ")
    sq = PhiForm.monomial((1, 1), CoeffPoly.constant(1, "λ"))
    if N == 0:
        return (omega_form(1),)
    if N == 1:
        return omega_form(2), sq
    if N == 2:
        cube = PhiForm.monomial((1, 1, 1), CoeffPoly.constant(1, "λ"))
        return omega_form(3), derivative_of_product(sq, lam), cube
    raise DomainError("rows are available for N <= 2")


@lru_cache(maxsize=None)
def _lifted(j: int, orders: tuple) -> PhiForm:
    """Form F with d^j/dz^j [m g] = F g, coefficients in lambda."""
    lam = CoeffPoly.variable("λ")
    f = PhiForm.monomial(orders, CoeffPoly.constant(1, "λ"))
    for _ in range(j):
        f = derivative_of_product(f, lam)
    return f


def _poly_at(poly, x):
    if not isinstance(poly, CoeffPoly):
        return float(poly) + 0 * x
    out = 0.0 * x
    for e, c in poly.coefficients.items():
        out = out + float(c) * x ** e
    return out


def _monomials(N: int):
    return sorted({m for f in _basis_forms(N) for m in f.terms}, key=lambda m: (m.bidegree, m.orders))


def row_monomial_coefficients(N: int, tau, beta, theta):
    """Coefficients, per monomial of degree N+1, of row N applied to g.

    Returns (monomials, array of shape (len(monomials),) + theta.shape).
    """
    lam = complex(tau) / 2
    theta = np.asarray(theta, dtype=float)
    alpha = beta + 2 * theta - 1
    monos = _monomials(N)
    index = {m: i for i, m in enumerate(monos)}
    out = np.zeros((len(monos),) + theta.shape, dtype=complex)

    b = b_coeff(N, alpha, theta)
    for m, c in omega_form(N + 1).terms.items():
        out[index[m]] += b * _poly_at(c, lam)
    for k in range(N + 1):
        a = a_coeff(k, N, alpha, theta)
        for mono, p in phi_k_form(k).terms.items():
            weight = a * _poly_at(p, theta)
            for m, c in _lifted(N - k, mono.orders).terms.items():
                out[index[m]] += weight * _poly_at(c, lam)
    return monos, out


def basis_matrix(N: int, tau) -> np.ndarray:
    """Columns: basis functions of row N expressed over the degree N+1 monomials."""
    lam = complex(tau) / 2
    monos = _monomials(N)
    mat = np.zeros((len(monos), len(monos)), dtype=complex)
    for col, form in enumerate(_basis_forms(N)):
        for m, c in form.terms.items():
            mat[monos.index(m), col] = _poly_at(c, lam)
    return mat


def row_basis_coefficients(N: int, tau, beta, theta):
    """Raw row-N coefficients over the canonical basis, shape (N+1,) + theta.shape."""
    if complex(tau) == 0:
        raise SingularBasisError("lambda = tau/2 = 0 makes the basis singular")
    mat = basis_matrix(N, tau)
    det = np.linalg.det(mat)
    if abs(det) <= 1e-14 * max(1.0, np.abs(mat).max()) ** len(mat):
        raise SingularBasisError(f"basis system singular at tau = {tau}")
    _, rhs = row_monomial_coefficients(N, tau, beta, theta)
    flat = rhs.reshape(len(mat), -1)
    sol = np.linalg.solve(mat, flat)
    return sol.reshape(rhs.shape)


@dataclass(frozen=True)
class InequalityRow:
    """Row N of the inequality at fixed (tau, beta, theta)."""

    N: int
    weight: float
    b: float
    a: tuple
    phi_terms: tuple
    basis_labels: tuple
    basis: tuple


def assemble_row(N: int, tau, beta: float, theta: float) -> InequalityRow:
    """Row N evaluated at a single theta, with its reduction to the basis."""
    if N not in BASIS_LABELS:
        raise DomainError("rows are available for N <= 2")
    if not beta > 0 or not 0 < theta <= 1:
        raise DomainError("need beta > 0 and 0 < theta <= 1")
    alpha = beta + 2 * theta - 1
    coeffs = row_basis_coefficients(N, tau, beta, np.array(theta))
    return InequalityRow(
        N=N,
        weight=row_weight(N, beta, theta),
        b=b_coeff(N, alpha, theta),
        a=tuple(a_coeff(k, N, alpha, theta) for k in range(N + 1)),
        phi_terms=tuple(phi_k_form(k).substitute(float(theta)) for k in range(N + 1)),
        basis_labels=BASIS_LABELS[N],
        basis=tuple(complex(c) for c in coeffs),
    )


@dataclass(frozen=True)
class ACoefficients:
    """A_1..A_5 at one theta or on a theta array.

    Entries are NaN where the positivity condition K > P fails.
    """

    theta: object
    a1: object
    a2: object
    a3: Optional[object] = None
    a4: Optional[object] = None
    a5: Optional[object] = None
    positive: object = True


def _realify(x, tau):
    return np.real(x) if complex(tau).imag == 0 else x


def _denominator(tau, beta, theta, ctl):
    return K_bound(beta, theta, ctl) - one_term_rhs(tau, beta, theta)


def printed_A12(theta, tau, beta, ctl: SeriesControl | None = None):
    """A_1, A_2 from their closed forms, and the positivity mask."""
    theta = np.asarray(theta, dtype=float)
    tau = complex(tau)
    denom = _denominator(tau, beta, theta, ctl)
    positive = denom > 0
    gq = (2 - theta) * np.exp(log_gamma(beta + 2 * theta + 1) + log_gamma(beta + 4)
                              - log_gamma(beta + theta + 2) - log_gamma(beta + theta + 3))
    scale = np.sqrt(gq) / np.sqrt(np.where(positive, denom, np.nan))
    bracket1 = ((1 - theta) / (2 * (beta + 2) * (beta + 3))
                - (1 - theta) / (tau * (beta + 3)) + 1 / (3 * tau))
    bracket2 = (1 - tau / 2) / 6 - (theta + 1) / 8
    return _realify(bracket1 * scale, tau), _realify(bracket2 * scale, tau), positive


_ROW_SCALE = {0: lambda b: (b + 1) * (b + 2), 1: lambda b: 1.0, 2: lambda b: (b + 5) * (b + 6)}


def derived_A(N: int, theta, tau, beta, ctl: SeriesControl | None = None):
    """Row-N basis coefficients scaled as they enter the criteria.

    N = 1 gives (A_1, A_2), N = 2 gives (A_3, A_4, A_5).  N = 0 gives the
    square root of the one-term quantity over K - P.
    """
    theta = np.asarray(theta, dtype=float)
    denom = _denominator(tau, beta, theta, ctl)
    positive = denom > 0
    raw = row_basis_coefficients(N, tau, beta, theta)
    # Row 0 at theta = 1: the weight diverges while P vanishes; the product is 0.
    degenerate = (N == 0) & (theta >= 1)
    th = np.where(degenerate, 0.5, theta)
    scale = np.sqrt(row_weight(N, beta, th) * _ROW_SCALE[N](beta)
                    / np.where(positive, denom, np.nan))
    scale = np.where(degenerate & positive, 0.0, scale)
    return tuple(_realify(c * scale, tau) for c in raw), positive


def A_coefficients(theta, tau, beta: float, order: int = 2,
                   ctl: SeriesControl | None = None) -> ACoefficients:
    """A-coefficients at theta (scalar or array) for the two- or three-term criteria."""
    if order not in (2, 3):
        raise DomainError("order must be 2 or 3")
    if not beta > 0:
        raise DomainError("beta must be positive")
    if complex(tau) == 0:
        raise DomainError("tau must be nonzero")
    th = np.asarray(theta, dtype=float)
    if np.any(~(th > 0)) or np.any(~(th <= 1)):
        raise DomainError("theta must lie in (0, 1]")
    ctl = ctl or DEFAULT_CONTROL
    a1, a2, positive = printed_A12(th, tau, beta, ctl)
    extra = (None, None, None)
    if order == 3:
        extra, _ = derived_A(2, th, tau, beta, ctl)
    pack = [_scalar(v, theta) if v is not None else None for v in (a1, a2, *extra)]
    return ACoefficients(theta, *pack, positive=_scalar(positive, theta))
