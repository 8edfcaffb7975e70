"""Special-function constants used by the spectrum bounds.

Log-Gamma is evaluated by an in-repo Lanczos approximation.  Hypergeometric
sums at unit argument are summed directly up to a cut-off and the remainder is
added from the Bernoulli-polynomial expansion of the term ratio, which turns
the tail into a short combination of Hurwitz zeta values.  All routines accept
numpy arrays and broadcast over their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import bernoulli, zeta

# Lanczos coefficients for g = 671/128, fifteen terms.
_LANCZOS_G = 5.24218750000000000
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COEF = np.array([
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
])
_SQRT_2PI = 2.5066282746310005
_LOG_MAX = 709.0

# Orders kept in the asymptotic tail expansion.
_TAIL_ORDER = 14
_BERNOULLI = bernoulli(_TAIL_ORDER + 2)


class DomainError(ValueError):
    """An argument lies outside the domain of a special function."""


class PoleError(DomainError):
    """A lower hypergeometric parameter is a nonpositive integer."""


class SeriesDivergenceError(ArithmeticError):
    """A series diverges or did not reach its tolerance within max_terms."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every infinite series.

    Args:
        rel_tol: target truncation error relative to the sum.
        abs_tol: absolute floor for the truncation error.
        max_terms: largest number of directly summed terms.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_terms: int = 100000

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise ValueError("tolerances must be positive")
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be at least 1")

    def accepts(self, error, total):
        return np.abs(error) <= np.maximum(self.rel_tol * np.abs(total), self.abs_tol)


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class SeriesSum:
    """A summed series with its estimated truncation error."""

    value: np.ndarray
    error: np.ndarray
    terms: int


def _scalar_out(x, like):
    if np.ndim(like) == 0:
        return float(np.asarray(x).reshape(()))
    return x


def log_gamma(x):
    """log Gamma(x) for x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("log_gamma requires x > 0")
    y = xa[..., None] + np.arange(1, len(_LANCZOS_COEF) + 1)
    ser = _LANCZOS_C0 + np.sum(_LANCZOS_COEF / y, axis=-1)
    tmp = xa + _LANCZOS_G
    out = (xa + 0.5) * np.log(tmp) - tmp + np.log(_SQRT_2PI * ser / xa)
    return _scalar_out(out, x)


gamma_kernel = log_gamma


def _log_abs_gamma(x):
    """(log|Gamma(x)|, sign Gamma(x)) for any real x that is not a pole."""
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) & (x == np.round(x))):
        raise PoleError("Gamma has a pole at nonpositive integers")
    pos = x > 0
    logv = np.empty_like(x)
    sign = np.ones_like(x)
    if np.any(pos):
        logv[pos] = log_gamma(x[pos])
    neg = ~pos
    if np.any(neg):
        xn = x[neg]
        s = np.sin(np.pi * xn)
        logv[neg] = math.log(math.pi) - np.log(np.abs(s)) - log_gamma(1.0 - xn)
        sign[neg] = np.sign(s)
    return logv, sign


def _rgamma(x):
    """1/Gamma(x), zero at the poles."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    regular = ~((x <= 0) & (x == np.round(x)))
    if np.any(regular):
        logv, sign = _log_abs_gamma(x[regular])
        out[regular] = sign * np.exp(-logv)
    return out


@dataclass(frozen=True)
class GammaRatio:
    """Product of Gamma values over a product of Gamma values.

    Evaluated in log space and exponentiated once.
    """

    numerator_args: Sequence[float]
    denominator_args: Sequence[float]

    def log(self):
        total = 0.0
        for a in self.numerator_args:
            total = total + log_gamma(a)
        for b in self.denominator_args:
            total = total - log_gamma(b)
        return total

    def value(self):
        return _exp_checked(self.log())


def gamma_ratio(numerator_args, denominator_args):
    return GammaRatio(numerator_args, denominator_args).value()


def _exp_checked(logv):
    if np.any(np.asarray(logv) > _LOG_MAX):
        raise OverflowError("Gamma quotient exceeds the double range")
    return np.exp(logv)


_POCHHAMMER_DIRECT = 64


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n = a(a+1)...(a+n-1)."""
    n = int(n)
    if n < 0:
        raise DomainError("pochhammer requires n >= 0")
    if n == 0:
        return 1.0
    if n < _POCHHAMMER_DIRECT:
        out = 1.0
        for j in range(n):
            out *= a + j
        if not math.isfinite(out):
            raise OverflowError("pochhammer overflow")
        return out
    # Peel off the factors with nonpositive base, then use a Gamma ratio.
    out = 1.0
    j = 0
    while j < n and a + j <= 0:
        out *= a + j
        j += 1
    if out == 0.0 or j == n:
        return out
    b = a + j
    logv = log_gamma(b + (n - j)) - log_gamma(b)
    mag = math.log(abs(out)) + logv if out != 0 else -math.inf
    if mag > _LOG_MAX:
        raise OverflowError("pochhammer overflow")
    return out * math.exp(logv)


def _bernoulli_poly(n, x):
    """Bernoulli polynomial B_n(x), vectorised in x."""
    out = np.zeros_like(x)
    for k in range(n + 1):
        out = out + math.comb(n, k) * _BERNOULLI[k] * x ** (n - k)
    return out


def ratio_sum(upper, lower, ctl: SeriesControl | None = None) -> SeriesSum:
    """Sum over N >= 0 of prod (a_i)_N / prod (b_j)_N.

    Args:
        upper: p parameter arrays (broadcast together).
        lower: p parameter arrays, same count as upper.
        ctl: truncation policy.

    Returns:
        SeriesSum with value, error estimate and the number of direct terms.

    The series converges iff sum(lower) - sum(upper) > 1.  Terms beyond the
    direct cut-off M are replaced by the expansion
    T_N = T_M (M/N)^s exp(E(N) - E(M)), with E the Bernoulli series of the
    Gamma-ratio logarithm, summed through Hurwitz zeta values.
    """
    ctl = ctl or DEFAULT_CONTROL
    if len(upper) != len(lower):
        raise ValueError("upper and lower parameter lists must have equal length")
    arrays = np.broadcast_arrays(*[np.asarray(p, dtype=float) for p in (*upper, *lower)])
    shape = arrays[0].shape
    p = len(upper)
    a = np.stack([x.ravel() for x in arrays[:p]]) if p else np.zeros((0, 1))
    b = np.stack([x.ravel() for x in arrays[p:]]) if p else np.zeros((0, 1))
    if np.any((b <= 0) & (b == np.round(b))):
        raise PoleError("lower parameter is a nonpositive integer")
    s = b.sum(axis=0) - a.sum(axis=0)
    terminating = np.any((a <= 0) & (a == np.round(a)), axis=0)
    if np.any(~terminating & ~(s > 1)):
        raise SeriesDivergenceError("series at unit argument diverges (excess <= 1)")

    scale = np.max(np.abs(np.concatenate([a, b])), axis=0) if p else np.zeros(1)
    m = int(max(32, 16 * float(np.max(scale, initial=0.0)) + 32))
    while True:
        if m > ctl.max_terms:
            raise SeriesDivergenceError(
                f"tolerance not reached within max_terms={ctl.max_terms}")
        value, error = _ratio_sum_at(a, b, s, terminating, m)
        if np.all(ctl.accepts(error, value)):
            break
        m *= 2
    return SeriesSum(value.reshape(shape), error.reshape(shape), m)


def _ratio_sum_at(a, b, s, terminating, m):
    n = np.arange(m)
    num = np.prod(a[:, :, None] + n, axis=0)
    den = np.prod(b[:, :, None] + n, axis=0)
    terms = np.cumprod(np.concatenate([np.ones((a.shape[1], 1)), num / den], axis=1), axis=1)
    head = np.sum(terms[:, :m], axis=1)
    t_m = terms[:, m]

    # e_k: coefficients of N^-k in log prod Gamma(N+a)/Gamma(N+b) + s log N.
    order = _TAIL_ORDER
    e = np.zeros((order + 1, a.shape[1]))
    for k in range(1, order + 1):
        diff = _bernoulli_poly(k + 1, a).sum(axis=0) - _bernoulli_poly(k + 1, b).sum(axis=0)
        e[k] = (-1) ** (k + 1) * diff / (k * (k + 1))
    d = np.zeros_like(e)
    d[0] = 1.0
    for j in range(1, order + 1):
        d[j] = sum(k * e[k] * d[j - k] for k in range(1, j + 1)) / j

    live = ~terminating & (t_m != 0)
    tail = np.zeros_like(head)
    err = np.zeros_like(head)
    if np.any(live):
        sl = s[live]
        inv_m = 1.0 / m
        e_at_m = sum(e[k][live] * inv_m ** k for k in range(1, order + 1))
        norm = t_m[live] * np.exp(sl * math.log(m) - e_at_m)
        parts = np.array([d[k][live] * zeta(sl + k, m) for k in range(order + 1)])
        tail[live] = norm * parts.sum(axis=0)
        err[live] = np.abs(norm) * (np.abs(parts[-1]) + np.abs(parts[-2]))
    total = head + tail
    err = err + 4 * np.finfo(float).eps * np.sum(np.abs(terms), axis=1)
    return total, err


def hyper_sum_at_1(upper, lower, ctl: SeriesControl | None = None) -> SeriesSum:
    """Generalized hypergeometric pFq at unit argument, p = q + 1, by summation."""
    if len(upper) != len(lower) + 1:
        raise ValueError("need p = q + 1 parameters at unit argument")
    return ratio_sum(upper, [*lower, 1.0], ctl)


def hyp2f1_at_1(a, b, c, ctl: SeriesControl | None = None):
    """2F1(a, b; c; 1) by the Gamma-function closed form."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    if np.any((c <= 0) & (c == np.round(c))):
        raise PoleError("c is a nonpositive integer")
    if np.any(~(c - a - b > 0)):
        raise SeriesDivergenceError("2F1 at 1 diverges unless c - a - b > 0")
    lc, sc = _log_abs_gamma(np.atleast_1d(c))
    lcab, scab = _log_abs_gamma(np.atleast_1d(c - a - b))
    out = sc * scab * np.exp(lc + lcab) * _rgamma(c - a) * _rgamma(c - b)
    return _scalar_out(out.reshape(np.broadcast(a, b, c).shape), np.broadcast(a, b, c))


def hyp2f1_series_at_1(a, b, c, ctl: SeriesControl | None = None) -> SeriesSum:
    """2F1(a, b; c; 1) by summing its defining series."""
    return hyper_sum_at_1([a, b], [c], ctl)


def hyp2f1_series(a: float, b: float, c: float, x: float,
                  ctl: SeriesControl | None = None) -> float:
    """2F1(a, b; c; x) for real |x| < 1 by its defining series."""
    ctl = ctl or DEFAULT_CONTROL
    if c <= 0 and c == round(c):
        raise PoleError("c is a nonpositive integer")
    if not abs(x) < 1:
        raise DomainError("need |x| < 1")
    total, term = 1.0, 1.0
    for n in range(ctl.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        if term == 0:
            return total
        # Ratio of successive terms tends to x; bound the tail geometrically.
        ratio = abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2)) * x)
        if ratio < 1 and n > abs(a) + abs(b) + abs(c):
            tail = abs(term) * ratio / (1 - max(ratio, abs(x)))
            if ctl.accepts(tail, total):
                return total
    raise SeriesDivergenceError(f"tolerance not reached within max_terms={ctl.max_terms}")


def sigma(alpha, beta):
    """The diagonal constant sigma(alpha, beta).

    1/sigma = Gamma(a+2) Gamma(a+2b+3) / ((1+b) Gamma(a+b+2) Gamma(a+b+3)).
    """
    al = np.asarray(alpha, dtype=float)
    be = np.asarray(beta, dtype=float)
    if np.any(~(al > -1)) or np.any(~(be > -1)):
        raise DomainError("sigma requires alpha > -1 and beta > -1")
    out = np.exp(log_inverse_sigma(al, be) * -1.0)
    return _scalar_out(out, np.broadcast(al, be))


def log_inverse_sigma(alpha, beta):
    """log(1/sigma(alpha, beta)) without domain checks."""
    return (log_gamma(alpha + 2) + log_gamma(alpha + 2 * beta + 3)
            - log_gamma(alpha + beta + 2) - log_gamma(alpha + beta + 3)
            - np.log1p(beta))


def _check_kappa_domain(alpha, theta):
    if np.any(~(theta > 0)) or np.any(~(theta <= 1)):
        raise DomainError("theta must lie in (0, 1]")
    if np.any(~(alpha - 2 * theta + 1 > 0)):
        raise DomainError("kappa requires alpha - 2 theta + 1 > 0")


def _kappa_prefactor(alpha, theta):
    return (1 - theta) * np.exp(
        log_gamma(alpha + 2) + log_gamma(alpha + 2 - 2 * theta)
        - log_gamma(alpha + 2 - theta) - log_gamma(alpha + 3 - theta))


def kappa(alpha, theta, ctl: SeriesControl | None = None, method: str = "series"):
    """The series constant kappa(alpha, theta).

    Args:
        alpha: weight parameter, alpha - 2 theta + 1 > 0.
        theta: exponent in (0, 1]; theta = 1 returns exactly 0.
        ctl: truncation policy.
        method: "series" sums the linear-factor series directly, "hyp4f3"
            combines two 4F3 values at unit argument.
    """
    al, th = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(theta, dtype=float))
    _check_kappa_domain(al, th)
    out = np.zeros(al.shape)
    live = th < 1
    if np.any(live):
        a, t = al[live], th[live]
        if method == "series":
            body = _kappa_series(a, t, ctl)
        elif method == "hyp4f3":
            body = _kappa_hyp4f3(a, t, ctl)
        else:
            raise ValueError(f"unknown kappa method {method!r}")
        out[live] = _kappa_prefactor(a, t) * body
    return _scalar_out(out, np.broadcast(alpha, theta))


def _kappa_series(a, t, ctl):
    c = a + 2 - 2 * t
    lin = a + 3 - 2 * t
    # (lin + 2N) = lin (lin/2 + 1)_N / (lin/2)_N and (N+1)! = (2)_N.
    upper = [lin / 2 + 1, 1 - t, 2 - t, c, c]
    lower = [lin / 2, a + 2 - t, a + 3 - t, 2.0, 2.0]
    return lin * ratio_sum(upper, lower, ctl).value


def _kappa_hyp4f3(a, t, ctl):
    x = (a + 1 - t) * (a + 2 - t) / (t * (1 - t) * (a + 1 - 2 * t))
    f1 = hyper_sum_at_1([-t, 1 - t, a - 2 * t + 1, a - 2 * t + 2],
                        [1.0, a - t + 1, a - t + 2], ctl).value
    f2 = hyper_sum_at_1([1 - t, 2 - t, a - 2 * t + 2, a - 2 * t + 2],
                        [2.0, a - t + 2, a - t + 3], ctl).value
    return x * (1 - f1) + f2


def K_bound(beta, theta, ctl: SeriesControl | None = None):
    """Right-hand constant K(beta, theta) of the one-term criterion."""
    be, th = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(theta, dtype=float))
    if np.any(~(be > 0)):
        raise DomainError("K_bound requires beta > 0")
    if np.any(~(th > 0)) or np.any(~(th <= 1)):
        raise DomainError("theta must lie in (0, 1]")
    lead = (be + 2 * th) / (2 * th * be) * np.exp(
        log_gamma(2 * th + 1) - 2 * log_gamma(th + 1))
    out = lead + kappa(be + 2 * th - 1, th, ctl)
    return _scalar_out(out, np.broadcast(beta, theta))
