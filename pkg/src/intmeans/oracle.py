"""Numerical verification on concrete maps and coefficient sequences.

Integrals over the unit disk use the normalised area measure dA = dx dy / pi
and a polar tensor grid: Gauss-Legendre panels in the radius, graded
dyadically toward the origin and toward |z| = 1, and Gauss-Legendre panels
in the angle, graded dyadically toward the boundary points where the map is
singular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .phiforms import PhiForm, phi_k_form
from .specfun import hyp2f1_series, log_gamma, pochhammer, sigma


# ------------------------------------------------------------------- maps

def _log1p(u):
    """Complex log(1 + u) without cancellation in the real part for small u."""
    u = np.asarray(u, dtype=complex)
    small = np.abs(u) < 0.5
    us = np.where(small, u, 0)
    near = 0.5 * np.log1p(2 * us.real + np.abs(us) ** 2) + 1j * np.arctan2(us.imag, 1 + us.real)
    return np.where(small, near, np.log(np.where(small, 1, 1 + u)))


@dataclass(frozen=True)
class MapSample:
    """A normalised univalent map with closed-form derivatives and branches.

    Args:
        name: identity, koebe or rotated-koebe.
        angle: rotation angle a, the map being exp(-ia) psi(exp(ia) z).
    """

    name: str
    angle: float = 0.0

    def __post_init__(self):
        if self.name not in ("identity", "koebe", "rotated-koebe"):
            raise ValueError(f"unknown map {self.name!r}")

    @property
    def _koebe(self) -> bool:
        return self.name != "identity"

    @property
    def _rot(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))

    @property
    def singular_angles(self) -> tuple:
        """Boundary angles where the map or its derivative blows up."""
        return (-self.angle,) if self._koebe else ()

    def phi(self, z):
        if not self._koebe:
            return np.asarray(z, dtype=complex)
        u = self._rot * z
        return u / (1 - u) ** 2 / self._rot

    def derivative(self, z, n: int):
        """n-th derivative of the map, n >= 1."""
        z = np.asarray(z, dtype=complex)
        if not self._koebe:
            return np.ones_like(z) if n == 1 else np.zeros_like(z)
        u = self._rot * z
        d = math.factorial(n + 1) / (1 - u) ** (n + 2) - math.factorial(n) / (1 - u) ** (n + 1)
        return d * self._rot ** (n - 1)

    def log_dphi(self, z):
        """Branch of log phi'(z) vanishing at 0."""
        z = np.asarray(z, dtype=complex)
        if not self._koebe:
            return np.zeros_like(z)
        u = self._rot * z
        return _log1p(u) - 3 * _log1p(-u)

    def log_z_over_phi(self, z):
        """Branch of log(z/phi(z)) vanishing at 0."""
        z = np.asarray(z, dtype=complex)
        if not self._koebe:
            return np.zeros_like(z)
        return 2 * _log1p(-self._rot * z)

    def log_quotient(self, z, w):
        """Branch of log[(phi(z) - phi(w)) / (phi'(w)(z - w))], zero on the diagonal."""
        z = np.asarray(z, dtype=complex)
        if not self._koebe:
            return np.zeros(np.broadcast(z, w).shape, dtype=complex)
        u, v = self._rot * z, self._rot * w
        return _log1p(-u * v) + _log1p(-v) - 2 * _log1p(-u) - _log1p(v)


MAP_ZOO = (MapSample("identity"), MapSample("koebe"),
           MapSample("rotated-koebe", 0.7), MapSample("rotated-koebe", 2.5))


def evaluate_form(form: PhiForm, derivs: Sequence) -> np.ndarray:
    """Value of a phi-form with numeric coefficients; derivs[n] = phi^(n)."""
    out = 0
    for mono, c in form.terms.items():
        term = complex(c) if not isinstance(c, np.ndarray) else c
        for j in mono.orders:
            term = term * (derivs[j + 1] / derivs[1])
        out = out + term
    return out


# ------------------------------------------------------------- quadrature

def _panels_to_nodes(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = np.asarray(edges[:-1]), np.asarray(edges[1:])
    half = 0.5 * (b - a)
    nodes = (a + half)[:, None] + half[:, None] * x
    weights = half[:, None] * w
    return nodes.ravel(), weights.ravel()


@dataclass(frozen=True)
class DiskQuadrature:
    """Graded polar tensor rule for integrals over the unit disk.

    Args:
        order: Gauss-Legendre points per panel.
        origin_levels: dyadic radial panels toward r = 0.
        edge_levels: dyadic panels toward r = 1 and toward singular angles.
        angle_panels: uniform angular panels away from singular angles.
    """

    order: int = 12
    origin_levels: int = 48
    edge_levels: int = 30
    angle_panels: int = 16

    def radial(self):
        inner = [2.0 ** -j for j in range(self.origin_levels, 0, -1)]
        outer = [1 - 2.0 ** -j for j in range(2, self.edge_levels + 1)]
        edges = [0.0, *inner, *outer, 1.0]
        return _panels_to_nodes(np.array(edges), self.order)

    def angular(self, singular_angles: Sequence[float] = ()):
        # One period starting at the first singular angle; graded toward every one of them.
        base = singular_angles[0] if singular_angles else -math.pi
        offsets = set(np.linspace(0, 2 * math.pi, self.angle_panels + 1).tolist())
        for a in singular_angles:
            off = (a - base) % (2 * math.pi)
            for centre in (off, off + 2 * math.pi):
                for j in range(1, self.edge_levels + 1):
                    for s in (-1, 1):
                        p = centre + s * math.pi * 2.0 ** -j
                        if 0 <= p <= 2 * math.pi:
                            offsets.add(p)
            offsets.add(off)
        edges = base + np.unique(np.array(sorted(offsets)))
        return _panels_to_nodes(edges, self.order)

    def nodes(self, singular_angles: Sequence[float] = ()):
        """Points z and weights w with sum w f(z) ~ integral of f dA."""
        r, wr = self.radial()
        t, wt = self.angular(singular_angles)
        z = r[:, None] * np.exp(1j * t)[None, :]
        w = (r * wr)[:, None] * wt[None, :] / math.pi
        return z, w

    def refined(self) -> "DiskQuadrature":
        return DiskQuadrature(2 * self.order, self.origin_levels, self.edge_levels,
                              self.angle_panels)

    def integrate(self, f: Callable, singular_angles: Sequence[float] = ()) -> float:
        z, w = self.nodes(singular_angles)
        return float(np.sum(np.real(f(z)) * w))

    def integrate_with_error(self, f, singular_angles=()):
        """Value and the change under doubling the points per panel."""
        v = self.integrate(f, singular_angles)
        v2 = self.refined().integrate(f, singular_angles)
        return v2, abs(v2 - v)


DEFAULT_QUAD = DiskQuadrature()


# --------------------------------------------------------------- integrals

def prawitz_integrand(phi: MapSample, theta: float):
    def f(z):
        val = np.expm1(phi.log_dphi(z) + (theta + 1) * phi.log_z_over_phi(z))
        return np.abs(val) ** 2 / np.abs(z) ** (2 * theta + 2)
    return f


def prawitz_integral(phi: MapSample, theta: float, quad: DiskQuadrature = DEFAULT_QUAD) -> float:
    """Area integral of |phi'(z)(z/phi(z))^(theta+1) - 1|^2 / |z|^(2theta+2)."""
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    return quad.integrate(prawitz_integrand(phi, theta), phi.singular_angles)


TAYLOR_RADIUS = 1e-3
TAYLOR_TERMS = 4


def phi_theta(phi: MapSample, z, w: complex, theta: float):
    """Two-point function Phi_theta(z, w); Taylor form near the diagonal."""
    z = np.asarray(z, dtype=complex)
    d = z - w
    e = phi.log_dphi(z) - phi.log_dphi(w) - (theta + 1) * phi.log_quotient(z, w)
    near = np.abs(d) < TAYLOR_RADIUS
    safe = np.where(near, 1.0, d)
    out = np.expm1(e) / safe
    if np.any(near):
        out = np.where(near, phi_theta_taylor(phi, d, w, theta), out)
    return out


def phi_theta_taylor(phi: MapSample, d, w: complex, theta: float, terms: int = TAYLOR_TERMS):
    """sum_k Phi_{k,theta}(w) d^k / k! with the exact phi-forms."""
    derivs = [None] + [complex(phi.derivative(w, n)) for n in range(1, terms + 2)]
    out = 0
    for k in range(terms):
        ck = complex(evaluate_form(phi_k_form(k).substitute(float(theta)), derivs))
        out = out + ck * d ** k / math.factorial(k)
    return out


def l_theta(z, w: complex, theta: float):
    """(1/(z-w)) (1 - ((1-|w|^2)/(1-conj(w) z))^(1-theta)), continuous at z = w."""
    z = np.asarray(z, dtype=complex)
    s = 1 - abs(w) ** 2
    d = z - w
    # (1-|w|^2)/(1-conj(w) z) = 1/(1 - u) with u = conj(w) d / (1 - |w|^2)
    u = np.conj(w) * d / s
    near = np.abs(d) < TAYLOR_RADIUS
    safe = np.where(near, 1.0, d)
    direct = -np.expm1(-(1 - theta) * _log1p(-u)) / safe
    c = np.conj(w) / s
    series = -(1 - theta) * c * (1 + (2 - theta) / 2 * u * (1 + (3 - theta) / 3 * u
                                                       * (1 + (4 - theta) / 4 * u)))
    return np.where(near, series, direct)


def two_var_integrand_zeta(phi: MapSample, w: complex, theta: float):
    """Integrand in the variable zeta with z = (zeta + w)/(1 + conj(w) zeta)."""
    s = 1 - abs(w) ** 2

    def f(zeta):
        denom = 1 + np.conj(w) * zeta
        z = (zeta + w) / denom
        jac = s ** 2 / np.abs(denom) ** 4
        dist = np.abs(zeta) * s / np.abs(denom)
        val = phi_theta(phi, z, w, theta) + l_theta(z, w, theta)
        return np.abs(val) ** 2 / dist ** (2 * theta) * jac
    return f


def _zeta_angle(phi: MapSample, w: complex) -> tuple:
    out = []
    for a in phi.singular_angles:
        p = complex(math.cos(a), math.sin(a))
        q = (p - w) / (1 - np.conj(w) * p)
        out.append(math.atan2(q.imag, q.real))
    return tuple(out)


def two_var_check(phi: MapSample, w: complex, theta: float,
                  quad: DiskQuadrature = DEFAULT_QUAD) -> float:
    """Area integral of |Phi_theta + L_theta|^2 / |z-w|^(2theta) over z in the disk."""
    if not abs(w) < 1:
        raise ValueError("w must lie in the unit disk")
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    return quad.integrate(two_var_integrand_zeta(phi, complex(w), theta), _zeta_angle(phi, w))


def two_var_rhs(w: complex, theta: float) -> float:
    return (1 / theta) * (1 - abs(w) ** 2) ** (-2 * theta)


def identity_two_var_closed_form(w: complex, theta: float) -> float:
    """(1/theta)[1 - 2F1(1-theta, -theta; 1; |w|^2)](1-|w|^2)^(-2theta)."""
    x = abs(w) ** 2
    return (1 / theta) * (1 - hyp2f1_series(1 - theta, -theta, 1.0, x)) * (1 - x) ** (-2 * theta)


# ------------------------------------------------------------------ norms

def norm_alpha(coeffs: Sequence[complex], alpha: float) -> float:
    """Squared weighted Bergman norm sum_k k!/(alpha+2)_k |g_k|^2."""
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    c = np.abs(np.asarray(coeffs, dtype=complex)) ** 2
    k = np.arange(len(c))
    w = np.exp(log_gamma(k + 1.0) + log_gamma(alpha + 2.0) - log_gamma(alpha + 2.0 + k))
    return float(np.sum(w * c))


def derivative_coeffs(coeffs: Sequence[complex], n: int) -> np.ndarray:
    """Taylor coefficients of the n-th derivative."""
    c = np.asarray(coeffs, dtype=complex)
    k = np.arange(n, len(c))
    fall = np.exp(log_gamma(k + 1.0) - log_gamma(k - n + 1.0))
    return c[n:] * fall


def asympt_gap(coeffs: Sequence[complex], alpha: float, n: int) -> float:
    """(alpha+2)_{2n} ||g||_alpha^2 - ||g^(n)||_{alpha+2n}^2 in closed form."""
    if n < 1:
        raise ValueError("n must be positive")
    c = np.abs(np.asarray(coeffs, dtype=complex)) ** 2
    k = np.arange(len(c), dtype=float)
    base = np.exp(log_gamma(k + 1) + log_gamma(alpha + 2.0) - log_gamma(alpha + 2.0 + k))
    fall = np.array([pochhammer(kk - n + 1, n) for kk in k])
    rise = np.array([pochhammer(kk + alpha + 2, n) for kk in k])
    return float(pochhammer(alpha + 2, 2 * n) * np.sum((1 - fall / rise) * base * c))


def sigma_numeric(alpha: float, beta: float, quad: DiskQuadrature = DEFAULT_QUAD,
                  angle_points: int = 4096, radial_points: int = 200) -> float:
    """sigma(alpha, beta) from the double area integral of |z-w|^(2beta).

    The inner integral over z is done in polar coordinates about w, where the
    radial part is exact; the outer integral uses Gauss-Jacobi in u = |w|^2.
    """
    from scipy.special import roots_jacobi

    if not (alpha > -1 and beta > -1):
        raise ValueError("need alpha > -1 and beta > -1")
    psi = (np.arange(angle_points) + 0.5) * (2 * math.pi / angle_points)
    x, wts = roots_jacobi(radial_points, alpha, 0.0)
    u = 0.5 * (x + 1)
    wts = wts * 0.5 ** (alpha + 1)
    s = np.sqrt(u)[:, None]
    rho = -s * np.cos(psi) + np.sqrt(1 - (s * np.sin(psi)) ** 2)
    inner = np.mean(rho ** (2 * beta + 2), axis=1) * 2 / (2 * beta + 2)
    inv_sigma = (alpha + 1) * np.sum(wts * inner)
    return float(1 / inv_sigma)


# ---------------------------------------------------------------- report

@dataclass
class Check:
    name: str
    value: float
    target: float
    passed: bool
    detail: str = ""


def run_verification(quad: DiskQuadrature = DEFAULT_QUAD, seed: int = 0) -> list:
    """The oracle suite; each check records measured value and target."""
    checks = []
    for phi in MAP_ZOO:
        for theta in (0.25, 0.5, 0.75, 1.0):
            v = prawitz_integral(phi, theta, quad)
            label = phi.name + (f"({phi.angle})" if phi.angle else "")
            checks.append(Check(f"prawitz {label} theta={theta}", v, 1 / theta,
                                v <= 1 / theta + 1e-3))
    for theta in (0.5, 1.0):
        v = prawitz_integral(MapSample("koebe"), theta, quad)
        checks.append(Check(f"koebe equality gap theta={theta}", abs(v - 1 / theta), 1e-3,
                            abs(v - 1 / theta) < 1e-3))
    for phi in MAP_ZOO[:2]:
        a = prawitz_integral(phi, 0.5, quad)
        b = two_var_check(phi, 0.0, 0.5, quad)
        checks.append(Check(f"two-variable at w=0 {phi.name}", abs(a - b), 1e-6, abs(a - b) <= 1e-6))
    w, theta = 0.3, 0.5
    lhs = two_var_check(MapSample("koebe"), w, theta, quad)
    gap = two_var_rhs(w, theta) - lhs
    checks.append(Check("koebe two-variable gap w=0.3", gap, 1e-3, -1e-3 < gap < 1e-3))
    for w in (0.3, 0.5 + 0.2j):
        lhs = two_var_check(MapSample("identity"), w, 0.5, quad)
        ref = identity_two_var_closed_form(w, 0.5)
        checks.append(Check(f"identity two-variable w={w}", abs(lhs - ref), 1e-4,
                            abs(lhs - ref) <= 1e-4))
    for a, b in ((0.0, 0.0), (0.5, 0.25), (0.0, -0.5)):
        v = sigma_numeric(a, b, quad)
        ref = sigma(a, b)
        tol = 1e-3 if b < 0 else 1e-4
        checks.append(Check(f"sigma({a},{b}) quadrature", abs(v - ref), tol, abs(v - ref) <= tol))
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(1000):
        m = int(rng.integers(1, 30))
        c = rng.normal(size=m) + 1j * rng.normal(size=m)
        alpha = float(rng.uniform(-0.9, 5))
        n = int(rng.integers(1, 5))
        worst = min(worst, asympt_gap(c, alpha, n))
    checks.append(Check("asymptotic gap nonnegative (1000 samples)", worst, 0.0, worst >= 0))
    return checks
