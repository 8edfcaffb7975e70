"""Per-theta convex regions and emptiness of their intersection over theta.

Interval modes (I, J) are decided by comparing the smallest right endpoint
with the largest left endpoint.  Disk (D) and ellipse (E) modes are sets
{v : q_theta(v) <= r^2} with q_theta a convex quadratic in v = (x, y); an
empty family is certified by nonnegative weights on three thetas whose
weighted quadratic stays above r^2 everywhere, which by Helly's theorem is
the only kind of witness needed in the plane.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .coeffs import A_coefficients, one_term_margin
from .specfun import DEFAULT_CONTROL, SeriesControl

INTERVAL_MODES = ("I", "J")
GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class GridSpec:
    """Theta sampling of [theta0, 1].

    Args:
        n: number of uniform grid points.
        refine_tol: golden-section tolerance in theta around extremizers.
        margin_guard: separation required before declaring emptiness.
        max_refine: number of local extremizers refined per endpoint.
    """

    n: int = 256
    refine_tol: float = 1e-6
    margin_guard: float = 1e-9
    max_refine: int = 4

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs at least two points")

    def points(self, theta0: float) -> np.ndarray:
        return np.linspace(theta0, 1.0, self.n)

    def doubled(self) -> "GridSpec":
        return GridSpec(2 * self.n - 1, self.refine_tol, self.margin_guard, self.max_refine)


DEFAULT_GRID = GridSpec()


@dataclass(frozen=True)
class ConvexWitness:
    """Region for one theta.

    kind is one of interval, whole-line, empty, disk, ellipse.  For disks
    `quad` holds (A1, A2) and for ellipses (A1, ..., A5); `radius` is the
    bound r on the defining expression (the geometric disk radius is
    r/|A2|).
    """

    kind: str
    theta: float
    interval: Optional[tuple] = None
    center: Optional[complex] = None
    radius: Optional[float] = None
    quad: Optional[tuple] = None

    def quadratic(self):
        """(H, g, c) with q(v) = v'Hv - 2g'v + c for disk or ellipse kinds."""
        if self.kind == "disk":
            a1, a2 = (complex(v) for v in self.quad)
            m = np.array([[a2.real, -a2.imag], [a2.imag, a2.real]])
            rhs = np.array([a1.real, a1.imag])
        elif self.kind == "ellipse":
            a1, a2, a3, a4, a5 = (float(np.real(v)) for v in self.quad)
            m = np.array([[a2, 0.0], [a4, a5]])
            rhs = np.array([a1, a3])
        else:
            raise ValueError("quadratic form only for disk or ellipse kinds")
        return m.T @ m, m.T @ rhs, float(rhs @ rhs)

    def value(self, v) -> float:
        h, g, c = self.quadratic()
        v = np.asarray(v, dtype=float)
        return float(v @ h @ v - 2 * g @ v + c)

    def contains(self, v, slack: float = 0.0) -> bool:
        if self.kind == "whole-line":
            return True
        if self.kind == "empty":
            return False
        if self.kind == "interval":
            x = float(np.ravel(np.real(v))[0])
            return self.interval[0] - slack <= x <= self.interval[1] + slack
        return self.value(v) <= self.radius ** 2 * (1 + slack)


@dataclass(frozen=True)
class EmptinessEvidence:
    """Verdict on a theta-family with its witness.

    witness keys: "pair" (two thetas) or "single" (one theta) or "triplet"
    with "weights" for empty verdicts; "point" for nonempty; "one_term"
    with theta and margin for the one-term fallback.
    """

    verdict: str
    mode: str
    witness: dict = field(default_factory=dict)
    margin: float = 0.0
    family: tuple = ()

    @property
    def empty(self) -> bool:
        return self.verdict == "empty"


class LastConditionFailure(Exception):
    """K <= P at some theta: the two-term quantities are undefined there."""

    def __init__(self, theta):
        super().__init__(f"positivity condition fails at theta={theta}")
        self.theta = theta


def radius_for(mode: str, tau, beta: float) -> float:
    if mode == "J":
        t = float(np.real(tau))
        return t * t / (4 * (beta + 1) * math.sqrt(beta * (beta + 4)))
    return 1.0 / math.sqrt((beta + 1) * (beta + 2) * (beta + 3) * (beta + 4))


def _solve_linear(lead, const, rad):
    """Endpoints of {x : |const - x lead| <= rad} and kind codes (0 interval, 1 line, 2 empty)."""
    lead = np.asarray(lead, dtype=float)
    const = np.asarray(const, dtype=float)
    zero = lead == 0
    safe = np.where(zero, 1.0, lead)
    e1 = (const - rad) / safe
    e2 = (const + rad) / safe
    lo = np.where(zero, -np.inf, np.minimum(e1, e2))
    hi = np.where(zero, np.inf, np.maximum(e1, e2))
    code = np.where(zero, np.where(np.abs(const) <= rad, 1, 2), 0)
    lo = np.where(code == 2, np.inf, lo)
    hi = np.where(code == 2, -np.inf, hi)
    return lo, hi, code


def _coefficients(theta, tau, beta, mode, ctl):
    order = 3 if mode == "E" else 2
    if mode == "J" and complex(tau).imag != 0:
        raise ValueError("mode J requires real tau")
    return A_coefficients(theta, tau, beta, order, ctl)


def interval_endpoints(theta, tau, beta, mode, ctl=None):
    """Vectorised (lo, hi, code, positive) for interval modes."""
    ac = _coefficients(np.asarray(theta, dtype=float), tau, beta, mode, ctl)
    rad = radius_for(mode, tau, beta)
    lead, const = (ac.a2, ac.a1) if mode == "I" else (ac.a1, ac.a2)
    lo, hi, code = _solve_linear(np.real(lead), np.real(const), rad)
    return lo, hi, code, np.asarray(ac.positive)


def region_for(theta: float, tau, beta: float, mode: str,
               ctl: SeriesControl | None = None) -> ConvexWitness:
    """The convex region of the given mode at one theta.

    Raises LastConditionFailure when K <= P at theta.
    """
    ac = _coefficients(float(theta), tau, beta, mode, ctl)
    if not ac.positive:
        raise LastConditionFailure(theta)
    rad = radius_for(mode, tau, beta)
    if mode in INTERVAL_MODES:
        lead, const = (ac.a2, ac.a1) if mode == "I" else (ac.a1, ac.a2)
        lo, hi, code = _solve_linear(np.real(lead), np.real(const), rad)
        kind = ("interval", "whole-line", "empty")[int(code)]
        interval = (float(lo), float(hi)) if kind == "interval" else None
        return ConvexWitness(kind, float(theta), interval=interval, radius=rad)
    if mode == "D":
        a1, a2 = complex(ac.a1), complex(ac.a2)
        if a2 == 0:
            kind = "whole-line" if abs(a1) <= rad else "empty"
            return ConvexWitness(kind, float(theta), radius=rad, quad=(a1, a2))
        return ConvexWitness("disk", float(theta), center=a1 / a2, radius=rad, quad=(a1, a2))
    if mode == "E":
        quad = tuple(float(np.real(v)) for v in (ac.a1, ac.a2, ac.a3, ac.a4, ac.a5))
        return ConvexWitness("ellipse", float(theta), radius=rad, quad=quad)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------- intervals

def _golden(f, a, b, tol, fa=None, fb=None):
    """Minimise f on [a, b]; returns (x, f(x)) of the best point seen."""
    best = [(fa, a), (fb, b)]
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    best += [(fc, c), (fd, d)]
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
            best.append((fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
            best.append((fd, d))
    val, x = min((v, x) for v, x in best if v is not None)
    return x, val


def _local_extrema(values, largest: bool, limit: int):
    v = -values if largest else values
    n = len(v)
    idx = [i for i in range(n)
           if (i == 0 or v[i] <= v[i - 1]) and (i == n - 1 or v[i] <= v[i + 1])]
    idx.sort(key=lambda i: v[i])
    return idx[:limit]


def _interval_family(tau, beta, theta0, mode, grid, ctl):
    thetas = grid.points(theta0)
    lo, hi, code, positive = interval_endpoints(thetas, tau, beta, mode, ctl)
    if not np.all(positive):
        return _fallback(tau, beta, thetas, positive, mode, ctl)
    empties = np.flatnonzero(code == 2)
    if len(empties):
        th = float(thetas[empties[0]])
        return EmptinessEvidence("empty", mode, {"single": th}, margin=math.inf)

    def hi_at(th):
        l, h, c, p = interval_endpoints(np.array([th]), tau, beta, mode, ctl)
        if not p[0]:
            return -math.inf
        return float(h[0])

    def neg_lo_at(th):
        l, h, c, p = interval_endpoints(np.array([th]), tau, beta, mode, ctl)
        if not p[0]:
            return -math.inf
        return -float(l[0])

    def refine(values, fn, largest):
        cands = [(float(values[i] if not largest else -values[i]), float(thetas[i]))
                 for i in range(len(thetas))]
        best_val, best_th = min(cands)
        for i in _local_extrema(values, largest, grid.max_refine):
            a = thetas[max(i - 1, 0)]
            b = thetas[min(i + 1, len(thetas) - 1)]
            x, val = _golden(fn, float(a), float(b), grid.refine_tol)
            if val < best_val:
                best_val, best_th = val, x
        return best_val, best_th

    inf_hi, th_hi = refine(hi, hi_at, largest=False)
    neg_sup_lo, th_lo = refine(lo, neg_lo_at, largest=True)
    sup_lo = -neg_sup_lo
    if not (math.isfinite(inf_hi) and math.isfinite(sup_lo)):
        # a refinement point violated positivity: fall back to the one-term test there
        bad = th_hi if not math.isfinite(inf_hi) else th_lo
        return _fallback(tau, beta, np.array([bad]), np.array([False]), mode, ctl)
    gap = sup_lo - inf_hi
    if gap > grid.margin_guard:
        return EmptinessEvidence("empty", mode, {"pair": (th_hi, th_lo),
                                                 "inf_hi": inf_hi, "sup_lo": sup_lo},
                                 margin=gap)
    point = 0.5 * (inf_hi + sup_lo)
    verdict = "nonempty" if gap <= 0 else "inconclusive"
    return EmptinessEvidence(verdict, mode, {"point": point, "inf_hi": inf_hi,
                                             "sup_lo": sup_lo}, margin=gap)


def _fallback(tau, beta, thetas, positive, mode, ctl):
    bad = thetas[~positive]
    margins = np.asarray(one_term_margin(tau, beta, bad, ctl))
    k = int(np.argmax(margins))
    th, m = float(bad[k]), float(margins[k])
    if m >= 0 and th < 1:
        return EmptinessEvidence("empty", mode,
                                 {"one_term": th, "boundary": m <= 1e-12}, margin=m)
    return EmptinessEvidence("inconclusive", mode, {"one_term": th}, margin=m)


# ------------------------------------------------------- disks and ellipses

def _weighted_min(quads, weights):
    """min over v of sum w_i q_i(v); -inf if unbounded below."""
    h = sum(w * q[0] for w, q in zip(weights, quads))
    g = sum(w * q[1] for w, q in zip(weights, quads))
    c = sum(w * q[2] for w, q in zip(weights, quads))
    v, *_ = np.linalg.lstsq(h, g, rcond=None)
    if np.linalg.norm(h @ v - g) > 1e-10 * max(1.0, np.linalg.norm(g)):
        return -math.inf, v
    return float(c - g @ v), v


def _kkt_weights(quads, v):
    """Simplex weights balancing the gradients of the given quadratics at v."""
    grads = [2 * (q[0] @ v - q[1]) for q in quads]
    mat = np.vstack([np.array(grads).T, np.ones(len(quads))])
    rhs = np.array([0.0, 0.0, 1.0])
    w, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    w = np.clip(w, 0.0, None)
    if w.sum() == 0:
        w = np.ones(len(quads))
    return w / w.sum()


def _polish_weights(quads, w0):
    """Nelder-Mead ascent of the weighted minimum over the simplex."""
    def neg(z):
        w = np.exp(z - z.max())
        w /= w.sum()
        val, _ = _weighted_min(quads, w)
        return -val if math.isfinite(val) else 1e300

    z0 = np.log(np.maximum(w0, 1e-12))
    res = minimize(neg, z0, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-18, "maxiter": 4000})
    w = np.exp(res.x - res.x.max())
    return w / w.sum()


def _dual_weights(quads, v=None, polish=True):
    """Weights on the simplex (approximately) maximising the weighted minimum."""
    if len(quads) == 1:
        return np.ones(1), _weighted_min(quads, [1.0])[0]
    if v is None:
        v = _minimax_point(quads)
    w = _kkt_weights(quads, v)
    val = _weighted_min(quads, w)[0]
    if polish:
        w2 = _polish_weights(quads, w)
        val2 = _weighted_min(quads, w2)[0]
        if val2 > val:
            w, val = w2, val2
    return w, val


def triple_region_empty(r1: ConvexWitness, r2: ConvexWitness, r3: ConvexWitness,
                        tol: float = 1e-9):
    """Decide whether three disks or ellipses have a common point.

    Returns (verdict, certificate) with verdict in empty, nonempty,
    inconclusive.
    """
    regions = (r1, r2, r3)
    kinds = {r.kind for r in regions}
    if kinds == {"disk"}:
        return _disk_triple(regions, tol)
    if kinds <= {"disk", "ellipse"} and len(kinds) == 1:
        return _quadratic_triple(regions, tol)
    raise ValueError("triple test needs three disks or three ellipses")


def _disk_triple(disks, tol):
    centers = [complex(d.center) for d in disks]
    radii = [d.radius / abs(complex(d.quad[1])) for d in disks]
    for i, j in itertools.combinations(range(3), 2):
        gap = abs(centers[i] - centers[j]) - radii[i] - radii[j]
        if gap > tol:
            return "empty", {"pair": (disks[i].theta, disks[j].theta), "margin": gap}
    candidates = list(centers)
    for i, j in itertools.combinations(range(3), 2):
        candidates += _circle_intersections(centers[i], radii[i], centers[j], radii[j])
        # nested pair: the smaller disk's center is a candidate already
    for z in candidates:
        if all(abs(z - c) <= r + tol for c, r in zip(centers, radii)):
            return "nonempty", {"point": (z.real, z.imag)}
    # pairwise lenses are nonempty and no lens corner or center is common
    worst = min(max(abs(z - c) - r for c, r in zip(centers, radii)) for z in candidates)
    if worst > tol:
        return "empty", {"triplet": tuple(d.theta for d in disks), "margin": worst}
    return "inconclusive", {"margin": worst}


def _circle_intersections(c1, r1, c2, r2):
    d = abs(c2 - c1)
    if d == 0 or d > r1 + r2 or d < abs(r1 - r2):
        return []
    a = (r1 * r1 - r2 * r2 + d * d) / (2 * d)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    u = (c2 - c1) / d
    mid = c1 + a * u
    return [mid + 1j * h * u, mid - 1j * h * u]


def _quadratic_triple(regions, tol):
    quads = [r.quadratic() for r in regions]
    r2 = regions[0].radius ** 2
    w, val = _dual_weights(quads)
    if val > r2 * (1 + tol):
        return "empty", {"triplet": tuple(r.theta for r in regions),
                         "weights": tuple(float(x) for x in w), "margin": val / r2 - 1}
    v = _minimax_point(quads)
    worst = max(_q(q, v) for q in quads)
    if worst <= r2:
        return "nonempty", {"point": tuple(float(x) for x in v), "margin": worst / r2 - 1}
    return "inconclusive", {"margin": max(val, -math.inf) / r2 - 1}


def _q(quad, v):
    h, g, c = quad
    return float(v @ h @ v - 2 * g @ v + c)


def _minimax_point(quads, start=None):
    """Approximate argmin of max_i q_i by the epigraph problem."""
    v0 = np.zeros(2) if start is None else np.asarray(start, dtype=float)
    hs = np.array([q[0] for q in quads])
    gs = np.array([q[1] for q in quads])
    cs = np.array([q[2] for q in quads])
    s0 = max(_q(q, v0) for q in quads)

    def cons(z):
        v = z[:2]
        return z[2] - (np.einsum("i,kij,j->k", v, hs, v) - 2 * gs @ v + cs)

    def cons_jac(z):
        v = z[:2]
        jv = -(2 * np.einsum("kij,j->ki", hs, v) - 2 * gs)
        return np.hstack([jv, np.ones((len(quads), 1))])

    res = minimize(lambda z: z[2], np.array([*v0, s0]), jac=lambda z: np.array([0, 0, 1.0]),
                   constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                   method="SLSQP", options={"maxiter": 500, "ftol": 1e-15})
    v = res.x[:2]
    if max(_q(q, v) for q in quads) > s0:
        v = v0
    return v


def _quadratic_family(tau, beta, theta0, mode, grid, ctl):
    thetas = grid.points(theta0)
    ac = _coefficients(thetas, tau, beta, mode, ctl)
    positive = np.asarray(ac.positive)
    if not np.all(positive):
        return _fallback(tau, beta, thetas, positive, mode, ctl)
    rad = radius_for(mode, tau, beta)
    r2 = rad * rad
    regions = _regions_from(ac, thetas, rad, mode)
    quads = [r.quadratic() for r in regions]

    # Start from the interval solution on the real line.
    a1, a2 = np.real(ac.a1), np.real(ac.a2)
    x0 = float(np.median(a1[a2 != 0] / a2[a2 != 0])) if np.any(a2 != 0) else 0.0
    v = _minimax_point(quads, (x0, 0.0))
    vals = np.array([_q(q, v) for q in quads])
    if vals.max() <= r2:
        return EmptinessEvidence("nonempty", mode, {"point": tuple(float(x) for x in v)},
                                 margin=float(vals.max() / r2 - 1))
    # Candidate active sets near the minimax point give the Helly triplet.
    order = [int(i) for i in np.argsort(-vals)[:5]]
    best = None
    for size in (1, 2, 3):
        for trip in itertools.combinations(order, size):
            sub = [quads[i] for i in trip]
            w = _kkt_weights(sub, v)
            val = _weighted_min(sub, w)[0]
            if best is None or val > best[1]:
                best = (trip, val, w)
    trip, val, w = best
    if not val / r2 - 1 > grid.margin_guard and len(trip) > 1:
        sub = [quads[i] for i in trip]
        w2 = _polish_weights(sub, w)
        val2 = _weighted_min(sub, w2)[0]
        if val2 > val:
            val, w = val2, w2
    margin = val / r2 - 1
    if margin > grid.margin_guard:
        return EmptinessEvidence(
            "empty", mode,
            {"triplet": tuple(float(thetas[i]) for i in trip),
             "weights": tuple(float(x) for x in w)},
            margin=margin)
    return EmptinessEvidence("inconclusive", mode, {"point": tuple(float(x) for x in v)},
                             margin=margin)


def _regions_from(ac, thetas, rad, mode):
    out = []
    for i, th in enumerate(thetas):
        if mode == "D":
            a1, a2 = complex(np.atleast_1d(ac.a1)[i]), complex(np.atleast_1d(ac.a2)[i])
            center = a1 / a2 if a2 != 0 else None
            out.append(ConvexWitness("disk", float(th), center=center, radius=rad, quad=(a1, a2)))
        else:
            quad = tuple(float(np.real(np.atleast_1d(v)[i]))
                         for v in (ac.a1, ac.a2, ac.a3, ac.a4, ac.a5))
            out.append(ConvexWitness("ellipse", float(th), radius=rad, quad=quad))
    return out


def family_empty(tau, beta: float, theta0: float, mode: str,
                 grid: GridSpec = DEFAULT_GRID,
                 ctl: SeriesControl | None = None) -> EmptinessEvidence:
    """Decide whether the regions for theta in [theta0, 1] have empty intersection."""
    if not 0 < theta0 <= 1:
        raise ValueError("theta0 must lie in (0, 1]")
    ctl = ctl or DEFAULT_CONTROL
    if mode in INTERVAL_MODES:
        return _interval_family(tau, beta, theta0, mode, grid, ctl)
    if mode in ("D", "E"):
        return _quadratic_family(tau, beta, theta0, mode, grid, ctl)
    raise ValueError(f"unknown mode {mode!r}")


def intervals_empty(intervals: Sequence[tuple]) -> EmptinessEvidence:
    """Emptiness of a finite family of closed intervals (one-dimensional Helly)."""
    his = [b for _, b in intervals]
    los = [a for a, _ in intervals]
    i = int(np.argmin(his))
    j = int(np.argmax(los))
    if his[i] < los[j]:
        return EmptinessEvidence("empty", "I", {"pair": (i, j)}, margin=los[j] - his[i])
    return EmptinessEvidence("nonempty", "I", {"point": 0.5 * (his[i] + los[j])},
                             margin=los[j] - his[i])


def replay_evidence(ev: EmptinessEvidence, tau, beta, ctl=None) -> bool:
    """Re-derive emptiness from the recorded witness alone."""
    if not ev.empty:
        return False
    w = ev.witness
    if "one_term" in w:
        return float(one_term_margin(tau, beta, w["one_term"], ctl)) >= 0
    if "single" in w:
        return region_for(w["single"], tau, beta, ev.mode, ctl).kind == "empty"
    if "pair" in w:
        ra = region_for(w["pair"][0], tau, beta, ev.mode, ctl)
        rb = region_for(w["pair"][1], tau, beta, ev.mode, ctl)
        if "empty" in (ra.kind, rb.kind):
            return True
        if "whole-line" in (ra.kind, rb.kind):
            return False
        return ra.interval[1] < rb.interval[0] or rb.interval[1] < ra.interval[0]
    if "triplet" in w:
        regions = [region_for(th, tau, beta, ev.mode, ctl) for th in w["triplet"]]
        quads = [r.quadratic() for r in regions]
        val, _ = _weighted_min(quads, w["weights"])
        return val > regions[0].radius ** 2
    return False
