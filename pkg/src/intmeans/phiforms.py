"""Exact algebra of monomial phi-forms.

A monomial phi-form is a product of ratios phi^(j+1)/phi', encoded by the
sorted tuple of orders j.  The empty tuple is the unit form.  A PhiForm maps
monomials to coefficients; coefficients are CoeffPoly (exact rational
polynomials in one formal variable) inside this module, and may be numbers
once a variable has been substituted.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

MAX_DEGREE = 8


@dataclass(frozen=True, order=True)
class Monomial:
    """Product of phi^(j+1)/phi' over the sorted orders j."""

    orders: tuple = ()

    def __post_init__(self):
        orders = tuple(sorted(int(j) for j in self.orders))
        if any(j < 1 for j in orders):
            raise ValueError("monomial orders must be positive integers")
        object.__setattr__(self, "orders", orders)

    @property
    def degree(self) -> int:
        return sum(self.orders)

    @property
    def bidegree(self) -> int:
        return len(self.orders)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.orders + other.orders)

    def render(self) -> str:
        if not self.orders:
            return "1"
        parts = []
        for j, mult in sorted(Counter(self.orders).items()):
            base = f"{_derivative(j + 1)}/φ'"
            parts.append(f"({base})^{mult}" if mult > 1 else base)
        return " ".join(parts)


def _derivative(order: int) -> str:
    return "φ" + "'" * order if order <= 4 else f"φ^({order})"


UNIT = Monomial(())
R1 = Monomial((1,))


class CoeffPoly:
    """Polynomial with exact rational coefficients in one formal variable."""

    __slots__ = ("coefficients", "var")

    def __init__(self, coefficients: Mapping[int, object] | None = None, var: str = "x"):
        clean = {}
        for e, c in (coefficients or {}).items():
            c = Fraction(c)
            if c != 0:
                clean[int(e)] = c
        self.coefficients = dict(sorted(clean.items()))
        self.var = var

    @classmethod
    def constant(cls, c, var="x"):
        return cls({0: c}, var)

    @classmethod
    def variable(cls, var="x"):
        return cls({1: 1}, var)

    def _lift(self, other):
        if isinstance(other, CoeffPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return CoeffPoly.constant(other, self.var)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.coefficients)
        for e, c in other.coefficients.items():
            out[e] = out.get(e, 0) + c
        return CoeffPoly(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return CoeffPoly({e: -c for e, c in self.coefficients.items()}, self.var)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self.coefficients.items():
            for e2, c2 in other.coefficients.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return CoeffPoly(out, self.var)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(tuple(self.coefficients.items()))

    def __bool__(self):
        return bool(self.coefficients)

    @property
    def degree(self) -> int:
        return max(self.coefficients, default=-1)

    def __call__(self, x):
        """Evaluate by Horner's rule; exact for Fraction/int input."""
        out = 0
        for e in range(self.degree, -1, -1):
            out = out * x + self.coefficients.get(e, 0)
        if isinstance(x, (int, Fraction)):
            return out
        return float(out) if isinstance(out, (int, Fraction)) else out

    def divmod(self, other: "CoeffPoly"):
        """Polynomial long division."""
        if not other:
            raise ZeroDivisionError("division by the zero polynomial")
        rem = dict(self.coefficients)
        quot: dict = {}
        lead_e = other.degree
        lead_c = other.coefficients[lead_e]
        while rem and max(rem) >= lead_e:
            e = max(rem)
            q = rem[e] / lead_c
            quot[e - lead_e] = q
            for e2, c2 in other.coefficients.items():
                rem[e - lead_e + e2] = rem.get(e - lead_e + e2, 0) - q * c2
            rem = {k: v for k, v in rem.items() if v != 0}
        return CoeffPoly(quot, self.var), CoeffPoly(rem, self.var)

    def render(self) -> str:
        if not self.coefficients:
            return "0"
        parts = []
        for e, c in sorted(self.coefficients.items()):
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                power = self.var if e == 1 else f"{self.var}^{e}"
                body = power if mag == 1 else f"{mag}{power}" if mag.denominator == 1 else f"{mag} {power}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"CoeffPoly({self.render()!r}, var={self.var!r})"


def _term_key(item):
    return item[0].bidegree, item[0].orders


def _is_zero(c) -> bool:
    return c == 0


class PhiForm:
    """Finite linear combination of monomial phi-forms."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, object] | Iterable | None = None):
        items = terms.items() if isinstance(terms, Mapping) else (terms or [])
        acc: dict = {}
        for mono, c in items:
            if not isinstance(mono, Monomial):
                mono = Monomial(tuple(mono))
            acc[mono] = acc[mono] + c if mono in acc else c
        self.terms = {m: c for m, c in sorted(acc.items(), key=_term_key) if not _is_zero(c)}

    @classmethod
    def monomial(cls, orders=(), coeff=1):
        return cls({Monomial(tuple(orders)): coeff})

    def __add__(self, other):
        if not isinstance(other, PhiForm):
            return NotImplemented
        return PhiForm(list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self):
        return PhiForm({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PhiForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PhiForm):
            return PhiForm([(m1 * m2, c1 * c2)
                            for m1, c1 in self.terms.items()
                            for m2, c2 in other.terms.items()])
        return PhiForm({m: c * other for m, c in self.terms.items()})

    def __rmul__(self, other):
        return PhiForm({m: other * c for m, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, PhiForm):
            return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def coefficient(self, orders):
        return self.terms.get(Monomial(tuple(orders)), 0)

    @property
    def degrees(self) -> set:
        return {m.degree for m in self.terms}

    @property
    def bidegrees(self) -> set:
        return {m.bidegree for m in self.terms}

    def map_coefficients(self, fn) -> "PhiForm":
        """Apply fn to every coefficient, e.g. to substitute a number."""
        return PhiForm({m: fn(c) for m, c in self.terms.items()})

    def substitute(self, value) -> "PhiForm":
        return self.map_coefficients(lambda c: c(value) if isinstance(c, CoeffPoly) else c)

    def __repr__(self):
        return f"PhiForm({render(self)!r})"


def differentiate_form(f: PhiForm) -> PhiForm:
    """Formal z-derivative, using (phi^(j+1)/phi')' = phi^(j+2)/phi' - (phi''/phi')(phi^(j+1)/phi')."""
    out = []
    for mono, c in f.terms.items():
        orders = mono.orders
        for i, j in enumerate(orders):
            rest = orders[:i] + orders[i + 1:]
            out.append((Monomial(rest + (j + 1,)), c))
            out.append((Monomial(orders + (1,)), -c))
    return PhiForm(out)


def derivative_of_product(f: PhiForm, lam) -> PhiForm:
    """Form G with d/dz[F g] = G g when g' = lam (phi''/phi') g."""
    return differentiate_form(f) + PhiForm.monomial((1,), lam) * f


def compositions(k: int, n: int):
    """Ordered n-tuples of positive integers summing to k."""
    for cuts in itertools.combinations(range(1, k), n - 1):
        edges = (0, *cuts, k)
        yield tuple(edges[i + 1] - edges[i] for i in range(n))


def psi_form(k: int, n: int) -> PhiForm:
    """Sum over compositions of k into n parts of the monomial / prod (j_i + 1)!."""
    if not 1 <= n <= k:
        raise ValueError("psi_form requires 1 <= n <= k")
    return PhiForm([
        (Monomial(js), Fraction(1, math.prod(math.factorial(j + 1) for j in js)))
        for js in compositions(k, n)])


def _lam():
    return CoeffPoly.variable("λ")


def _theta():
    return CoeffPoly.variable("θ")


@lru_cache(maxsize=None)
def omega_form(k: int) -> PhiForm:
    """Omega_k with g^(k) = Omega_k g for g = (phi')^lambda, by the derivative recursion."""
    if k < 0:
        raise ValueError("omega_form requires k >= 0")
    if k == 0:
        return PhiForm.monomial((), CoeffPoly.constant(1, "λ"))
    return derivative_of_product(omega_form(k - 1), _lam())


@lru_cache(maxsize=None)
def c_coefficient(orders: tuple) -> Fraction:
    """Permutation-invariant coefficient c(j_1, ..., j_n) of the Omega closed form."""
    orders = tuple(int(j) for j in orders)
    n = len(orders)
    if n == 0 or any(j < 0 for j in orders):
        raise ValueError("c_coefficient needs a nonempty tuple of nonnegative integers")
    if orders == (1,):
        return Fraction(1)
    if 0 in orders:
        rest = list(orders)
        rest.remove(0)
        if not rest or 0 in rest:
            raise ValueError("at most one zero order is allowed")
        return c_coefficient(tuple(sorted(rest))) / n
    if orders == (0,) or sum(orders) < 1:
        raise ValueError("degree must be positive")
    perms = set(itertools.permutations(orders))
    total = Fraction(0)
    for perm in perms:
        reduced = perm[:-1] + (perm[-1] - 1,)
        total += c_coefficient(tuple(sorted(reduced)))
    return n * total / len(perms)


def _falling(n: int) -> CoeffPoly:
    """(lambda - n + 1)_n = lambda (lambda - 1) ... (lambda - n + 1)."""
    out = CoeffPoly.constant(1, "λ")
    for i in range(n):
        out = out * (_lam() - i)
    return out


def omega_closed_form(k: int) -> PhiForm:
    """Omega_k assembled from Pochhammer factors and the c coefficients."""
    if k < 1:
        raise ValueError("omega_closed_form requires k >= 1")
    out = []
    for n in range(1, k + 1):
        poch = _falling(n)
        for js in compositions(k, n):
            out.append((Monomial(js), poch * c_coefficient(tuple(sorted(js)))))
    return PhiForm(out)


@lru_cache(maxsize=None)
def phi_k_form(k: int) -> PhiForm:
    """Phi_{k,theta} with theta-polynomial coefficients; degree k + 1."""
    if k < 0:
        raise ValueError("phi_k_form requires k >= 0")
    th = _theta()
    out = PhiForm()
    rising = CoeffPoly.constant(1, "θ")  # (theta + 1)_{n-1}
    for n in range(1, k + 2):
        weight = rising * Fraction((-1) ** (n - 1), math.factorial(n))
        out = out + psi_form(k + 1, n) * weight
        rising = rising * (th + n)
    return out * ((k + 1 - th) * math.factorial(k))


def render(f: PhiForm, factor: CoeffPoly | None = None) -> str:
    """Readable rendering, optionally pulling out an exact polynomial factor."""
    if not f.terms:
        return "0"
    if factor is not None:
        inner = {}
        for m, c in f.terms.items():
            q, r = c.divmod(factor)
            if r:
                return render(f)
            inner[m] = q
        return f"({factor.render()})[{render(PhiForm(inner))}]"
    pieces = []
    for m, c in f.terms.items():
        if isinstance(c, CoeffPoly):
            single = len(c.coefficients) == 1
            text = c.render()
            neg = single and text.startswith("-")
            body = text[1:] if neg else text
            coeff = body if single else f"({body})"
        else:
            neg = c < 0
            coeff = str(abs(c))
        mono = m.render()
        if coeff == "1" and mono != "1":
            term = mono
        elif mono == "1":
            term = coeff
        else:
            term = f"{coeff} {mono}"
        pieces.append((neg, term))
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for neg, term in pieces[1:]:
        out += (" - " if neg else " + ") + term
    return out
