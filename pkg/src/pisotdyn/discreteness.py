"""Point sets F_E = { sum_j d_j beta^j : d_j in E } for Pisot beta.

For a finite E in Q(beta) with L*E inside Z[beta], every nonzero z in F_E has
|N(L z)| >= 1, while every other embedding of z is bounded by the geometric
series A_i / (1 - |beta_i|).  That gives the explicit separation bound

    R = L^-d * prod_i (1 - |beta_i|) / A_i

and makes F_E intersected with any bounded window finite.  This module
computes R, lists F_E inside a window (a certified lattice superset, or the
genuine digit sums by breadth-first search) and checks gaps exactly.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath

from .errors import EmptySet, GapViolation, NotPisot
from .numberfield import FieldElement, conjugate_bound

__all__ = [
    "DigitSet",
    "GapReport",
    "WindowEnumeration",
    "conjugate_box",
    "enumerate_window",
    "enumeration_json",
    "gap_bound",
    "separation_bound",
    "sort_exact",
    "theorem_digit_set",
    "verify_min_gap",
    "verify_min_modulus",
]

_BITS = 96


class DigitSet:
    """A finite digit set E together with its least common denominator L."""

    def __init__(self, field, elements):
        self.field = field
        elems = []
        seen = set()
        for e in elements:
            e = field.element(e)
            if e not in seen:
                seen.add(e)
                elems.append(e)
        if not elems:
            raise EmptySet("a digit set needs at least one element")
        self.elements = sort_exact(elems)
        L = 1
        for e in self.elements:
            L = L * e.den // math.gcd(L, e.den)
        self.L = L

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return self.field.element(x) in set(self.elements)

    def difference(self):
        """E - E."""
        return DigitSet(self.field, [a - b for a in self.elements for b in self.elements])

    def __repr__(self):
        return f"DigitSet({[str(e) for e in self.elements]}, L={self.L})"


def _cmp(a, b):
    return (a - b).sign()


def sort_exact(elements):
    return sorted(elements, key=functools.cmp_to_key(_cmp))


def theorem_digit_set(plmap):
    """{+-b_i} together with {0, 1, .., floor(beta)} for the branches of a map."""
    field = plmap.field
    k = field.beta.floor()
    elems = [field.element(j) for j in range(k + 1)]
    for br in plmap.branches:
        elems.extend([br.b, -br.b])
    return DigitSet(field, elems)


def _pisot_moduli(field):
    mods = field.conjugate_modulus_bounds(_BITS)
    if any(hi >= 1 for _, hi in mods):
        mods = field.conjugate_modulus_bounds(4 * _BITS)
        if any(hi >= 1 for _, hi in mods):
            raise NotPisot("some conjugate of beta has modulus >= 1")
    return [hi for _, hi in mods]


def conjugate_box(field, E):
    """Upper bounds B_i >= A_i / (1 - |beta_i|) on every conjugate of F_E."""
    if field.degree == 1:
        return []
    u = _pisot_moduli(field)
    A = conjugate_bound(field, E.elements, _BITS)
    return [a / (1 - ui) for a, ui in zip(A, u)]


def _round_down(q, bits=64):
    if q <= 0:
        return Fraction(0)
    d = Fraction(math.floor(q * (1 << bits)), 1 << bits)
    return d if d > 0 else q


def separation_bound(field, E):
    """Certified rational R such that every nonzero element of F_E has modulus > R.

    E is the differenced digit set (it contains 0); the result is rounded
    down to a 64-bit dyadic.  Returns ``math.inf`` when E = {0}.
    """
    if not isinstance(E, DigitSet):
        E = DigitSet(field, E)
    if all(e.sign() == 0 for e in E.elements):
        return math.inf
    d = field.degree
    if d == 1:
        return Fraction(1, E.L)
    u = _pisot_moduli(field)
    A = conjugate_bound(field, E.elements, _BITS)
    R = Fraction(1, E.L**d)
    for a, ui in zip(A, u):
        R *= (1 - ui) / a
    return _round_down(R)


def gap_bound(field, E):
    """Certified lower bound on gaps between distinct points of F_E, i.e. R(E - E)."""
    if not isinstance(E, DigitSet):
        E = DigitSet(field, E)
    return separation_bound(field, E.difference())


@dataclass
class WindowEnumeration:
    window: tuple
    elements: list
    method: str
    is_superset: bool
    digits: DigitSet = None
    box: list = dc_field(default_factory=list)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self._set()

    def _set(self):
        s = getattr(self, "_cache", None)
        if s is None:
            s = self._cache = set(self.elements)
        return s


def _mp(q):
    return mpmath.mpf(q.numerator) / q.denominator


def _coordinate_ranges(field, L, window, B):
    """Integer ranges for L * (power-basis coordinates) of points in the Minkowski box."""
    d = field.degree
    a, b = window
    with mpmath.workdps(50):
        V = mpmath.matrix(d, d)
        for i, disc in enumerate(field.conjugates):
            z = mpmath.mpc(_mp(disc.center[0]), _mp(disc.center[1]))
            for j in range(d):
                V[i, j] = z**j
        W = V**-1
        ranges = []
        centre = (mpmath.mpf(a) + mpmath.mpf(b)) / 2
        half = (mpmath.mpf(b) - mpmath.mpf(a)) / 2 + mpmath.mpf(2) ** -40
        for j in range(d):
            c = (W[j, 0] * centre).real
            spread = abs(W[j, 0]) * half + sum(abs(W[j, i]) * _mp(B[i - 1]) for i in range(1, d))
            lo = int(mpmath.floor(L * (c - spread))) - 2
            hi = int(mpmath.ceil(L * (c + spread))) + 2
            ranges.append((lo, hi))
    return ranges


def _lattice_box(field, E, window):
    a, b = (field.element(window[0]), field.element(window[1]))
    L = E.L
    d = field.degree
    if d == 1:
        lo = (a * L).floor()
        hi = (b * L).floor() + 1
        out = [field.element(Fraction(k, L)) for k in range(lo, hi + 1)]
        return [z for z in out if a <= z <= b], []
    B = conjugate_box(field, E)
    ranges = _coordinate_ranges(field, L, (float(a), float(b)), B)
    out = []
    for vec in itertools.product(*(range(lo, hi + 1) for lo, hi in ranges)):
        z = FieldElement._canonical(field, list(vec), L)
        if z < a or z > b:
            continue
        lows = field.embedding_abs_bounds(z, _BITS)
        if any(lo_i > Bi for (lo_i, _), Bi in zip(lows, B)):
            continue
        out.append(z)
    return out, B


def _digit_bfs(field, E, window):
    a, b = (field.element(window[0]), field.element(window[1]))
    beta = field.beta
    digits = E.elements
    dmin, dmax = digits[0], digits[-1]
    bm1 = beta - 1
    u_lo = sort_exact([a, -dmax / bm1])[0]
    u_hi = sort_exact([b, -dmin / bm1])[-1]
    seen = set()
    frontier = []
    for d in digits:
        if u_lo <= d <= u_hi and d not in seen:
            seen.add(d)
            frontier.append(d)
    while frontier:
        nxt = []
        for z in frontier:
            bz = beta * z
            for d in digits:
                w = bz + d
                if w in seen:
                    continue
                if w < u_lo or w > u_hi:
                    continue
                seen.add(w)
                nxt.append(w)
        frontier = nxt
    return [z for z in seen if a <= z <= b]


def enumerate_window(field, E, window, method="lattice-box"):
    """F_E inside the closed window [a, b].

    ``lattice-box`` returns a certified superset; ``digit-bfs`` returns exactly
    the digit sums, generated by z -> beta z + d and pruned by the interval
    outside of which the real embedding can never return to the window.
    """
    if not isinstance(E, DigitSet):
        E = DigitSet(field, E)
    if method == "lattice-box":
        elems, B = _lattice_box(field, E, window)
        return WindowEnumeration(window, sort_exact(elems), method, True, E, B)
    if method == "digit-bfs":
        if field.degree > 1:
            _pisot_moduli(field)
        elems = _digit_bfs(field, E, window)
        return WindowEnumeration(window, sort_exact(elems), method, False, E)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class GapReport:
    min_gap: object
    bound: object
    strict: bool
    passed: bool
    count: int

    def to_dict(self):
        g = self.min_gap
        return {
            "min_gap": None if g is math.inf else [str(c) for c in g.coords],
            "min_gap_decimal": "inf" if g is math.inf else g.to_decimal(20),
            "bound": str(self.bound),
            "strict": self.strict,
            "passed": self.passed,
            "count": self.count,
        }


def verify_min_gap(enumeration, R, strict=True):
    """Exact minimum gap of the listed points, checked against R (> if strict, else >=)."""
    elems = enumeration.elements if isinstance(enumeration, WindowEnumeration) else sort_exact(enumeration)
    if len(elems) < 2:
        return GapReport(math.inf, R, strict, True, len(elems))
    gaps = [y - x for x, y in zip(elems, elems[1:])]
    g = functools.reduce(lambda p, q: p if p <= q else q, gaps)
    if R is math.inf:
        ok = False
    else:
        ok = g > R if strict else g >= R
    if not ok:
        raise GapViolation(f"minimum gap {g.to_decimal(12)} does not exceed R = {R}")
    return GapReport(g, R, strict, True, len(elems))


def verify_min_modulus(enumeration, R):
    """Smallest |z| over the nonzero listed points, checked to exceed R."""
    elems = enumeration.elements if isinstance(enumeration, WindowEnumeration) else list(enumeration)
    nonzero = [abs(z) for z in elems if z.sign() != 0]
    if not nonzero:
        return math.inf
    m = functools.reduce(lambda p, q: p if p <= q else q, nonzero)
    if R is not math.inf and not m > R:
        raise GapViolation(f"nonzero point of modulus {m.to_decimal(12)} does not exceed R = {R}")
    return m


def enumeration_json(enum, R=None, gap=None):
    data = {
        "window": [str(enum.window[0]), str(enum.window[1])],
        "method": enum.method,
        "is_superset": enum.is_superset,
        "count": len(enum.elements),
        "elements": [[str(c) for c in z.coords] for z in enum.elements],
        "decimals": [z.to_decimal(15) for z in enum.elements],
    }
    if enum.digits is not None:
        data["digits"] = [[str(c) for c in z.coords] for z in enum.digits.elements]
        data["L"] = enum.digits.L
    if R is not None:
        data["bound_R"] = str(R)
    if gap is not None:
        data["gap"] = gap.to_dict()
    return json.dumps(data, indent=2)
