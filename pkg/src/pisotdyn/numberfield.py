"""Exact arithmetic in Q(beta) for a real algebraic integer beta > 1.

Elements are stored in the power basis 1, beta, ..., beta^(d-1) as an integer
numerator vector over a common positive denominator.  Every order decision
(sign, floor, comparison) is made with certified rational enclosures of the
distinguished real embedding; the basis is linearly independent over Q, so an
element is zero exactly when all of its coordinates are.

Conjugates are kept as discs with exact rational centres and radii.  The
radii come from the Weierstrass/Smith inclusion theorem: for approximations
z_1..z_d of the roots of a monic polynomial p, the discs
``|z - z_i| <= d * |p(z_i) / prod_{j != i} (z_i - z_j)|`` cover all roots and
pairwise disjoint discs contain exactly one root each.
"""

from __future__ import annotations

import enum
import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import mpmath

from .errors import (
    EmptySet,
    FieldDivisionByZero,
    FieldMismatch,
    NoRootInInterval,
    NotMonic,
    ParseError,
    Reducible,
    RefinementBudgetExceeded,
    RootNotGreaterThanOne,
)

__all__ = [
    "Classification",
    "ConjugateDisc",
    "FieldElement",
    "NumberField",
    "classify",
    "conjugate_bound",
    "fe_floor",
    "fe_frac",
    "fe_sign",
    "format_field_spec",
    "make_field",
    "parse_field_spec",
]

# Smallest disc radius guaranteed at construction.
_INITIAL_RADIUS_BITS = 64
_CLASSIFY_BUDGET_BITS = 4096


# ---------------------------------------------------------------------------
# rational polynomial helpers (coefficient lists, lowest degree first)


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _peval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _pderiv(p):
    return _trim([k * p[k] for k in range(1, len(p))] or [Fraction(0)])


def _prem(a, b):
    """Remainder of a divided by b over Q."""
    a = [Fraction(c) for c in a]
    b = _trim(b)
    db = len(b) - 1
    lead = Fraction(b[-1])
    while len(a) - 1 >= db and any(a):
        a = _trim(a)
        if len(a) - 1 < db or (len(a) == 1 and a[0] == 0):
            break
        q = a[-1] / lead
        shift = len(a) - 1 - db
        for j in range(len(b)):
            a[shift + j] -= q * b[j]
        a.pop()
        if not a:
            a = [Fraction(0)]
    return _trim(a) if a else [Fraction(0)]


def _sturm(p):
    seq = [_trim([Fraction(c) for c in p]), _pderiv(p)]
    while not (len(seq[-1]) == 1 and seq[-1][0] == 0) and len(seq[-1]) > 1:
        r = _prem(seq[-2], seq[-1])
        if len(r) == 1 and r[0] == 0:
            break
        seq.append([-c for c in r])
    return seq


def _sign_changes(values):
    signs = [v for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def _sturm_at(seq, x):
    return _sign_changes([_peval(s, x) for s in seq])


def _sturm_at_neg_inf(seq):
    vals = []
    for s in seq:
        deg = len(s) - 1
        lead = s[-1]
        vals.append(lead if deg % 2 == 0 else -lead)
    return _sign_changes(vals)


def _count_real_roots(seq, a, b):
    """Number of distinct real roots in the half-open interval (a, b]."""
    return _sturm_at(seq, a) - _sturm_at(seq, b)


def _bisect(p, lo, hi, width):
    """Shrink a sign-change bracket [lo, hi] of p to the given width."""
    plo = _peval(p, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        pm = _peval(p, mid)
        if pm == 0:
            return mid, mid
        if (pm > 0) == (plo > 0):
            lo, plo = mid, pm
        else:
            hi = mid
    return lo, hi


def _cauchy_bound(poly):
    """Every complex root of the monic poly has modulus < this integer."""
    return 1 + max(abs(c) for c in poly[:-1]) if len(poly) > 1 else 1


def _mpf_to_fraction(x):
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    if not man:
        return Fraction(0)
    man = int(man)
    if sign:
        man = -man
    return Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)


def _sqrt_up(q, bits=96):
    """Rational upper bound of sqrt(q) for a nonnegative rational q."""
    if q <= 0:
        return Fraction(0)
    scale = 1 << (2 * bits)
    num = -((-q.numerator * scale) // q.denominator)
    s = math.isqrt(num)
    if s * s < num:
        s += 1
    return Fraction(s, 1 << bits)


def _sqrt_down(q, bits=96):
    if q <= 0:
        return Fraction(0)
    scale = 1 << (2 * bits)
    return Fraction(math.isqrt((q.numerator * scale) // q.denominator), 1 << bits)


# complex rationals are (re, im) pairs of Fractions


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _csub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _cabs2(a):
    return a[0] * a[0] + a[1] * a[1]


def _cpeval(p, z):
    acc = (Fraction(0), Fraction(0))
    for c in reversed(p):
        acc = _cmul(acc, z)
        acc = (acc[0] + c, acc[1])
    return acc


def _taylor_at(p, z):
    """Coefficients of p(z + h) as a polynomial in h (repeated synthetic division)."""
    coeffs = [(Fraction(c), Fraction(0)) for c in p]
    n = len(coeffs)
    out = []
    for _ in range(n):
        # divide coeffs by (h - z): Horner from the top
        acc = (Fraction(0), Fraction(0))
        quotient = []
        for c in reversed(coeffs):
            acc = _cmul(acc, z)
            acc = (acc[0] + c[0], acc[1] + c[1])
            quotient.append(acc)
        out.append(quotient[-1])
        coeffs = list(reversed(quotient[:-1]))
        if not coeffs:
            break
    return out


def _is_irreducible(poly):
    """Irreducibility over Q of a monic integer polynomial."""
    d = len(poly) - 1
    if d == 1:
        return True
    c0 = poly[0]
    if c0 == 0:
        return False
    # rational root test: roots of a monic integer polynomial are integer divisors of c0
    for r in _divisors(abs(c0)):
        for cand in (r, -r):
            if _peval(poly, Fraction(cand)) == 0:
                return False
    if d <= 3:
        return True
    import sympy

    x = sympy.Symbol("x")
    expr = sum(int(c) * x**k for k, c in enumerate(poly))
    return sympy.Poly(expr, x, domain="ZZ").is_irreducible


def _divisors(n):
    if n <= 0:
        return []
    small = []
    large = []
    k = 1
    while k * k <= n:
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
        k += 1
        if k > 10**6:
            raise ValueError("constant term too large for the rational root test")
    return small + large[::-1]


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjugateDisc:
    """Closed disc |z - center| <= radius containing exactly one root."""

    center: tuple
    radius: Fraction

    def modulus_bounds(self, bits=96):
        m2 = _cabs2(self.center)
        return (max(Fraction(0), _sqrt_down(m2, bits) - self.radius),
                _sqrt_up(m2, bits) + self.radius)

    @property
    def is_real(self):
        return self.center[1] == 0

    def approx(self):
        return complex(float(self.center[0]), float(self.center[1]))


class Classification(enum.Enum):
    PISOT = "Pisot"
    PERRON_ONLY = "PerronOnly"
    NEITHER = "Neither"
    UNDECIDED = "Undecided"

    def __str__(self):
        return self.value


class NumberField:
    """Q(beta) for the real root beta > 1 of a monic irreducible integer polynomial.

    ``min_poly`` lists coefficients from the constant term upwards.  Instances
    are immutable; enclosure caches are filled lazily and only ever tightened.
    """

    def __init__(self, min_poly, root_interval, conjugates=None, *, _checked=False):
        poly = tuple(int(c) for c in min_poly)
        if not _checked:
            _validate_poly(poly)
        self.min_poly = poly
        self.degree = len(poly) - 1
        self._sturm = _sturm([Fraction(c) for c in poly])
        lo, hi = (Fraction(root_interval[0]), Fraction(root_interval[1]))
        if not _checked:
            lo, hi = _isolate_root(poly, self._sturm, lo, hi)
        self.root_interval = (lo, hi)
        self._lock = threading.Lock()
        self._beta_encl = (lo, hi)
        self._pow_cache = {}
        self._disc_cache = {}
        self.key = (poly, _sturm_at_neg_inf(self._sturm) - _sturm_at(self._sturm, lo))
        if conjugates is None:
            conjugates = self.conjugate_discs(_INITIAL_RADIUS_BITS)
        self.conjugates = tuple(conjugates)
        self.zero = FieldElement(self, (0,) * self.degree, 1)
        self.one = self.element(1)
        self.beta = self.element([0, 1]) if self.degree > 1 else self.element(-poly[0])

    # -- construction helpers ------------------------------------------------

    def element(self, value):
        """Coerce an int, Fraction, decimal string or coordinate list into the field."""
        if isinstance(value, FieldElement):
            if value.field.key != self.key:
                raise FieldMismatch("element belongs to a different field")
            return value
        if isinstance(value, (list, tuple)):
            coords = [Fraction(c) for c in value]
            if len(coords) > self.degree:
                extra = coords[self.degree:]
                if any(extra):
                    # reduce a polynomial expression in beta
                    acc = self.zero
                    for c in reversed(coords):
                        acc = acc * self.beta + self.element(c)
                    return acc
                coords = coords[: self.degree]
            coords = coords + [Fraction(0)] * (self.degree - len(coords))
        else:
            coords = [Fraction(value)] + [Fraction(0)] * (self.degree - 1)
        return FieldElement.from_fractions(self, coords)

    __call__ = element

    def refined(self, bits):
        """A new field value whose stored conjugate discs have radius <= 2^-bits."""
        discs = self.conjugate_discs(bits)
        return NumberField(self.min_poly, self.root_interval, discs, _checked=True)

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"NumberField(min_poly={list(self.min_poly)}, beta~{float(self.beta_lower()):.6f})"

    @property
    def is_integer_base(self):
        return self.degree == 1

    # -- real embedding --------------------------------------------------------

    def beta_enclosure(self, bits):
        """Rational (lo, hi) around beta with hi - lo <= 2^-bits."""
        lo, hi = self._beta_encl
        width = Fraction(1, 1 << bits)
        if hi - lo <= width:
            return lo, hi
        if self.degree == 1:
            b = Fraction(-self.min_poly[0])
            return b, b
        lo, hi = self._refine_beta(lo, hi, bits)
        with self._lock:
            if hi - lo < self._beta_encl[1] - self._beta_encl[0]:
                self._beta_encl = (lo, hi)
        return lo, hi

    def beta_lower(self):
        return self.beta_enclosure(60)[0]

    def _refine_beta(self, lo, hi, bits):
        p = [Fraction(c) for c in self.min_poly]
        target = Fraction(1, 1 << bits)
        lo, hi = _bisect(p, lo, hi, Fraction(1, 1 << 48))
        if hi - lo <= target:
            return lo, hi
        coeffs = [int(c) for c in reversed(self.min_poly)]
        with mpmath.workprec(bits + 48):
            start = mpmath.mpf(lo.numerator) / lo.denominator
            try:
                g = _mpf_to_fraction(mpmath.findroot(lambda x: mpmath.polyval(coeffs, x), start))
            except (ValueError, ZeroDivisionError):
                g = (lo + hi) / 2
        a, b = g - target / 4, g + target / 4
        if lo <= a and b <= hi:
            pa, pb = _peval(p, a), _peval(p, b)
            if pa != 0 and pb != 0 and (pa > 0) != (pb > 0):
                return a, b
        return _bisect(p, lo, hi, target)

    def pow_bounds(self, K):
        """Integer bounds (lo_i, hi_i) on beta^i * 2^K for i < degree, width <= 3."""
        cached = self._pow_cache.get(K)
        if cached is not None:
            return cached
        d = self.degree
        extra = 8 + d * max(1, _cauchy_bound(self.min_poly).bit_length())
        lo, hi = self.beta_enclosure(K + extra)
        out = []
        scale = 1 << K
        for i in range(d):
            l = lo**i * scale
            h = hi**i * scale
            out.append((math.floor(l), math.ceil(h)))
        out = tuple(out)
        with self._lock:
            self._pow_cache[K] = out
        return out

    # -- conjugates ------------------------------------------------------------

    def conjugate_discs(self, bits):
        """Certified disjoint discs of radius <= 2^-bits; index 0 holds beta."""
        with self._lock:
            for b, discs in self._disc_cache.items():
                if b >= bits:
                    return discs
        d = self.degree
        if d == 1:
            beta = Fraction(-self.min_poly[0])
            discs = (ConjugateDisc((beta, Fraction(0)), Fraction(0)),)
            return discs
        prec = max(bits + 32, 96)
        limit = Fraction(1, 1 << bits)
        blo, bhi = self.beta_enclosure(bits + 8)
        for _ in range(12):
            discs = self._try_discs(prec, blo, bhi)
            if discs is not None and all(disc.radius <= limit for disc in discs):
                with self._lock:
                    self._disc_cache[bits] = discs
                return discs
            prec *= 2
        raise RefinementBudgetExceeded("could not certify conjugate discs")

    def _try_discs(self, prec, blo, bhi):
        p = [Fraction(c) for c in self.min_poly]
        coeffs = [int(c) for c in reversed(self.min_poly)]
        with mpmath.workprec(prec + 20):
            try:
                roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=prec)
            except mpmath.libmp.NoConvergence:
                return None
            approx = []
            for r in roots:
                if isinstance(r, mpmath.mpc):
                    approx.append((_mpf_to_fraction(r.real), _mpf_to_fraction(r.imag)))
                else:
                    approx.append((_mpf_to_fraction(r), Fraction(0)))
        d = len(approx)
        radii = []
        for i, z in enumerate(approx):
            pz = _cpeval(p, z)
            den = (Fraction(1), Fraction(0))
            for j, w in enumerate(approx):
                if j != i:
                    den = _cmul(den, _csub(z, w))
            dd = _cabs2(den)
            if dd == 0:
                return None
            radii.append(_sqrt_up(d * d * _cabs2(pz) / dd, prec))
        # a centre on the real axis forces the unique root of its disc to be
        # real (the disc is its own mirror image); nearly-real centres are
        # snapped onto the axis with an enlarged radius before the check
        snapped = []
        for z, r in zip(approx, radii):
            if z[1] != 0 and abs(z[1]) <= r:
                snapped.append(((z[0], Fraction(0)), r + abs(z[1])))
            else:
                snapped.append((z, r))
        for i in range(d):
            for j in range(i + 1, d):
                gap2 = _cabs2(_csub(snapped[i][0], snapped[j][0]))
                if gap2 <= (snapped[i][1] + snapped[j][1]) ** 2:
                    return None
        # distinguished root: the disc meeting the certified beta interval
        idx = None
        for i, (z, r) in enumerate(snapped):
            if z[1] == 0 and z[0] - r <= bhi and blo <= z[0] + r:
                idx = i
                break
        if idx is None:
            return None
        order = [idx] + [i for i in range(d) if i != idx]
        return tuple(ConjugateDisc(snapped[i][0], snapped[i][1]) for i in order)

    def conjugate_modulus_bounds(self, bits=_INITIAL_RADIUS_BITS):
        """(lower, upper) rational bounds on |beta^(i)| for the d-1 other conjugates."""
        discs = self.conjugate_discs(bits)
        return [disc.modulus_bounds(bits + 8) for disc in discs[1:]]

    def embedding_abs_bounds(self, x, bits=_INITIAL_RADIUS_BITS):
        """Certified (lower, upper) bounds on |phi_i(x)| for each non-distinguished embedding."""
        x = self.element(x)
        discs = self.conjugate_discs(bits)
        poly = list(x.coords)
        out = []
        for disc in discs[1:]:
            taylor = _taylor_at(poly, disc.center)
            head = _cabs2(taylor[0])
            tail = Fraction(0)
            rk = Fraction(1)
            for t in taylor[1:]:
                rk *= disc.radius
                tail += _sqrt_up(_cabs2(t), bits + 8) * rk
            lo = max(Fraction(0), _sqrt_down(head, bits + 8) - tail)
            hi = _sqrt_up(head, bits + 8) + tail
            out.append((lo, hi))
        return out


def _validate_poly(poly):
    if len(poly) < 2:
        raise NotMonic("polynomial must have degree >= 1")
    if poly[-1] != 1:
        raise NotMonic(f"leading coefficient is {poly[-1]}, expected 1")
    if not _is_irreducible(list(poly)):
        raise Reducible(f"{list(poly)} is reducible over Q")


def _isolate_root(poly, seq, lo, hi):
    if lo > hi:
        lo, hi = hi, lo
    p = [Fraction(c) for c in poly]
    # closed interval [lo, hi]: count roots in (lo, hi] plus a root at lo
    n = _count_real_roots(seq, lo, hi) + (1 if _peval(p, lo) == 0 else 0)
    if n == 0:
        raise NoRootInInterval(f"no root of {list(poly)} in [{lo}, {hi}]")
    if n > 1:
        raise NoRootInInterval(f"{n} roots of {list(poly)} in [{lo}, {hi}]; interval must isolate one")
    if _peval(p, lo) == 0:
        root = lo
        if root <= 1:
            raise RootNotGreaterThanOne(f"root {root} is not > 1")
        return root, root
    if _peval(p, hi) == 0:
        if hi <= 1:
            raise RootNotGreaterThanOne(f"root {hi} is not > 1")
        return hi, hi
    if hi <= 1:
        raise RootNotGreaterThanOne("isolated root is not > 1")
    one = Fraction(1)
    if lo < one:
        if _peval(p, one) == 0 or _count_real_roots(seq, lo, one) > 0:
            raise RootNotGreaterThanOne("isolated root is not > 1")
        lo = one
    return lo, hi


def make_field(min_poly, root_hint=None):
    """Build Q(beta) from a monic integer polynomial (constant term first).

    ``root_hint`` is a rational interval isolating beta; when omitted the
    largest real root is used.
    """
    poly = tuple(int(c) for c in min_poly)
    _validate_poly(poly)
    if root_hint is None:
        seq = _sturm([Fraction(c) for c in poly])
        bound = Fraction(_cauchy_bound(poly))
        if _count_real_roots(seq, Fraction(1), bound) == 0:
            raise RootNotGreaterThanOne(f"{list(poly)} has no real root > 1")
        lo, hi = Fraction(1), bound
        while _count_real_roots(seq, lo, hi) > 1:
            mid = (lo + hi) / 2
            if _count_real_roots(seq, mid, hi) >= 1:
                lo = mid
            else:
                hi = mid
        root_hint = (lo, hi)
    return NumberField(poly, root_hint, _checked=False)


# ---------------------------------------------------------------------------


class FieldElement:
    """An element of Q(beta) in canonical power-basis coordinates."""

    __slots__ = ("field", "nums", "den", "_hash")

    def __init__(self, field, nums, den):
        self.field = field
        self.nums = nums
        self.den = den
        self._hash = None

    @classmethod
    def _canonical(cls, field, nums, den):
        if den < 0:
            nums = [-n for n in nums]
            den = -den
        g = den
        for n in nums:
            if n:
                g = math.gcd(g, n)
                if g == 1:
                    break
        if not any(nums):
            return cls(field, (0,) * field.degree, 1)
        if g != 1:
            nums = [n // g for n in nums]
            den //= g
        return cls(field, tuple(nums), den)

    @classmethod
    def from_fractions(cls, field, coords):
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in coords), 1)
        nums = [c.numerator * (den // c.denominator) for c in coords]
        return cls._canonical(field, nums, den)

    @property
    def coords(self):
        return tuple(Fraction(n, self.den) for n in self.nums)

    @property
    def is_rational(self):
        return not any(self.nums[1:])

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field.key, self.nums, self.den))
        return self._hash

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field.key != self.field.key:
                raise FieldMismatch("operands belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.element(other)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field.key == other.field.key and self.nums == other.nums and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.is_rational and Fraction(self.nums[0], self.den) == other
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d1, d2 = self.den, other.den
        if d1 == d2:
            return FieldElement._canonical(self.field, [a + b for a, b in zip(self.nums, other.nums)], d1)
        return FieldElement._canonical(
            self.field, [a * d2 + b * d1 for a, b in zip(self.nums, other.nums)], d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-n for n in self.nums), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, int):
            return FieldElement._canonical(self.field, [n * other for n in self.nums], self.den)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        nums = _mul_reduce(self.nums, other.nums, self.field.min_poly)
        return FieldElement._canonical(self.field, nums, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self):
        if not any(self.nums):
            raise FieldDivisionByZero("division by zero in Q(beta)")
        d = self.field.degree
        if d == 1:
            return self.field.element(Fraction(self.den, self.nums[0]))
        # columns of the multiplication-by-self matrix
        cols = []
        cur = list(self.nums)
        for _ in range(d):
            cols.append(cur)
            cur = _mul_reduce(cur, [0, 1] + [0] * (d - 2), self.field.min_poly)
        mat = [[Fraction(cols[j][i]) for j in range(d)] for i in range(d)]
        rhs = [Fraction(self.den)] + [Fraction(0)] * (d - 1)
        sol = _solve(mat, rhs)
        return FieldElement.from_fractions(self.field, sol)

    def __truediv__(self, other):
        if isinstance(other, int):
            if other == 0:
                raise FieldDivisionByZero("division by zero in Q(beta)")
            return FieldElement._canonical(self.field, list(self.nums), self.den * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- order -------------------------------------------------------------------

    def bounds_scaled(self, K):
        """Integers (lo, hi) with lo <= value * den * 2^K <= hi."""
        pb = self.field.pow_bounds(K)
        lo = hi = 0
        for n, (a, b) in zip(self.nums, pb):
            if n >= 0:
                lo += n * a
                hi += n * b
            else:
                lo += n * b
                hi += n * a
        return lo, hi

    def enclosure(self, bits=64):
        """Rational (lo, hi) containing the real value with hi - lo <= 2^-bits."""
        if self.is_rational:
            v = Fraction(self.nums[0], self.den)
            return v, v
        mag = sum(abs(n) for n in self.nums).bit_length()
        K = max(bits + mag - self.den.bit_length() + 4, 32)
        while True:
            lo, hi = self.bounds_scaled(K)
            scale = self.den << K
            flo, fhi = Fraction(lo, scale), Fraction(hi, scale)
            if fhi - flo <= Fraction(1, 1 << bits):
                return flo, fhi
            K += 32

    def sign(self):
        if not any(self.nums):
            return 0
        if self.is_rational:
            return 1 if self.nums[0] > 0 else -1
        K = 64
        budget = None
        while True:
            lo, hi = self.bounds_scaled(K)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            if K >= 512 and budget is None:
                budget = self._sign_budget_bits()
            if budget is not None and K > budget:
                raise RefinementBudgetExceeded(
                    f"sign undecided at {K} bits (certified budget {budget})")
            K *= 2

    def _sign_budget_bits(self):
        # |sum n_i beta^i| >= 1 / (sum |n_j| R^j)^(d-1) because the norm of a
        # nonzero algebraic integer is a nonzero rational integer.
        R = _cauchy_bound(self.field.min_poly)
        h = sum(abs(n) * R**j for j, n in enumerate(self.nums))
        d = self.field.degree
        return (d - 1) * h.bit_length() + (3 * sum(abs(n) for n in self.nums)).bit_length() + 8

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() < 0

    def __le__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() <= 0

    def __gt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() > 0

    def __ge__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() >= 0

    def floor(self):
        if self.is_rational:
            return self.nums[0] // self.den
        bits = 16
        while True:
            lo, hi = self.enclosure(bits)
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
            bits *= 2
            if bits > 1 << 20:
                raise RefinementBudgetExceeded("floor undecided")

    def frac(self):
        return self - self.floor()

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        if self.is_rational:
            return self.nums[0] / self.den
        bits = 60
        while True:
            lo, hi = self.enclosure(bits)
            mid = (lo + hi) / 2
            if mid and (hi - lo) <= abs(mid) / (1 << 56):
                return float(mid)
            if not mid and bits > 4096:
                return 0.0
            bits *= 2

    def to_decimal(self, digits=17):
        """Decimal string correct to within one unit in the last place."""
        lo, hi = self.enclosure(int(digits * 3.33) + 8)
        mid = (lo + hi) / 2
        scaled = round(mid * 10**digits)
        sign = "-" if scaled < 0 else ""
        scaled = abs(scaled)
        whole, part = divmod(scaled, 10**digits)
        return f"{sign}{whole}.{part:0{digits}d}" if digits > 0 else f"{sign}{whole}"

    def __repr__(self):
        return f"FieldElement({[str(c) for c in self.coords]})"

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coords):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            else:
                power = "b" if k == 1 else f"b^{k}"
                terms.append(power if c == 1 else f"{c}*{power}")
        return " + ".join(terms) if terms else "0"


def _mul_reduce(a, b, poly):
    d = len(poly) - 1
    prod = [0] * (2 * d - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    prod[i + j] += x * y
    for k in range(2 * d - 2, d - 1, -1):
        c = prod[k]
        if c:
            base = k - d
            for j in range(d):
                if poly[j]:
                    prod[base + j] -= c * poly[j]
    return prod[:d]


def _solve(mat, rhs):
    n = len(mat)
    a = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [v / pv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


# ---------------------------------------------------------------------------
# operations


def fe_sign(x):
    return x.sign()


def fe_floor(x):
    return x.floor()


def fe_frac(x):
    return x.frac()


def classify(field, budget_bits=_CLASSIFY_BUDGET_BITS):
    """Pisot / PerronOnly / Neither, decided with certified conjugate discs.

    A conjugate of modulus exactly 1 or exactly beta cannot be separated by
    refinement.  Two exact tests cover the usual sources of such conjugates:
    p(x) = q(x^k) puts zeta*beta among the conjugates, and a reciprocal p of
    degree >= 3 rules out Pisot.  Anything else still tied at
    ``budget_bits`` is reported as UNDECIDED.
    """
    d = field.degree
    if d == 1:
        return Classification.PISOT
    equal_modulus = _has_rotated_root(field.min_poly)
    # for a reciprocal polynomial of degree >= 3 the roots other than beta and
    # 1/beta are closed under z -> 1/z, so one of them has modulus >= 1
    not_pisot = d >= 3 and _is_reciprocal(field.min_poly)
    bits = _INITIAL_RADIUS_BITS
    while bits <= budget_bits:
        discs = field.conjugate_discs(bits)
        blo, bhi = field.beta_enclosure(bits + 8)
        inside = outside = below_beta = above_beta = 0
        for disc in discs[1:]:
            lo, hi = disc.modulus_bounds(bits + 8)
            if hi < 1:
                inside += 1
            elif lo > 1:
                outside += 1
            if hi < blo:
                below_beta += 1
            elif lo > bhi:
                above_beta += 1
        others = d - 1
        if inside == others and not not_pisot:
            return Classification.PISOT
        if above_beta or equal_modulus:
            return Classification.NEITHER
        if (outside or not_pisot) and below_beta == others:
            return Classification.PERRON_ONLY
        bits *= 2
    return Classification.UNDECIDED


def _is_reciprocal(poly):
    return list(poly) == list(reversed(poly)) or list(poly) == [-c for c in reversed(poly)]


def _has_rotated_root(poly):
    # p(x) = q(x^k), k >= 2  =>  zeta_k * beta is a conjugate of modulus beta
    g = 0
    for k, c in enumerate(poly):
        if c:
            g = math.gcd(g, k)
    return g >= 2


def conjugate_bound(field, elements, bits=_INITIAL_RADIUS_BITS):
    """Rational upper bounds A_2..A_d on max |phi_i(e)| over the finite set."""
    elements = [field.element(e) for e in elements]
    if not elements:
        raise EmptySet("conjugate_bound needs a nonempty set")
    if field.degree == 1:
        return []
    bounds = [Fraction(0)] * (field.degree - 1)
    for e in elements:
        if not any(e.nums):
            continue
        for i, (_, hi) in enumerate(field.embedding_abs_bounds(e, bits)):
            bounds[i] = max(bounds[i], hi)
    return bounds


# ---------------------------------------------------------------------------
# field description files

_FIELD_RE = re.compile(
    r"poly\s*=\s*\[(?P<poly>[^\]]*)\]\s*(?:;\s*root\s*(?:in|=)\s*\[(?P<lo>[^,\]]+),(?P<hi>[^\]]+)\])?",
    re.IGNORECASE,
)


def _clean(text):
    return text.replace("−", "-").strip()


def parse_field_spec(text):
    """Parse ``poly = [c0, c1, ...]; root in [lo, hi]`` (root part optional)."""
    text = _clean(text)
    m = _FIELD_RE.search(text)
    if not m:
        raise ParseError(f"not a field description: {text!r}")
    try:
        poly = [int(c) for c in m.group("poly").split(",") if c.strip()]
        hint = None
        if m.group("lo") is not None:
            hint = (Fraction(m.group("lo").strip()), Fraction(m.group("hi").strip()))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    return make_field(poly, hint)


def format_field_spec(field):
    lo, hi = field.root_interval
    return f"poly = [{', '.join(str(c) for c in field.min_poly)}]; root in [{lo}, {hi}]"
