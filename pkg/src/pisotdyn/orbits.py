"""Orbits of piecewise linear maps: exact, certified-numeric, and statistical.

Exact orbits of x0 in Q(beta) never leave the lattice (1/L) Z[beta], where L
clears the denominators of x0, the intercepts and the breakpoints.  The
:class:`LatticeStepper` exploits this by keeping the integer coordinate
vector of L*x and stepping it with the integer matrix of beta^m.  Branch
decisions use a float evaluation with an explicit error bound and fall back
to the exact sign test of :mod:`pisotdyn.numberfield` when the bound does not
separate the point from a breakpoint.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath

from .errors import BudgetExceeded, EmptyOrbit, OutOfDomain, PrecisionExhausted
from .maps import PLMap
from .numberfield import FieldElement, conjugate_bound

__all__ = [
    "ExactOrbit",
    "LatticeStepper",
    "NumericOrbit",
    "PeriodicityCertificate",
    "bits_source",
    "certificate_json",
    "detect_eventual_period",
    "iterate_exact",
    "iterate_numeric",
    "mpmath_source",
    "occupation_histogram",
    "orbit_csv",
    "orbit_floats",
    "period_bound",
    "rational_source",
    "seed_point",
]

DEFAULT_STEP_BUDGET = 10**6


def _lcm(a, b):
    return a * b // math.gcd(a, b)


def _int_matrix_power(field, m):
    """Integer matrix of multiplication by beta^m in the power basis (columns)."""
    d = field.degree
    cols = []
    for j in range(d):
        e = field.beta ** (j + m)
        if e.den != 1:
            raise ValueError("beta must be an algebraic integer")
        cols.append(e.nums)
    return tuple(tuple(cols[j][i] for j in range(d)) for i in range(d))


class LatticeStepper:
    """Exact orbit iteration on integer coordinate vectors.

    The current point is x = (sum_j v[j] beta^j) / L.
    """

    def __init__(self, plmap: PLMap, x0):
        self.map = plmap
        field = self.field = plmap.field
        x0 = field.element(x0)
        if x0.sign() < 0 or x0 > 1:
            raise OutOfDomain(f"x0 = {x0} is not in [0, 1]")
        L = x0.den
        for br in plmap.branches:
            for e in (br.left, br.right, br.b):
                L = _lcm(L, e.den)
        self.L = L
        self.d = field.degree
        self.beta_f = float(field.beta)
        self._pows_f = [self.beta_f**j for j in range(self.d)]
        self._mats = {}
        self._branch_data = []
        for br in plmap.branches:
            mat = self._mats.get(br.m)
            if mat is None:
                mat = self._mats[br.m] = _int_matrix_power(field, br.m)
            bvec = self._scaled(br.b)
            self._branch_data.append((br.epsilon, mat, bvec, br.m))
        pts = plmap.breakpoints()
        self._pts = [self._scaled(p) for p in pts]
        self._pts_f = [float(p) for p in pts]
        self._pt_owner = [plmap.branch_at(p) for p in pts]
        self._gap_owner = []
        for a, b in zip(pts, pts[1:]):
            mid = (a + b) / 2
            self._gap_owner.append(plmap.branch_at(mid))
        self.v = self._scaled(x0)
        # error factor for the float evaluation of sum v_j beta^j / L
        self._err_c = 8 * (self.d + 2) * 2.0**-52
        self.exact_fallbacks = 0

    def _scaled(self, e):
        k = self.L // e.den
        return tuple(n * k for n in e.nums)

    def element(self, v=None):
        v = self.v if v is None else v
        return FieldElement._canonical(self.field, list(v), self.L)

    def float_value(self, v=None):
        v = self.v if v is None else v
        L = self.L
        acc = 0.0
        mag = 0.0
        for n, p in zip(v, self._pows_f):
            t = (n / L) * p
            acc += t
            mag += abs(t)
        return acc, mag * self._err_c + 1e-300

    def _cmp(self, v, k, xf, err):
        """Sign of x - breakpoint k."""
        diff = xf - self._pts_f[k]
        tol = err + abs(self._pts_f[k]) * 4.0e-16
        if diff > tol:
            return 1
        if diff < -tol:
            return -1
        self.exact_fallbacks += 1
        p = self._pts[k]
        return FieldElement._canonical(self.field, [a - b for a, b in zip(v, p)], self.L).sign()

    def locate(self, v=None):
        v = self.v if v is None else v
        xf, err = self.float_value(v)
        lo, hi = 0, len(self._pts) - 1
        c = self._cmp(v, lo, xf, err)
        if c < 0:
            raise OutOfDomain("orbit left [0, 1]")
        if c == 0:
            return self._pt_owner[0]
        c = self._cmp(v, hi, xf, err)
        if c > 0:
            raise OutOfDomain("orbit left [0, 1]")
        if c == 0:
            return self._pt_owner[hi]
        # invariant: pts[lo] < x < pts[hi]
        while hi - lo > 1:
            mid = (lo + hi) // 2
            c = self._cmp(v, mid, xf, err)
            if c == 0:
                return self._pt_owner[mid]
            if c > 0:
                lo = mid
            else:
                hi = mid
        return self._gap_owner[lo]

    def step(self):
        """Advance one step; returns (branch index, m)."""
        i = self.locate()
        eps, mat, bvec, m = self._branch_data[i]
        v = self.v
        if eps > 0:
            self.v = tuple(sum(r * x for r, x in zip(row, v)) + b for row, b in zip(mat, bvec))
        else:
            self.v = tuple(b - sum(r * x for r, x in zip(row, v)) for row, b in zip(mat, bvec))
        return i, m


@dataclass
class ExactOrbit:
    points: list
    branch_itinerary: list
    theta: list
    label: str = ""

    def __len__(self):
        return len(self.points)


@dataclass
class PeriodicityCertificate:
    preperiod: int
    period: int
    witness: FieldElement
    steps_used: int = 0

    def to_dict(self):
        return {
            "preperiod": self.preperiod,
            "period": self.period,
            "witness": [str(c) for c in self.witness.coords],
            "witness_decimal": self.witness.to_decimal(20),
            "steps_used": self.steps_used,
        }


def iterate_exact(plmap, x0, n):
    """n steps of exact iteration with itinerary and theta_0..theta_n."""
    st = LatticeStepper(plmap, x0)
    points = [st.element()]
    itin = []
    theta = [0]
    for _ in range(n):
        i, m = st.step()
        itin.append(i)
        theta.append(theta[-1] + m)
        points.append(st.element())
    return ExactOrbit(points, itin, theta, plmap.label)


def detect_eventual_period(plmap, x0, step_budget=DEFAULT_STEP_BUDGET):
    """Minimal (preperiod, period) of x0, found by hashing exact coordinates."""
    st = LatticeStepper(plmap, x0)
    seen = {st.v: 0}
    for n in range(1, step_budget + 1):
        st.step()
        prev = seen.get(st.v)
        if prev is not None:
            return PeriodicityCertificate(prev, n - prev, st.element(), n)
        seen[st.v] = n
    bound = period_bound(plmap, x0)
    raise BudgetExceeded(
        f"no repetition within {step_budget} steps; a-priori bound on preperiod+period is {bound}",
        bound=bound)


def period_bound(plmap, x0):
    """A-priori bound on preperiod + period from the lattice argument.

    Orbit points lie in (1/L) Z[beta] with real embedding in [0, 1] and each
    other embedding bounded by max(|phi_i(x0)|, A_i / (1 - |beta_i|)); the
    number of such lattice points bounds the orbit length.  The count uses a
    box around the parallelepiped of power-basis coordinates, evaluated at 60
    digits with a factor-two margin.  Returns None when beta is not Pisot.
    """
    field = plmap.field
    x0 = field.element(x0)
    L = x0.den
    for br in plmap.branches:
        for e in (br.left, br.right, br.b):
            L = _lcm(L, e.den)
    d = field.degree
    if d == 1:
        return L + 1
    mods = field.conjugate_modulus_bounds()
    if any(hi >= 1 for _, hi in mods):
        return None
    A = conjugate_bound(field, [br.b for br in plmap.branches])
    x_emb = field.embedding_abs_bounds(x0)
    radii = [Fraction(1)]
    for (lo_u, u), a, (_, xe) in zip(mods, A, x_emb):
        radii.append(max(xe, a / (1 - u)))
    with mpmath.workdps(60):
        V = mpmath.matrix(d, d)
        for i, disc in enumerate(field.conjugates):
            z = mpmath.mpc(_mpf(disc.center[0]), _mpf(disc.center[1]))
            for j in range(d):
                V[i, j] = z**j
        Vinv = V**-1
        count = mpmath.mpf(1)
        for j in range(d):
            s = sum(abs(Vinv[j, i]) * _mpf(radii[i]) for i in range(d))
            count *= 2 * L * s * 2 + 1
    return int(mpmath.ceil(count))


def _mpf(q):
    return mpmath.mpf(q.numerator) / q.denominator


# ---------------------------------------------------------------------------
# certified numeric orbits


class RealSource:
    """A real number in [0, 1] given by nested rational enclosures: bits -> (lo, hi)."""

    def __init__(self, func, description=""):
        self._func = func
        self.description = description

    def __call__(self, bits):
        return self._func(bits)


def rational_source(q):
    q = Fraction(q)

    def enc(bits):
        s = q * (1 << bits)
        return Fraction(math.floor(s), 1 << bits), Fraction(math.ceil(s), 1 << bits)

    return RealSource(enc, str(q))


def mpmath_source(func, description=""):
    """Source from a zero-argument function evaluated by mpmath at the working precision."""

    def enc(bits):
        with mpmath.workprec(bits + 32):
            val = func()
            c = Fraction(int(mpmath.nint(mpmath.ldexp(val, bits + 16))), 1 << (bits + 16))
        r = Fraction(1, 1 << (bits + 8))
        return c - r, c + r

    return RealSource(enc, description)


def bits_source(seed, description=None):
    """The binary fraction 0.b1 b2 ... whose bits come from random.Random(seed), 64 at a time.

    Enclosures are prefix-consistent: asking for more bits only extends the string.
    """
    words = []
    rng = random.Random(seed)

    def enc(bits):
        nwords = -(-bits // 64)
        while len(words) < nwords:
            words.append(rng.getrandbits(64))
        k = 0
        for w in words[:nwords]:
            k = (k << 64) | w
        scale = 1 << (64 * nwords)
        return Fraction(k, scale), Fraction(k + 1, scale)

    return RealSource(enc, description or f"bits(seed={seed})")


def as_real_source(x0):
    if isinstance(x0, RealSource):
        return x0
    if isinstance(x0, str):
        s = x0.strip()
        try:
            return rational_source(Fraction(s))
        except ValueError:
            expr = s
            return mpmath_source(lambda: mpmath.mpmathify(eval(expr, {"__builtins__": {}}, vars(mpmath))), s)
    if isinstance(x0, FieldElement):
        def enc(bits):
            return x0.enclosure(bits)
        return RealSource(enc, str(x0))
    if callable(x0):
        return RealSource(x0)
    return rational_source(Fraction(x0))


@dataclass
class NumericOrbit:
    """Dyadic enclosures lo/2^P <= S^h(x0) <= hi/2^P for h <= valid_prefix."""

    raw: list
    precision: int
    valid_prefix: int
    itinerary: list = dc_field(default_factory=list)

    @property
    def points(self):
        s = 1 << self.precision
        return [(Fraction(lo, s), Fraction(hi, s)) for lo, hi in self.raw]

    def radius(self, h):
        lo, hi = self.raw[h]
        return Fraction(hi - lo, 2 << self.precision)

    def floats(self):
        s = float(2**self.precision) if self.precision < 1000 else None
        out = []
        for lo, hi in self.raw:
            mid = (lo + hi) // 2
            out.append(mid / s if s else float(Fraction(mid, 1 << self.precision)))
        return out


def _min_precision_floor():
    try:
        return int(os.environ.get("PISOTDYN_MIN_PREC", "0"))
    except ValueError:
        return 0


def _dyadic(e, P):
    lo, hi = e.enclosure(P + 4)
    return math.floor(lo * (1 << P)), math.ceil(hi * (1 << P))


def _numeric_run(plmap, source, n, P):
    one = 1 << P
    lo, hi = source(P)
    xl = max(0, math.floor(lo * one))
    xh = min(one, math.ceil(hi * one))
    pts = plmap.breakpoints()
    pt_enc = [_dyadic(p, P) for p in pts]
    pt_owner = [plmap.branch_at(p) for p in pts]
    gap_owner = [plmap.branch_at((a + b) / 2) for a, b in zip(pts, pts[1:])]
    data = []
    for br in plmap.branches:
        data.append((br.epsilon, _dyadic(plmap.beta_pow(br.m), P), _dyadic(br.b, P)))
    raw = [(xl, xh)]
    itin = []
    for step in range(n):
        cands = set()
        for k, (pl, ph) in enumerate(pt_enc):
            if xl <= ph and xh >= pl:
                cands.add(pt_owner[k])
            if k + 1 < len(pt_enc):
                if xh > pl and xl < pt_enc[k + 1][1]:
                    cands.add(gap_owner[k])
            if len(cands) > 1:
                break
        if len(cands) != 1:
            return NumericOrbit(raw, P, step, itin)
        i = cands.pop()
        eps, (ml, mh), (bl, bh) = data[i]
        # x >= 0 and beta^m > 0
        pl_ = (ml * xl) >> P
        ph_ = -((-mh * xh) >> P)
        if eps > 0:
            yl, yh = pl_ + bl, ph_ + bh
        else:
            yl, yh = bl - ph_, bh - pl_
        xl, xh = max(0, yl), min(one, yh)
        if xl > xh:
            raise OutOfDomain("numeric orbit left [0, 1]")
        raw.append((xl, xh))
        itin.append(i)
    return NumericOrbit(raw, P, n, itin)


def iterate_numeric(plmap, x0, n, working_precision=None, max_precision=1 << 22):
    """Certified enclosure orbit.

    With ``working_precision`` given, iteration stops honestly at the first
    ambiguous branch decision (``valid_prefix < n``).  Without it the
    precision starts at n * M * log2(beta) + 64 bits (or the floor in
    PISOTDYN_MIN_PREC) and doubles until the whole orbit is certified.
    """
    source = as_real_source(x0)
    if working_precision is not None:
        return _numeric_run(plmap, source, n, max(int(working_precision), 8))
    growth = plmap.M * math.log2(float(plmap.field.beta))
    P = max(int(n * growth) + 64, _min_precision_floor(), 64)
    while True:
        orbit = _numeric_run(plmap, source, n, P)
        if orbit.valid_prefix == n:
            return orbit
        P *= 2
        if P > max_precision:
            raise PrecisionExhausted(
                f"branch membership still ambiguous at step {orbit.valid_prefix} with {P // 2} bits")


# ---------------------------------------------------------------------------
# statistics


def seed_point(field, seed, bits=512):
    """A reproducible point of Q(beta) in [0, 1) with a large prime denominator.

    x = frac(sum_j c_j beta^j / q) where q is the first prime after a
    ``bits``-bit number and the c_j < q are drawn from random.Random(seed).
    Its exact orbit has an astronomically long period, so it serves as a
    generic-looking seed for statistical runs while staying exactly
    computable.
    """
    import sympy

    rng = random.Random(seed)
    q = int(sympy.nextprime(rng.getrandbits(bits) | (1 << (bits - 1))))
    coords = [Fraction(rng.randrange(q), q) for _ in range(field.degree)]
    return field.element(coords).frac()


def orbit_floats(plmap, x0, n, start=0):
    """Float values of S^h(x0) for start <= h < start + n via the exact stepper."""
    import numpy as np

    st = LatticeStepper(plmap, x0)
    for _ in range(start):
        st.step()
    out = np.empty(n, dtype=float)
    for h in range(n):
        out[h] = st.float_value()[0]
        st.step()
    return out


def occupation_histogram(points, bins):
    """Frequencies of equal-width bins over [0, 1]; edges go right, last bin closed."""
    if bins < 1:
        raise ValueError("bins must be positive")
    counts = [0] * bins
    total = 0
    for p in points:
        if isinstance(p, FieldElement):
            k = (p * bins).floor()
        elif isinstance(p, tuple):
            lo, hi = p
            k = math.floor(lo * bins)
            if math.floor(hi * bins) != k:
                k = math.floor((lo + hi) / 2 * bins)
        else:
            k = math.floor(p * bins)
        counts[min(max(k, 0), bins - 1)] += 1
        total += 1
    if total == 0:
        raise EmptyOrbit("histogram of an empty orbit")
    return [Fraction(c, total) for c in counts]


def histogram_from_floats(values, bins):
    import numpy as np

    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyOrbit("histogram of an empty orbit")
    idx = np.minimum(np.floor(values * bins).astype(np.int64), bins - 1)
    idx = np.maximum(idx, 0)
    counts = np.bincount(idx, minlength=bins)
    return counts / values.size


# ---------------------------------------------------------------------------
# output


def orbit_csv(orbit, digits=20):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "value", "branch", "theta", "coords"])
    for h, x in enumerate(orbit.points):
        branch = orbit.branch_itinerary[h] if h < len(orbit.branch_itinerary) else ""
        w.writerow([h, x.to_decimal(digits), branch, orbit.theta[h],
                    " ".join(str(c) for c in x.coords)])
    return buf.getvalue()


def certificate_json(cert, plmap=None, x0=None):
    data = cert.to_dict()
    if plmap is not None:
        data["map"] = plmap.label
    if x0 is not None:
        data["x0"] = [str(c) for c in x0.coords]
    return json.dumps(data, indent=2)
