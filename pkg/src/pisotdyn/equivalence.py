"""Coupling of a map S with the beta transformation T, and statistical comparison.

The structural side is exact.  Along the orbit of a point x0 in Q(beta),

    S^n(x0) = eps (beta^{k(n)} x0 - b),    T^{k(n)}(x0) = beta^{k(n)} x0 - b'

with k(n) = theta_n(x0), so the offset b - b' = T^{k(n)}(x0) - eps S^n(x0) lies in
F_{E-E} intersected with [-1, 2].  That window is finite (it is enumerated by
the discreteness module), and the coupling conditions as well as the
implication  S^n x0 in I  =>  T^{k(n)} x0 in I~  are checked step by step.

The reverse direction uses k(n) = max{k : theta_k(x0) <= n} and
j = n - theta_{k(n)}(x0) in [0, M).

The statistical side (histograms, Birkhoff frequencies, star discrepancy)
is reported, never asserted: a limsup cannot be decided from finite data.
"""

from __future__ import annotations

import functools
import json
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .density import parry_density, st_profile
from .discreteness import enumerate_window, theorem_digit_set
from .errors import EmptyWindow, FieldMismatch, OffsetOutsideWindow
from .orbits import LatticeStepper, histogram_from_floats, orbit_floats, seed_point

__all__ = [
    "CouplingReport",
    "GenericReport",
    "Interval",
    "IntervalUnion",
    "birkhoff_frequency",
    "coupling_forward",
    "coupling_reverse",
    "coupling_window",
    "generic_report",
    "membership_implication_check",
    "preimage",
    "reference_density",
    "star_discrepancy",
    "tilde_set",
]


# ---------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object
    lo_closed: bool = True
    hi_closed: bool = True

    def is_empty(self):
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    def __contains__(self, x):
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def length(self):
        return self.hi - self.lo

    def shift(self, t):
        return Interval(self.lo + t, self.hi + t, self.lo_closed, self.hi_closed)

    def negate(self):
        return Interval(-self.hi, -self.lo, self.hi_closed, self.lo_closed)

    def intersect(self, other):
        if self.lo > other.lo:
            lo, lc = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lc = other.lo, other.lo_closed
        else:
            lo, lc = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hc = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hc = other.hi, other.hi_closed
        else:
            hi, hc = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lc, hc)

    def __str__(self):
        return (("[" if self.lo_closed else "(") + f"{self.lo.to_decimal(6)}, {self.hi.to_decimal(6)}"
                + ("]" if self.hi_closed else ")"))


def _lo_key(a, b):
    s = (a.lo - b.lo).sign()
    if s:
        return s
    # closed left ends first
    return (0 if a.lo_closed else 1) - (0 if b.lo_closed else 1)


class IntervalUnion:
    """A finite union of intervals, merged into disjoint components."""

    def __init__(self, intervals=()):
        items = [iv for iv in intervals if not iv.is_empty()]
        items.sort(key=functools.cmp_to_key(_lo_key))
        merged = []
        for iv in items:
            if merged:
                cur = merged[-1]
                touch = iv.lo < cur.hi or (iv.lo == cur.hi and (iv.lo_closed or cur.hi_closed))
                if touch:
                    if iv.hi > cur.hi:
                        merged[-1] = Interval(cur.lo, iv.hi, cur.lo_closed, iv.hi_closed)
                    elif iv.hi == cur.hi and iv.hi_closed and not cur.hi_closed:
                        merged[-1] = Interval(cur.lo, cur.hi, cur.lo_closed, True)
                    continue
            merged.append(iv)
        self.components = merged

    def __contains__(self, x):
        # components are sorted and disjoint; bisect on the left ends
        comps = self.components
        lo, hi = 0, len(comps)
        while lo < hi:
            mid = (lo + hi) // 2
            if comps[mid].lo <= x:
                lo = mid + 1
            else:
                hi = mid
        return lo > 0 and x in comps[lo - 1]

    def measure(self):
        if not self.components:
            return 0
        total = self.components[0].length()
        for iv in self.components[1:]:
            total = total + iv.length()
        return total

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)


def _as_interval(field, I):
    if isinstance(I, Interval):
        return I
    lo, hi = I[0], I[1]
    lc = I[2] if len(I) > 2 else True
    hc = I[3] if len(I) > 3 else True
    return Interval(field.element(lo), field.element(hi), lc, hc)


def preimage(plmap, I):
    """S^{-1}(I) as a list of intervals, one per branch that meets it."""
    field = plmap.field
    I = _as_interval(field, I)
    out = []
    for br in plmap.branches:
        slope = plmap.beta_pow(br.m)
        if br.epsilon > 0:
            J = Interval((I.lo - br.b) / slope, (I.hi - br.b) / slope, I.lo_closed, I.hi_closed)
        else:
            J = Interval((br.b - I.hi) / slope, (br.b - I.lo) / slope, I.hi_closed, I.lo_closed)
        dom = Interval(br.left, br.right, br.left_closed, br.right_closed)
        K = J.intersect(dom)
        if not K.is_empty():
            out.append(K)
    return out


def _iterated_preimage(plmap, I, j):
    pieces = [_as_interval(plmap.field, I)]
    for _ in range(j):
        nxt = []
        for p in pieces:
            nxt.extend(preimage(plmap, p))
        pieces = IntervalUnion(nxt).components
    return pieces


# ---------------------------------------------------------------------------
# coupling


def coupling_window(S, method="lattice-box"):
    """F intersected with [-1, 2], F = F_{E-E} for E = {+-b_i} u {0..floor(beta)}."""
    E = theorem_digit_set(S)
    return enumerate_window(S.field, E.difference(), (-1, 2), method)


@dataclass
class CouplingReport:
    direction: str
    M: int
    N: int
    k: list
    offsets: list
    signs: list
    js: list = dc_field(default_factory=list)
    violations: list = dc_field(default_factory=list)
    window_size: int = 0
    s_points: list = dc_field(default_factory=list, repr=False)
    t_points: list = dc_field(default_factory=list, repr=False)

    @property
    def ok(self):
        return not self.violations

    def summary(self):
        used = Counter(self.offsets)
        return {
            "direction": self.direction,
            "M": self.M,
            "N": self.N,
            "violations": len(self.violations),
            "window_size": self.window_size,
            "distinct_offsets": len(used),
            "max_j": max(self.js) if self.js else None,
            "k_last": self.k[-1] if self.k else None,
        }

    def to_json(self):
        data = self.summary()
        data["k"] = self.k
        data["offsets"] = sorted({tuple(str(c) for c in o.coords) for o in self.offsets})
        data["violation_list"] = [list(map(str, v)) for v in self.violations]
        if self.js:
            data["j"] = self.js
        return json.dumps(data, indent=2)


def _orbit_with_signs(plmap, x0, n):
    """points, theta and cumulative slope signs for n steps (exact)."""
    st = LatticeStepper(plmap, x0)
    pts, theta, signs = [st.element()], [0], [1]
    for _ in range(n):
        i, m = st.step()
        theta.append(theta[-1] + m)
        signs.append(signs[-1] * plmap.branches[i].epsilon)
        pts.append(st.element())
    return pts, theta, signs


def _orbit_until_theta(plmap, x0, theta_max):
    st = LatticeStepper(plmap, x0)
    pts, theta, signs = [st.element()], [0], [1]
    while theta[-1] <= theta_max:
        i, m = st.step()
        theta.append(theta[-1] + m)
        signs.append(signs[-1] * plmap.branches[i].epsilon)
        pts.append(st.element())
    return pts, theta, signs


def _check_field(T, S):
    if T.field is not S.field and T.field.key != S.field.key:
        raise FieldMismatch("T and S must share their number field")


def _counting_conditions(k, M, violations):
    for m, c in Counter(k).items():
        if c > M:
            violations.append(("card", m, c))
    for n, kn in enumerate(k):
        if kn > M * max(1, n):
            violations.append(("growth", n, kn))


def coupling_forward(T, S, x0, N, window=None, strict=False):
    """k(n) = theta_n(x0); offsets T^{k(n)} x0 - eps S^n x0 must lie in the window."""
    _check_field(T, S)
    x0 = S.field.element(x0)
    W = window if window is not None else coupling_window(S)
    members = set(W.elements)
    M = S.M
    s_pts, theta, signs = _orbit_with_signs(S, x0, N)
    t_pts, _, _ = _orbit_with_signs(T, x0, theta[-1])
    viol = []
    offsets = []
    for n in range(N + 1):
        if n < N:
            dk = theta[n + 1] - theta[n]
            if not 1 <= dk <= M:
                viol.append(("step", n, dk))
        off = t_pts[theta[n]] - signs[n] * s_pts[n]
        offsets.append(off)
        if off not in members:
            viol.append(("offset", n, off))
            if strict:
                raise OffsetOutsideWindow(f"offset {off} at step {n} is outside the window")
    _counting_conditions(theta, M, viol)
    return CouplingReport("forward", M, N, theta, offsets, signs, [], viol, len(members),
                          s_points=s_pts, t_points=t_pts)


def coupling_reverse(T, S, x0, N, window=None, strict=False):
    """k(n) = max{k : theta_k(x0) <= n}, j = n - theta_{k(n)}; offsets S^{k(n)} - eps T^{n-j}."""
    _check_field(T, S)
    x0 = S.field.element(x0)
    W = window if window is not None else coupling_window(S)
    members = set(W.elements)
    M = S.M
    s_pts, theta, signs = _orbit_until_theta(S, x0, N)
    t_pts, _, _ = _orbit_with_signs(T, x0, N)
    viol = []
    k, js, offsets, eps = [], [], [], []
    h = 0
    for n in range(N + 1):
        while theta[h + 1] <= n:
            h += 1
        k.append(h)
        if not theta[h] <= n < theta[h + 1]:
            viol.append(("bracket", n, h))
        j = n - theta[h]
        js.append(j)
        if not 0 <= j < M:
            viol.append(("j", n, j))
        e = signs[h]
        eps.append(e)
        off = s_pts[h] - e * t_pts[n - j]
        offsets.append(off)
        if off not in members:
            viol.append(("offset", n, off))
            if strict:
                raise OffsetOutsideWindow(f"offset {off} at step {n} is outside the window")
    for n in range(N):
        if not 0 <= k[n + 1] - k[n] <= 1:
            viol.append(("step", n, k[n + 1] - k[n]))
    _counting_conditions(k, M, viol)
    return CouplingReport("reverse", M, N, k, offsets, eps, js, viol, len(members),
                          s_points=s_pts, t_points=t_pts)


@dataclass
class TildeSet:
    union: IntervalUnion
    measure: object
    bound: object
    certified: bool
    translates: list

    def __contains__(self, x):
        return x in self.union


def tilde_set(I, W, M, direction="forward", T=None, exclude=()):
    """I~ = (union over t in W of (J + t) u (-J + t)) n [0, 1].

    J runs over I (forward) or T^{-j}(I) for 0 <= j < M (reverse).  ``exclude``
    drops translates, which is how the mutation tests shrink the set.
    Returns the union with its exact measure and the covering certificate
    measure <= 2 Card(W) lambda(I)  (forward) or
    measure <= 2 Card(W) M max_j lambda(T^{-j} I)  (reverse).
    """
    elems = W.elements if hasattr(W, "elements") else list(W)
    if not elems:
        raise EmptyWindow("the translate window is empty")
    field = elems[0].field
    I = _as_interval(field, I)
    excl = set(exclude)
    ts = [t for t in elems if t not in excl]
    unit = Interval(field.zero, field.one)
    if direction == "forward":
        bases = [[I]]
    else:
        if T is None:
            raise ValueError("the reverse construction needs T for the preimages")
        bases = [_iterated_preimage(T, I, j) for j in range(M)]
    pieces = []
    for base in bases:
        for J in base:
            negJ = J.negate()
            for t in ts:
                for K in (J.shift(t), negJ.shift(t)):
                    K = K.intersect(unit)
                    if not K.is_empty():
                        pieces.append(K)
    U = IntervalUnion(pieces)
    meas = U.measure()
    if direction == "forward":
        bound = 2 * len(elems) * I.length()
    else:
        lens = [IntervalUnion(b).measure() for b in bases]
        biggest = functools.reduce(lambda a, b: a if a >= b else b, lens)
        bound = 2 * len(elems) * M * biggest
    return TildeSet(U, meas, bound, bool(meas <= bound), ts)


def membership_implication_check(report, I, tilde):
    """Count steps where the source orbit is in I but the coupled point is not in I~."""
    field = report.offsets[0].field if report.offsets else None
    I = _as_interval(field, I) if field is not None else I
    bad = []
    if report.direction == "forward":
        for n in range(report.N + 1):
            if report.s_points[n] in I and report.t_points[report.k[n]] not in tilde:
                bad.append(n)
    else:
        for n in range(report.N + 1):
            if report.t_points[n] in I and report.s_points[report.k[n]] not in tilde:
                bad.append(n)
    return bad


# ---------------------------------------------------------------------------
# statistics


def birkhoff_frequency(points, I):
    """Fraction of points in the interval I (exact for exact points)."""
    if not len(points):
        return Fraction(0)
    if isinstance(points, np.ndarray):
        lo, hi = float(I[0]), float(I[1])
        return float(np.count_nonzero((points >= lo) & (points <= hi))) / points.size
    if isinstance(I, Interval):
        hits = sum(1 for p in points if p in I)
    else:
        lo, hi = I[0], I[1]
        hits = sum(1 for p in points if lo <= p <= hi)
    return Fraction(hits, len(points))


def star_discrepancy(points, cdf=None):
    """D*_N of the values cdf(points) against the uniform law on [0, 1]."""
    x = np.asarray(points, dtype=float)
    u = np.sort(x if cdf is None else np.asarray(cdf(x), dtype=float))
    n = u.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


class _Lebesgue:
    def bin_masses(self, bins):
        return [1.0 / bins] * bins

    def float_cdf(self, xs):
        return np.clip(np.asarray(xs, dtype=float), 0.0, 1.0)


def reference_density(plmap):
    """The invariant density used as reference for a map, or None if there is none.

    Parry density for beta maps, the S_t profile for the S_t family and
    Lebesgue measure for maps whose branches all map onto [0, 1].
    """
    if plmap.kind == "beta" or (plmap.kind == "st" and plmap.field.degree == 1):
        if plmap.field.degree == 1:
            return _Lebesgue()
        return parry_density(plmap.field)
    if plmap.kind == "st":
        return st_profile(plmap.field, plmap.params["t"]).density
    if plmap.kind == "flipped-beta":
        return None
    if _onto(plmap):
        return _Lebesgue()
    return None


def _onto(plmap):
    """Every nondegenerate branch maps its closure onto [0, 1]."""
    for i, br in enumerate(plmap.branches):
        if br.left == br.right:
            continue
        a = plmap.evaluate_branch(i, br.left)
        b = plmap.evaluate_branch(i, br.right)
        if {a, b} != {plmap.field.zero, plmap.field.one}:
            return False
    return True


@dataclass
class GenericReport:
    labels: tuple
    N: int
    bins: int
    seed: int
    histograms: dict
    references: dict
    sup_distance: dict
    density_sup_distance: dict
    star_discrepancy: dict
    max_ratio: dict
    coupling: dict = dc_field(default_factory=dict)

    def to_json(self):
        def conv(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v

        data = {k: ({kk: conv(vv) for kk, vv in v.items()} if isinstance(v, dict) else conv(v))
                for k, v in self.__dict__.items()}
        return json.dumps(data, indent=2, default=str)


def generic_report(T, S, seed, N, bins=32, burn_in=0, coupling_steps=0, x0_coupling=None):
    """Histograms of both maps from the same seed point, compared with their densities.

    ``sup_distance`` compares bin frequencies with bin masses of the
    reference measure; ``density_sup_distance`` is the same difference
    scaled by the bin count (histogram density against mean density per bin).
    """
    _check_field(T, S)
    x0 = seed_point(S.field, seed)
    hists, refs, sup, dsup, disc, ratio = {}, {}, {}, {}, {}, {}
    for name, plmap in (("T", T), ("S", S)):
        vals = orbit_floats(plmap, x0, N, start=burn_in)
        h = histogram_from_floats(vals, bins)
        hists[name] = h
        ref = reference_density(plmap)
        if ref is None:
            refs[name] = None
            sup[name] = dsup[name] = disc[name] = ratio[name] = None
            continue
        masses = np.asarray(ref.bin_masses(bins), dtype=float)
        refs[name] = masses
        sup[name] = float(np.max(np.abs(h - masses)))
        dsup[name] = sup[name] * bins
        disc[name] = star_discrepancy(vals, ref.float_cdf)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(masses > 0, h / masses, np.inf)
        ratio[name] = float(np.max(r))
    coupling = {}
    if coupling_steps:
        xc = x0_coupling if x0_coupling is not None else Fraction(1, 2)
        W = coupling_window(S)
        coupling["forward"] = coupling_forward(T, S, xc, coupling_steps, W).summary()
        coupling["reverse"] = coupling_reverse(T, S, xc, coupling_steps, W).summary()
    return GenericReport((T.label, S.label), N, bins, seed, hists, refs, sup, dsup, disc, ratio, coupling)
