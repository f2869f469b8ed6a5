"""Invariant densities as exact step functions.

Two constructions are provided.

* The Parry density of T(x) = {beta x}: proportional to
  sum_{n >= 0, x < T^n(1)} beta^-n.
* The density of the S_t family, built from the one-sided orbits
  r_n = S^n(c + 0) and l_n = S^n(c - 0) of the discontinuity c = floor(beta)/beta - t:

      h(x) = C + sum_{n >= 1} ([x >= r_n] + [x < l_n]) beta^-n,
      C    = (beta - 2)/(beta - 1) + sum_{n >= 1} (iota+(n) - iota-(n)) beta^-n.

  The same constant can be written 1 - 1/(beta - 1) + sum ...; the module
  always uses the first form.

Both are piecewise constant with finitely many breakpoints once the series
is truncated at N (or summed in closed form when the boundary orbits are
eventually periodic), so integrals, cdfs and the transfer operator are
evaluated exactly in Q(beta).

h as written above is invariant but its integral is not 1 in general
(for beta = (3 + sqrt 5)/2 and t = 0 it is about 0.854).  Profiles therefore
keep the exact mass and expose both the raw values and the normalised ones.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .discreteness import sort_exact
from .errors import BetaBelowTwo, SampleOnBreakpoint
from .maps import LEFT, RIGHT, apply, apply_one_sided, beta_map, st_map, t_max

__all__ = [
    "admissible_t_grid",
    "off_breakpoint_samples",
    "DigitMachinery",
    "ParryDensity",
    "StDensityProfile",
    "StepDensity",
    "bounds_check",
    "density_csv",
    "e_terms",
    "eval_density",
    "expansion_check",
    "key_equality_check",
    "normalize_check",
    "parry_density",
    "profile_json",
    "sign_structure_check",
    "st_profile",
    "transfer_residual",
]

DEFAULT_N = 64


def _dedup_sorted(values):
    out = []
    for v in sort_exact(values):
        if not out or out[-1] != v:
            out.append(v)
    return out


class StepDensity:
    """A right-continuous step function on [0, 1] with exact breakpoints and values.

    ``values[k]`` is the raw value on [p_k, p_{k+1}); ``end_value`` the value
    at x = 1.  ``mass`` is the integral of the raw function and ``radius`` a
    bound for raw(true) - raw(table), which lies in [0, radius].
    """

    def __init__(self, field, breakpoints, values, end_value, mass, radius):
        self.field = field
        self.breakpoints = breakpoints
        self.values = values
        self.end_value = end_value
        self.mass = mass
        self.radius = radius
        self._bp_float = [float(p) for p in breakpoints]

    # lookups ---------------------------------------------------------------
    def _cell(self, x):
        x = self.field.element(x)
        if x == 1:
            return None
        lo, hi = 0, len(self.breakpoints) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if x >= self.breakpoints[mid]:
                lo = mid
            else:
                hi = mid
        return lo

    def raw_value(self, x):
        if isinstance(x, float):
            k = bisect.bisect_right(self._bp_float, x) - 1
            if k >= len(self.values):
                return self.end_value
            return self.values[max(k, 0)]
        k = self._cell(x)
        return self.end_value if k is None else self.values[k]

    def value(self, x):
        """Normalised density at x."""
        return self.raw_value(x) / self.mass

    def is_breakpoint(self, x):
        x = self.field.element(x)
        return any(x == p for p in self.breakpoints)

    # integrals -------------------------------------------------------------
    def integral(self, normalized=False):
        """Cellwise exact integral of the table."""
        total = self.field.zero
        for v, a, b in zip(self.values, self.breakpoints, self.breakpoints[1:]):
            total = total + v * (b - a)
        return total / self.mass if normalized else total

    def cdf(self, x):
        """Exact normalised cdf at an exact point x."""
        x = self.field.element(x)
        total = self.field.zero
        for v, a, b in zip(self.values, self.breakpoints, self.breakpoints[1:]):
            if x <= a:
                break
            right = b if b <= x else x
            total = total + v * (right - a)
        return total / self.mass

    def cdf_table(self):
        """Float (breakpoint, cdf) pairs; the cdf is linear in between."""
        pts = [0.0]
        acc = self.field.zero
        for v, a, b in zip(self.values, self.breakpoints, self.breakpoints[1:]):
            acc = acc + v * (b - a)
            pts.append(float(acc / self.mass))
        return self._bp_float, pts

    def bin_masses(self, bins):
        """Exact normalised mass of each of the equal-width bins (as floats)."""
        edges = [Fraction(j, bins) for j in range(bins + 1)]
        cum = [float(self.cdf(e)) for e in edges]
        return [b - a for a, b in zip(cum, cum[1:])]

    def float_cdf(self, xs):
        """Vectorised float cdf (for discrepancy computations)."""
        import numpy as np

        bp, cv = self.cdf_table()
        return np.interp(np.asarray(xs, dtype=float), bp, cv)

    def raw_min_max(self):
        vals = list(self.values) + [self.end_value]
        s = sort_exact(vals)
        return s[0], s[-1]


def _geometric_sum(field, states, pre, per, g, start=1):
    """sum_{n >= start} g(states[n]) beta^-n for an eventually periodic state sequence.

    ``states`` holds s_0 .. s_{pre+per-1}; for n >= pre, s_{n+per} = s_n.
    """
    inv = field.beta.inverse()
    p0 = max(pre, start)
    total = field.zero
    w = inv**start
    for n in range(start, p0):
        c = g(states[n])
        if c:
            total = total + c * w
        w = w * inv
    cyc = field.zero
    for n in range(p0, p0 + per):
        s = states[pre + (n - pre) % per]
        c = g(s)
        if c:
            cyc = cyc + c * w
        w = w * inv
    return total + cyc / (1 - inv**per)


# ---------------------------------------------------------------------------
# Parry density


class ParryDensity(StepDensity):
    pass


def parry_density(field, N=None, exact=True):
    """Parry density of {beta x}, exact when the orbit of 1 is eventually periodic within N steps."""
    T = beta_map(field)
    beta = field.beta
    N = N or DEFAULT_N
    inv = beta.inverse()
    orbit = [field.one]
    seen = {field.one: 0}
    pre = per = None
    x = field.one
    for n in range(1, N + 1):
        x = apply(T, x)[0]
        if exact and x in seen:
            pre, per = seen[x], n - seen[x]
            break
        seen[x] = n
        orbit.append(x)
    bps = _dedup_sorted([field.zero, field.one] + orbit)
    if pre is not None:
        def series(indicator):
            return _geometric_sum(field, orbit, pre, per, indicator, start=0)
        radius = field.zero
        mass = series(lambda t: t)
    else:
        def series(indicator):
            total = field.zero
            w = field.one
            for t in orbit:
                c = indicator(t)
                if c:
                    total = total + c * w
                w = w * inv
            return total
        radius = inv ** (len(orbit) - 1) * inv / (1 - inv)
        mass = series(lambda t: t)
    values = []
    for a, b in zip(bps, bps[1:]):
        values.append(series(lambda t, b=b: 1 if t >= b else 0))
    # at x = 1 no orbit point exceeds x; use the left limit so the density is bounded below
    end_value = values[-1]
    dens = ParryDensity(field, bps, values, end_value, mass, radius)
    dens.orbit_of_one = orbit
    dens.preperiod, dens.period = pre, per
    dens.N = N
    dens.map = T
    return dens


# ---------------------------------------------------------------------------
# S_t density


@dataclass
class StDensityProfile:
    field: object
    t: object
    N: int
    map: object
    r: list
    l: list
    r_sides: list
    l_sides: list
    r_digits: list
    l_digits: list
    iota_plus: list
    iota_minus: list
    C: object
    tail: object
    density: StepDensity
    exact: bool = False
    periodicity: dict = dc_field(default_factory=dict)

    @property
    def breakpoints(self):
        return self.density.breakpoints

    @property
    def values(self):
        return self.density.values

    @property
    def mass(self):
        return self.density.mass

    @property
    def normalized_values(self):
        return [v / self.density.mass for v in self.density.values]

    def _index(self, which, n):
        seq = self.r if which == "r" else self.l
        if n < len(seq) or not self.exact:
            return n
        pre, per = self.periodicity[which]
        return pre + (n - pre) % per

    def r_at(self, n):
        return self.r[self._index("r", n)]

    def l_at(self, n):
        return self.l[self._index("l", n)]

    def r_digit(self, n):
        return self.r_digits[self._index("r", n)]

    def l_digit(self, n):
        return self.l_digits[self._index("l", n)]

    def iota(self, n):
        return self.iota_plus[self._index("r", n)] - self.iota_minus[self._index("l", n)]


def _sided_orbit(S, x, side, n_steps, detect):
    """(value, side, digit) along the one-sided orbit; stops early on a repeat if detect."""
    beta = S.field.beta
    vals, sides, digits = [x], [side], []
    seen = {(x, side): 0}
    for n in range(1, n_steps + 1):
        y, side, _ = apply_one_sided(S, x, side, boundary="owner")
        digits.append(beta * x - y)
        x = y
        if detect and (x, side) in seen:
            return vals, sides, digits, (seen[(x, side)], n - seen[(x, side)])
        seen[(x, side)] = n
        vals.append(x)
        sides.append(side)
    y, _, _ = apply_one_sided(S, x, side, boundary="owner")
    digits.append(beta * x - y)
    return vals, sides, digits, None


def st_profile(field, t=0, N=DEFAULT_N, exact=False, period_budget=4096, literal_ties=False):
    """Density data of S_t, truncated at N (or in closed form when ``exact``).

    ``literal_ties`` compares l_n >= l_0 as plain values even when the left
    orbit returns to c exactly; that version of C is not invariant and is
    kept only to exhibit the difference.
    """
    S = st_map(field, t)
    t = field.element(t)
    beta = field.beta
    k = beta.floor()
    c = k * beta.inverse() - t
    inv = beta.inverse()
    steps = period_budget if exact else N
    r, rs, rd, rper = _sided_orbit(S, c, RIGHT, steps, exact)
    l, ls, ld, lper = _sided_orbit(S, c, LEFT, steps, exact)
    exact = bool(exact and rper and lper)
    if not exact:
        r, rs, rd = r[: N + 1], rs[: N + 1], rd[: N + 1]
        l, ls, ld = l[: N + 1], ls[: N + 1], ld[: N + 1]
    r0, l0 = r[0], l[0]
    iota_p = [1 if v >= r0 else 0 for v in r]
    # l_n is a left limit, so l_n >= l_0 is read as l_n - 0 >= c: strict when they coincide
    # (this only matters when the orbit of c returns to c exactly)
    iota_m = [1 if (v > l0 or (literal_ties and v == l0)) else 0 for v in l]
    base = (beta - 2) / (beta - 1)
    if exact:
        def rsum(g):
            return _geometric_sum(field, list(range(len(r))), rper[0], rper[1], g)

        def lsum(g):
            return _geometric_sum(field, list(range(len(l))), lper[0], lper[1], g)

        C = base + rsum(lambda i: iota_p[i]) - lsum(lambda i: iota_m[i])
        tail = field.zero
    else:
        C = base
        w = inv
        for n in range(1, N + 1):
            diff = iota_p[n] - iota_m[n]
            if diff:
                C = C + diff * w
            w = w * inv
        tail = 2 * inv**N / (beta - 1)
    rpts = r[1:] if not exact else r[min(1, len(r) - 1):] + ([r[0]] if rper[0] == 0 else [])
    lpts = l[1:] if not exact else l[min(1, len(l) - 1):] + ([l[0]] if lper[0] == 0 else [])
    bps = _dedup_sorted([field.zero, field.one] + rpts + lpts)

    if exact:
        def h_at(x):
            return (C + rsum(lambda i: 1 if x >= r[i] else 0)
                    + lsum(lambda i: 1 if x < l[i] else 0))

        mass = C + rsum(lambda i: 1 - r[i]) + lsum(lambda i: l[i])
    else:
        weights = [None] + [inv**n for n in range(1, N + 1)]

        def h_at(x):
            total = C
            for n in range(1, N + 1):
                cnt = (1 if x >= r[n] else 0) + (1 if x < l[n] else 0)
                if cnt:
                    total = total + cnt * weights[n]
            return total

        mass = C
        for n in range(1, N + 1):
            mass = mass + weights[n] * (1 - r[n] + l[n])
    values = [h_at(a) for a in bps[:-1]]
    # the series at the single point 1 can differ from the left limit; densities
    # are defined almost everywhere, so x = 1 takes the left limit as for Parry
    end_value = values[-1]
    dens = StepDensity(field, bps, values, end_value, mass, tail)
    return StDensityProfile(
        field=field, t=t, N=N, map=S, r=r, l=l, r_sides=rs, l_sides=ls,
        r_digits=rd, l_digits=ld, iota_plus=iota_p, iota_minus=iota_m, C=C, tail=tail,
        density=dens, exact=exact,
        periodicity={"r": rper, "l": lper} if exact else {})


def eval_density(profile, x, normalized=False):
    """(value, radius) of the density at x; raw h unless ``normalized``."""
    dens = profile.density if isinstance(profile, StDensityProfile) else profile
    v = dens.raw_value(x)
    if normalized:
        return v / dens.mass, dens.radius / dens.mass
    return v, dens.radius


# ---------------------------------------------------------------------------
# checks


def transfer_residual(plmap, profile, samples, normalized=False):
    """max over samples of |(L h)(x) - h(x)|, L the transfer operator of the map.

    Preimages are solved exactly branch by branch.  Returns (residual, bound)
    with bound = 3 * radius of the table.
    """
    dens = profile.density if isinstance(profile, StDensityProfile) else profile
    field = plmap.field
    worst = field.zero
    for x in samples:
        x = field.element(x)
        if dens.is_breakpoint(x) or any(x == p for p in plmap.breakpoints()):
            raise SampleOnBreakpoint(f"sample {x} is a breakpoint")
        acc = field.zero
        for i, br in enumerate(plmap.branches):
            slope = plmap.beta_pow(br.m)
            y = (x - br.b) / (slope if br.epsilon > 0 else -slope)
            if br.contains(y):
                acc = acc + dens.raw_value(y) / slope
        res = abs(acc - dens.raw_value(x))
        if res > worst:
            worst = res
    bound = 3 * dens.radius
    if normalized:
        return worst / dens.mass, bound / dens.mass
    return worst, bound


@dataclass
class NormalizationReport:
    normalized_integral: object
    raw_integral: object
    closed_form_mass: object
    radius: object
    passed: bool
    routes_agree: bool

    def to_dict(self):
        return {
            "normalized_integral": self.normalized_integral.to_decimal(20),
            "raw_integral": self.raw_integral.to_decimal(20),
            "closed_form_mass": self.closed_form_mass.to_decimal(20),
            "radius": float(self.radius),
            "passed": self.passed,
            "routes_agree": self.routes_agree,
        }


def normalize_check(profile):
    """Integrate the normalised table cellwise; it must be 1 within 3 * tail.

    The raw cellwise integral is compared with the closed-form mass as an
    independent route.
    """
    dens = profile.density if isinstance(profile, StDensityProfile) else profile
    raw = dens.integral()
    norm = raw / dens.mass
    rad = 3 * dens.radius
    passed = abs(norm - 1) <= rad
    return NormalizationReport(norm, raw, dens.mass, rad, bool(passed), raw == dens.mass)


@dataclass
class BoundsReport:
    lower: object
    upper: object
    min_value: object
    max_value: object
    radius: object
    passed: bool
    beta_below_two: bool
    nonpositive_cells: list = dc_field(default_factory=list)

    def to_dict(self):
        return {
            "lower": self.lower.to_decimal(15),
            "upper": self.upper.to_decimal(15),
            "min": self.min_value.to_decimal(15),
            "max": self.max_value.to_decimal(15),
            "radius": float(self.radius),
            "passed": self.passed,
            "beta_below_two": self.beta_below_two,
            "nonpositive_cells": [[a.to_decimal(10), b.to_decimal(10)] for a, b in self.nonpositive_cells],
        }


def bounds_check(profile, strict=False):
    """Check (beta-2)/(beta-1) - radius <= h <= beta/(beta-1) + radius on the raw table.

    For beta < 2 the bound is not expected to hold; the report lists the
    cells where h <= 0, and ``strict=True`` raises BetaBelowTwo instead.
    """
    dens = profile.density
    field = profile.field
    beta = field.beta
    below = beta < 2
    if below and strict:
        raise BetaBelowTwo("the positivity bound needs beta >= 2")
    lower = (beta - 2) / (beta - 1)
    upper = beta / (beta - 1)
    rad = dens.radius
    lo, hi = dens.raw_min_max()
    passed = lo >= lower - rad and hi <= upper + rad
    bad = []
    for v, a, b in zip(dens.values, dens.breakpoints, dens.breakpoints[1:]):
        if v <= 0:
            bad.append((a, b))
    return BoundsReport(lower, upper, lo, hi, rad, bool(passed) and not below, below, bad)


# digits ----------------------------------------------------------------------


class DigitMachinery:
    """The digit set D, the region selector D(x) and the counts e_n^+-(x)."""

    def __init__(self, profile):
        self.profile = profile
        field = profile.field
        beta = field.beta
        self.k = beta.floor()
        self.integer_base = beta == self.k
        self.top = beta - 1
        ints = [field.element(j) for j in range(self.k)]
        self.D = ints if self.integer_base else ints + [self.top]
        self.r1 = profile.r_at(1)
        self.l1 = profile.l_at(1)

    def region(self, x):
        if x < self.r1:
            return 0
        if x < self.l1:
            return 1
        return 2

    def D_of(self, x):
        reg = self.region(x)
        if self.integer_base or reg == 1:
            return list(self.D)
        if reg == 0:
            return [d for d in self.D if d != self.top]
        return [d for d in self.D if d != self.k - 1]

    def e_terms(self, x, n):
        p = self.profile
        ar, al = p.r_digit(n), p.l_digit(n)
        Dx = self.D_of(x)
        ep = sum(1 for d in Dx if d > ar)
        if ar == self.k - 1 and x >= self.l1 and not self.integer_base:
            ep -= 1
        em = sum(1 for d in Dx if d < al)
        if al == self.top and x < self.r1 and not self.integer_base:
            em -= 1
        return ep, em

    def d_n(self, x, n):
        p = self.profile
        return (1 if x >= p.r_at(n) else 0) + (1 if x < p.l_at(n) else 0)


def e_terms(profile, x, n):
    """(e_n^+(x), e_n^-(x))."""
    return DigitMachinery(profile).e_terms(profile.field.element(x), n)


def _preimages(plmap, x):
    out = []
    for br in plmap.branches:
        slope = plmap.beta_pow(br.m)
        y = (x - br.b) / (slope if br.epsilon > 0 else -slope)
        if br.contains(y):
            out.append(y)
    return out


def key_equality_check(profile, samples, n_max):
    """Count failures of sum_{S y = x} d_n(y) = e_n(x) + d_{n+1}(x) for 1 <= n <= n_max."""
    mach = DigitMachinery(profile)
    field = profile.field
    failures = []
    checked = 0
    for x in samples:
        x = field.element(x)
        if x >= 1:
            continue
        pre = _preimages(profile.map, x)
        for n in range(1, n_max + 1):
            lhs = sum(mach.d_n(y, n) for y in pre)
            ep, em = mach.e_terms(x, n)
            rhs = ep + em + mach.d_n(x, n + 1)
            checked += 1
            if lhs != rhs:
                failures.append((x, n, lhs, rhs))
    return {"checked": checked, "failures": failures}


def expansion_check(profile, N=None):
    """r_0 and l_0 against sum_{n=1}^{N} alpha(.)_{n-1} beta^-n; residual must lie in [0, beta^-N]."""
    field = profile.field
    beta = field.beta
    N = N or profile.N
    inv = beta.inverse()
    out = {}
    for name, at, digit in (("r", profile.r_at, profile.r_digit), ("l", profile.l_at, profile.l_digit)):
        s = field.zero
        w = inv
        for n in range(1, N + 1):
            s = s + digit(n - 1) * w
            w = w * inv
        resid = at(0) - s
        # exact telescoping: resid = beta^-N * orbit[N]
        ok = resid.sign() >= 0 and resid <= inv**N
        orbit_N = at(N)
        out[name] = {"residual": resid, "passed": bool(ok), "exact_tail": resid == inv**N * orbit_N}
    return out


def sign_structure_check(profile):
    """iota+ - iota- = -1 forces d_n >= 1 everywhere, = +1 forces d_n <= 1."""
    mach = DigitMachinery(profile)
    pts = list(profile.breakpoints)
    bad = []
    n_max = profile.N if profile.exact else min(len(profile.r), len(profile.l)) - 1
    for n in range(1, n_max + 1):
        diff = profile.iota(n)
        if diff == 0:
            continue
        for x in pts:
            dn = mach.d_n(x, n)
            if (diff == -1 and dn < 1) or (diff == 1 and dn > 1):
                bad.append((n, x))
    return bad


def admissible_t_grid(field, count):
    """count exact t values k/(count-1) * t_max, k = 0..count-1."""
    tm = t_max(field)
    if count == 1:
        return [field.zero]
    return [tm * Fraction(k, count - 1) for k in range(count)]


def off_breakpoint_samples(profile, count, seed=0, denominator=10007):
    """Reproducible rational samples in (0, 1) avoiding the table's breakpoints."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        x = Fraction(rng.randrange(1, denominator), denominator)
        if not profile.density.is_breakpoint(x) and not any(
                profile.field.element(x) == p for p in profile.map.breakpoints()):
            out.append(x)
    return out


# ---------------------------------------------------------------------------
# output


def density_csv(dens, digits=15):
    dens = dens.density if isinstance(dens, StDensityProfile) else dens
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["breakpoint", "value", "normalized", "tail_radius"])
    rad = float(dens.radius)
    for p, v in zip(dens.breakpoints, dens.values):
        w.writerow([p.to_decimal(digits), v.to_decimal(digits), (v / dens.mass).to_decimal(digits), rad])
    w.writerow([dens.breakpoints[-1].to_decimal(digits), dens.end_value.to_decimal(digits),
                (dens.end_value / dens.mass).to_decimal(digits), rad])
    return buf.getvalue()


def profile_json(profile):
    def coords(x):
        return [str(c) for c in x.coords]

    data = {
        "t": coords(profile.t),
        "N": profile.N,
        "exact": profile.exact,
        "r": [{"coords": coords(v), "decimal": v.to_decimal(15), "side": s}
              for v, s in zip(profile.r, profile.r_sides)],
        "l": [{"coords": coords(v), "decimal": v.to_decimal(15), "side": s}
              for v, s in zip(profile.l, profile.l_sides)],
        "iota_plus": profile.iota_plus,
        "iota_minus": profile.iota_minus,
        "C": {"coords": coords(profile.C), "decimal": profile.C.to_decimal(20)},
        "tail_radius": float(profile.tail),
        "mass": profile.mass.to_decimal(20),
    }
    return json.dumps(data, indent=2)
