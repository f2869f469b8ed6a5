"""Acceptance criteria 1-8.  Each test records a PASS/FAIL line that is
printed in the terminal summary."""
import random
import time
from fractions import Fraction

import pytest
from conftest import record_acceptance

from pisotdyn import Classification, classify, make_field
from pisotdyn.density import (admissible_t_grid, bounds_check, expansion_check,
                              key_equality_check, normalize_check, off_breakpoint_samples,
                              parry_density, st_profile, transfer_residual)
from pisotdyn.discreteness import (DigitSet, enumerate_window, gap_bound, separation_bound,
                                   theorem_digit_set, verify_min_gap, verify_min_modulus)
from pisotdyn.equivalence import (coupling_forward, coupling_reverse, coupling_window,
                                  generic_report, membership_implication_check, tilde_set)
from pisotdyn.maps import (beta_map, dissipative_interval, flipped_beta_counterexample,
                           handelman_map, kn_pair, st_map, tent_map)
from pisotdyn.orbits import detect_eventual_period, iterate_exact, orbit_floats, seed_point

# 512-bit seed used for the statistical exhibit (the integer below is hashed
# into a 512-bit prime-denominator point by seed_point)
STAT_SEED = 20261015


def _report(number, ok, detail):
    record_acceptance(number, ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def _pairs():
    T1, S1 = kn_pair(1)
    T2, S2 = kn_pair(2)
    tent = tent_map()
    return {"T1/S1": (T1, S1), "T2/S2": (T2, S2), "2x/tent": (beta_map(tent.field), tent)}


# ---------------------------------------------------------------------------


def test_criterion_1_classification():
    cases = [([-1, -1, 1], (1, 2)), ([1, -3, 1], (2, 3)), ([-1, -1, 0, 1], (1, 2))]
    cases += [([-n, 1], (n - 1, n + 1)) for n in range(2, 11)]
    worst = 0.0
    ok = True
    for poly, hint in cases:
        t = time.perf_counter()
        c = classify(make_field(poly, hint))
        worst = max(worst, time.perf_counter() - t)
        ok &= c is Classification.PISOT
    c2 = classify(make_field([-2, 0, 1], (1, 2)))
    ok &= c2 is Classification.NEITHER and worst < 1.0
    _report(1, ok, f"{len(cases)} Pisot, x^2-2 -> {c2.value}, slowest {worst:.3f}s")
    assert ok


def _random_point(field, rng):
    while True:
        coords = [Fraction(rng.randint(-100, 100), rng.randint(1, 100)) for _ in range(field.degree)]
        x = field.element(coords)
        if 0 <= x <= 1:
            return x


def test_criterion_2_eventual_periodicity(golden, two):
    rng = random.Random(2)
    T2, S2 = kn_pair(2)
    _, S1 = kn_pair(1)
    H = handelman_map(golden, [1, 1], None, ["+", "-"])
    t0 = time.perf_counter()
    bad = 0
    total = 0
    for plmap in (T2, S2, S1, H):
        for _ in range(50):
            x0 = _random_point(plmap.field, rng)
            cert = detect_eventual_period(plmap, x0, step_budget=10**6)
            orb = iterate_exact(plmap, x0, cert.preperiod + cert.period)
            pts = orb.points
            good = (pts[cert.preperiod] == pts[cert.preperiod + cert.period] == cert.witness
                    and len(set(pts[:cert.preperiod + cert.period])) == cert.preperiod + cert.period)
            bad += not good
            total += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 30
    _report(2, ok, f"{total} certificates re-verified, {bad} bad, {dt:.1f}s")
    assert ok


def test_criterion_3_separation(golden):
    t0 = time.perf_counter()
    E = DigitSet(golden, [0, 1])
    D = E.difference()
    en = enumerate_window(golden, D, (-1, 2), "digit-bfs")
    R = separation_bound(golden, D)
    gap = verify_min_gap(en, R).min_gap  # raises GapViolation otherwise
    ok1 = gap > R
    # S2's digit set: gaps are differences of points, so the certified
    # bound for them is R of the twice-differenced set
    _, S2 = kn_pair(2)
    E2 = theorem_digit_set(S2)
    D2 = E2.difference()
    en2 = enumerate_window(golden, D2, (-1, 2), "digit-bfs")
    Rg = gap_bound(golden, D2)
    Rs = separation_bound(golden, D2)
    gap2 = verify_min_gap(en2, Rg).min_gap
    mod2 = verify_min_modulus(en2, Rs)
    ok2 = gap2 > Rg and mod2 > Rs
    dt = time.perf_counter() - t0
    print(f"  golden E={{0,1}}: {len(en.elements)} points, min gap {float(gap):.12f} > R = {float(R):.12f}")
    print(f"  S2 digits: {len(en2.elements)} points, min gap {float(gap2):.12f} > R_gap = {float(Rg):.12f};"
          f" min |z| {float(mod2):.12f} > R = {float(Rs):.12f}"
          f" (min gap vs R: {float(gap2):.6f} {'>' if gap2 > Rs else '<='} {float(Rs):.6f})")
    ok = ok1 and ok2 and dt < 10
    _report(3, ok, f"golden gap {float(gap):.6f} exceeds R by {float(gap - R):.1e};"
                   f" S2 gap {float(gap2):.6f} > {float(Rg):.6f}")
    assert ok


N_COUPLE = 10**4


@pytest.fixture(scope="module")
def couplings():
    out = {}
    for name, (T, S) in _pairs().items():
        W = coupling_window(S)
        for x0 in (Fraction(1, 2), Fraction(1, 3)):
            out[name, x0, "forward"] = (T, S, W, coupling_forward(T, S, x0, N_COUPLE, W))
            out[name, x0, "reverse"] = (T, S, W, coupling_reverse(T, S, x0, N_COUPLE, W))
    return out


def test_criterion_4_coupling(couplings):
    lines = []
    ok = True
    for (name, x0, d), (T, S, W, rep) in couplings.items():
        good = rep.ok and all(o in set(W.elements) for o in rep.offsets)
        if d == "reverse":
            good &= all(0 <= j < S.M for j in rep.js)
        ok &= good
        lines.append(f"{name} x0={x0} {d}: {len(rep.violations)} violations")
    print("\n".join("  " + ln for ln in lines))
    _report(4, ok, f"{len(couplings)} runs of {N_COUPLE} steps, all clean" if ok else "violations found")
    assert ok


def test_criterion_8_mutation(couplings):
    grid = [(Fraction(k, 8), Fraction(k + 1, 8)) for k in range(8)]
    best = 0
    where = None
    clean = True
    for (name, x0, d), (T, S, W, rep) in couplings.items():
        for I in grid:
            full = tilde_set(I, W, S.M, d, T)
            clean &= not membership_implication_check(rep, I, full)
            for t in set(rep.offsets):
                cut = tilde_set(I, W, S.M, d, T, exclude=[t])
                n_bad = len(membership_implication_check(rep, I, cut))
                if n_bad > best:
                    best, where = n_bad, (name, str(x0), d, f"[{I[0]},{I[1]}]", str(t))
    ok = clean and best >= 1
    _report(8, ok, f"max {best} violations after dropping a translate at {where}")
    assert ok


def test_criterion_5_st_density(big):
    t0 = time.perf_counter()
    fails = []
    worst = 0.0
    for k, t in enumerate(admissible_t_grid(big, 20)):
        prof = st_profile(big, t, N=64)
        rad = prof.tail
        norm = normalize_check(prof)
        samples = off_breakpoint_samples(prof, 100, seed=k)
        res, bound = transfer_residual(prof.map, prof, samples)
        worst = max(worst, float(res) / float(bound))
        bnd = bounds_check(prof)
        keq = key_equality_check(prof, samples[:50], 20)
        exp = expansion_check(prof)
        checks = {
            "a": norm.passed,
            "b": res <= bound,
            "c": bnd.passed and bnd.lower == (big.beta - 2) / (big.beta - 1)
                 and bnd.upper == big.beta / (big.beta - 1),
            "d": not keq["failures"] and keq["checked"] == 50 * 20,
            "e": exp["r"]["passed"] and exp["l"]["passed"],
        }
        fails += [f"t_{k}:{c}" for c, v in checks.items() if not v]
        assert rad > 0
    dt = time.perf_counter() - t0
    ok = not fails and dt < 120
    _report(5, ok, f"20 t values, worst residual/bound {worst:.2e}, {dt:.1f}s" + (f" fails {fails}" if fails else ""))
    assert ok


def test_criterion_6_integer_bases(two, three):
    ok = True
    notes = []
    for F in (two, three):
        P = parry_density(F)
        ok &= P.values == [1] and P.end_value == 1 and P.mass == 1
        res_p, _ = transfer_residual(beta_map(F), P, [Fraction(1, 5), Fraction(5, 7), Fraction(2, 11)])
        prof = st_profile(F, 0, exact=True)
        # raw series is the constant b/(b-1); the profile normalizes it to 1
        ok &= prof.normalized_values == [1] and prof.density.value(Fraction(1, 5)) == 1
        res_s, _ = transfer_residual(st_map(F, 0), prof, [Fraction(1, 5), Fraction(5, 7), Fraction(2, 11)])
        ok &= res_p == 0 and res_s == 0
        notes.append(f"beta={F.beta}: parry {P.values[0]}, S_0 normalized {prof.normalized_values[0]}"
                     f" (raw {prof.values[0]}), residuals {res_p}/{res_s}")
    _report(6, ok, "; ".join(notes))
    assert ok


@pytest.mark.slow
def test_criterion_7_statistics(plastic):
    t0 = time.perf_counter()
    T2, S2 = kn_pair(2)
    rep = generic_report(T2, S2, seed=STAT_SEED, N=10**6, bins=32)
    sup_ok = rep.sup_distance["T"] < 0.01 and rep.sup_distance["S"] < 0.01
    print(f"  seed {STAT_SEED} -> {seed_point(T2.field, STAT_SEED).coords}")
    print(f"  sup |freq - mass|: T {rep.sup_distance['T']:.2e}, S {rep.sup_distance['S']:.2e};"
          f" per-bin density scale T {rep.density_sup_distance['T']:.2e}, S {rep.density_sup_distance['S']:.2e}")
    # dissipativity
    Fm = flipped_beta_counterexample(plastic)
    lo, hi = dissipative_interval(plastic)
    x0 = seed_point(plastic, STAT_SEED)
    n = 10**6
    flo, fhi = float(lo), float(hi)
    vals = orbit_floats(Fm, x0, n // 2, start=n // 2)
    freq_f = float(((vals >= flo) & (vals <= fhi)).mean())
    tvals = orbit_floats(beta_map(plastic), x0, n // 2, start=n // 2)
    freq_t = float(((tvals >= flo) & (tvals <= fhi)).mean())
    dt = time.perf_counter() - t0
    ok = sup_ok and freq_f < 0.001 and freq_t > 0.1 and dt < 300
    _report(7, ok, f"sup T {rep.sup_distance['T']:.1e} S {rep.sup_distance['S']:.1e};"
                   f" flipped freq {freq_f:.4f}, T freq {freq_t:.4f}; {dt:.0f}s")
    assert ok
