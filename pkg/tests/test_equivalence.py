from fractions import Fraction

import numpy as np
import pytest

from pisotdyn.errors import EmptyWindow, FieldMismatch, OffsetOutsideWindow
from pisotdyn.equivalence import (Interval, IntervalUnion, birkhoff_frequency, coupling_forward,
                                  coupling_reverse, coupling_window, generic_report,
                                  membership_implication_check, preimage, star_discrepancy,
                                  tilde_set)
from pisotdyn.maps import beta_map, kn_pair, tent_map


def iv(F, a, b, lc=True, hc=True):
    return Interval(F.element(a), F.element(b), lc, hc)


def test_interval_basics(golden):
    I = iv(golden, 0, Fraction(1, 2), hc=False)
    assert Fraction(1, 4) in I and Fraction(1, 2) not in I
    assert iv(golden, 1, 1, lc=False).is_empty()
    assert I.negate() == iv(golden, Fraction(-1, 2), 0, lc=False)
    J = iv(golden, Fraction(1, 4), 1)
    assert I.intersect(J) == iv(golden, Fraction(1, 4), Fraction(1, 2), hc=False)


def test_union_merges_and_measures(golden):
    U = IntervalUnion([iv(golden, 0, Fraction(1, 2), hc=False), iv(golden, Fraction(1, 2), 1),
                       iv(golden, 2, 3, lc=False)])
    assert len(U) == 2
    assert U.measure() == 2
    assert Fraction(1, 2) in U and 2 not in U and Fraction(5, 2) in U
    # open meets open at a point: stays split
    V = IntervalUnion([iv(golden, 0, 1, hc=False), iv(golden, 1, 2, lc=False)])
    assert len(V) == 2 and 1 not in V


def test_preimage_golden(golden):
    T = beta_map(golden)
    b = golden.beta
    parts = preimage(T, (0, Fraction(1, 10)))
    U = IntervalUnion(parts)
    ends = [(c.lo, c.hi) for c in U]
    assert ends == [(golden.zero, Fraction(1, 10) / b), (1 / b, (1 + Fraction(1, 10)) / b)]
    assert U.measure() == Fraction(1, 10) / b * 2


def test_preimage_tent():
    S = tent_map()
    F = S.field
    U = IntervalUnion(preimage(S, (0, Fraction(1, 2))))
    assert U.measure() == Fraction(1, 2)
    assert Fraction(1, 8) in U and Fraction(7, 8) in U and Fraction(1, 2) not in U


def test_identity_coupling(golden):
    T = beta_map(golden)
    x0 = golden.element(Fraction(2, 7))
    rep = coupling_forward(T, T, x0, 200)
    assert rep.ok and rep.k == list(range(201))
    assert all(o == golden.zero for o in rep.offsets)
    rev = coupling_reverse(T, T, x0, 200)
    assert rev.ok and rev.k == list(range(201)) and set(rev.js) == {0}


def test_kn1_third():
    T, S = kn_pair(1)
    rep = coupling_forward(T, S, Fraction(1, 3), 6)
    assert rep.k == [0, 1, 3, 5, 7, 9, 11]
    assert all(o == 0 for o in rep.offsets) and rep.ok
    rev = coupling_reverse(T, S, Fraction(1, 3), 6)
    assert rev.k == [0, 1, 1, 2, 2, 3, 3]
    assert rev.js == [0, 0, 1, 0, 1, 0, 1]
    assert rev.ok


@pytest.mark.parametrize("which", [1, 2])
def test_kn_pairs_clean(which):
    T, S = kn_pair(which)
    W = coupling_window(S)
    for x0 in (Fraction(1, 2), Fraction(2, 9)):
        assert coupling_forward(T, S, x0, 1500, W).ok
        assert coupling_reverse(T, S, x0, 1500, W).ok


def test_small_window_strict():
    S = tent_map()
    T = beta_map(S.field)
    W = coupling_window(S)

    class Tiny:
        elements = [e for e in W.elements if e == 0]

    rep = coupling_forward(T, S, Fraction(2, 9), 50, Tiny)
    assert not rep.ok
    with pytest.raises(OffsetOutsideWindow):
        coupling_forward(T, S, Fraction(2, 9), 50, Tiny, strict=True)


def test_field_mismatch(golden):
    T, _ = kn_pair(1)
    with pytest.raises(FieldMismatch):
        coupling_forward(T, beta_map(golden), Fraction(1, 2), 3)


def test_tilde_set_whole_interval():
    T, S = kn_pair(2)
    W = coupling_window(S)
    til = tilde_set((0, 1), W, S.M)
    assert [(c.lo, c.hi) for c in til.union] == [(0, 1)]
    assert til.measure == 1 and til.certified


def test_tilde_set_empty_window():
    with pytest.raises(EmptyWindow):
        tilde_set((0, 1), [], 2)


def test_membership_kn2():
    T, S = kn_pair(2)
    W = coupling_window(S)
    I = (Fraction(1, 4), Fraction(1, 2))
    x0 = Fraction(1, 2)
    rep = coupling_forward(T, S, x0, 2000, W)
    til = tilde_set(I, W, S.M)
    assert membership_implication_check(rep, I, til) == []
    # measure certificate for the forward direction
    assert til.measure <= 2 * len(W.elements) * Fraction(1, 4)
    rev = coupling_reverse(T, S, x0, 2000, W)
    til_r = tilde_set(I, W, S.M, "reverse", T)
    assert til_r.certified
    assert membership_implication_check(rev, I, til_r) == []
    # kn2 couples with offset 0 all the way
    assert {str(o) for o in rep.offsets} == {"0"}


def test_dropping_a_translate_breaks_tent():
    S = tent_map()
    T = beta_map(S.field)
    W = coupling_window(S)
    assert sorted(str(e) for e in W.elements) == ["-1", "0", "1", "2"]
    I = (Fraction(1, 4), Fraction(1, 2))
    rep = coupling_forward(T, S, Fraction(2, 9), 2000, W)
    assert rep.ok
    assert membership_implication_check(rep, I, tilde_set(I, W, S.M)) == []
    for t in {o for o in rep.offsets}:
        assert membership_implication_check(rep, I, tilde_set(I, W, S.M, exclude=[t]))


def test_birkhoff_exact():
    pts = [Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)] * 5
    assert birkhoff_frequency(pts, (0, Fraction(1, 2))) == Fraction(2, 3)
    arr = np.array([0.1, 0.6, 0.7, 0.9])
    assert birkhoff_frequency(arr, (0.5, 1.0)) == 0.75
    assert birkhoff_frequency([], (0, 1)) == 0


def test_star_discrepancy():
    assert star_discrepancy([0.5]) == 0.5
    n = 100
    pts = (np.arange(n) + 0.5) / n
    assert star_discrepancy(pts) == pytest.approx(1 / (2 * n))
    assert star_discrepancy(pts, lambda x: x * x) > 0.2


def test_generic_tent():
    S = tent_map()
    T = beta_map(S.field)
    rep = generic_report(T, S, seed=12345, N=40000, bins=8)
    for name in ("T", "S"):
        assert rep.sup_distance[name] < 0.01
        assert rep.histograms[name].sum() == pytest.approx(1.0)
        assert rep.star_discrepancy[name] < 0.02


def test_generic_report_is_deterministic():
    T, S = kn_pair(2)
    a = generic_report(T, S, seed=7, N=3000, bins=16)
    b = generic_report(T, S, seed=7, N=3000, bins=16)
    assert a.to_json() == b.to_json()
