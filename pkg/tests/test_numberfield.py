import math
import time
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from pisotdyn import Classification, classify, conjugate_bound, fe_floor, fe_frac, fe_sign, make_field
from pisotdyn.errors import (FieldDivisionByZero, FieldMismatch, NoRootInInterval, NotMonic,
                             Reducible, RootNotGreaterThanOne)
from pisotdyn.numberfield import format_field_spec, parse_field_spec

SQ5 = math.sqrt(5)


def test_golden_field(golden):
    assert golden.degree == 2
    assert abs(float(golden.beta) - (1 + SQ5) / 2) < 1e-15
    disc = golden.conjugate_discs(64)[1]
    assert abs(float(disc.center[0]) - (1 - SQ5) / 2) < 1e-15
    assert disc.radius <= Fraction(1, 2**64)


def test_degree_one(two):
    assert two.degree == 1
    assert two.beta == 2
    assert len(two.conjugate_discs(64)) == 1


def test_big_field(big):
    assert abs(float(big.beta) - (3 + SQ5) / 2) < 1e-15
    assert abs(float(big.conjugate_discs(64)[1].center[0]) - (3 - SQ5) / 2) < 1e-15


@pytest.mark.parametrize("poly,hint,exc", [
    ([1, 0, -1], None, NotMonic),
    ([-1, -1, 2], None, NotMonic),
    ([-1, 0, 1], None, Reducible),
    ([2, -3, 1], None, Reducible),
    ([-1, -1, 1], (2, 3), NoRootInInterval),
    ([2, 1, 1], None, RootNotGreaterThanOne),
])
def test_make_field_errors(poly, hint, exc):
    with pytest.raises(exc):
        make_field(poly, hint)


@pytest.mark.parametrize("poly,expected", [
    ([-1, -1, 1], Classification.PISOT),
    ([1, -3, 1], Classification.PISOT),
    ([-1, -1, 0, 1], Classification.PISOT),
    ([-2, 0, 1], Classification.NEITHER),
    ([-3, 0, 0, 1], Classification.NEITHER),
    ([-1, -1, 0, 0, 0, 1], Classification.PERRON_ONLY),
    ([1, -1, -1, -1, 1], Classification.PERRON_ONLY),  # a Salem number
])
def test_classify(poly, expected):
    assert classify(make_field(poly)) is expected


@pytest.mark.parametrize("n", range(2, 11))
def test_integers_are_pisot(n):
    assert classify(make_field([-n, 1])) is Classification.PISOT


def test_golden_arithmetic(golden):
    b = golden.beta
    assert (b * b).coords == (1, 1)
    assert (b - 1) * b == golden.one
    x = golden.element([Fraction(2, 3), Fraction(-5, 7)])
    assert x + 0 == x
    assert fe_frac(b).coords == (-1, 1)
    assert fe_sign(b * b - b - 1) == 0
    assert fe_sign(b - 2) == -1
    assert fe_floor(b) == 1


def test_floor_big(big):
    assert fe_floor(big.beta) == 2
    assert fe_floor(-big.beta) == -3


def test_division_by_zero(golden):
    with pytest.raises(FieldDivisionByZero):
        golden.one / golden.zero


def test_field_mismatch(golden, big):
    with pytest.raises(FieldMismatch):
        golden.beta + big.beta


def test_conjugate_bound(golden):
    E = [golden.element(v) for v in (0, 1, -1)]
    assert conjugate_bound(golden, E) == [1]
    (A,) = conjugate_bound(golden, [golden.beta])
    assert Fraction(618, 1000) <= A <= Fraction(619, 1000)
    assert A >= Fraction(SQ5 - 1) / 2 - Fraction(1, 10**12)
    assert conjugate_bound(golden, [golden.zero]) == [0]


def test_tiny_float_keeps_relative_precision(big):
    x = big.beta.inverse() ** 80
    assert float(x) > 0
    assert abs(float(x) / ((3 + SQ5) / 2) ** -80 - 1) < 1e-12


def test_field_spec_round_trip(golden):
    text = format_field_spec(golden)
    g2 = parse_field_spec(text)
    assert g2.min_poly == golden.min_poly
    assert g2.beta.coords == (0, 1)
    g3 = parse_field_spec("poly = [−1,−1,1]; root in [1/1, 2/1]")
    assert abs(float(g3.beta) - (1 + SQ5) / 2) < 1e-15


def test_classify_runtime():
    t0 = time.perf_counter()
    classify(make_field([-1, -1, 0, 1]))
    assert time.perf_counter() - t0 < 1.0


coords = st.fractions(min_value=-50, max_value=50, max_denominator=30)


@settings(max_examples=60, deadline=None)
@given(st.lists(coords, min_size=3, max_size=3), st.lists(coords, min_size=3, max_size=3))
def test_canonicality(plastic_coords_a, plastic_coords_b):
    F = make_field([-1, -1, 0, 1], (1, 2))
    x = F.element(plastic_coords_a)
    y = F.element(plastic_coords_b)
    assert (x + y - y).coords == x.coords
    if any(plastic_coords_b):
        assert ((x * y) / y).coords == x.coords


@settings(max_examples=60, deadline=None)
@given(st.lists(coords, min_size=2, max_size=2), st.lists(coords, min_size=2, max_size=2))
def test_sign_matches_enclosure(a, b):
    F = make_field([-1, -1, 1], (1, 2))
    x, y = F.element(a), F.element(b)
    z = x - y
    # independent route: evaluate with mpmath at 60 digits
    with mpmath.workdps(60):
        phi = (1 + mpmath.sqrt(5)) / 2
        val = (mpmath.mpf(a[0].numerator) / a[0].denominator - mpmath.mpf(b[0].numerator) / b[0].denominator
               + (mpmath.mpf(a[1].numerator) / a[1].denominator
                  - mpmath.mpf(b[1].numerator) / b[1].denominator) * phi)
    s = fe_sign(z)
    if s == 0:
        assert z.coords == (0, 0)
    else:
        assert s == (1 if val > 0 else -1)
    lo, hi = (x + y).enclosure(80)
    lx, hx = x.enclosure(80)
    ly, hy = y.enclosure(80)
    assert lo <= hx + hy and hi >= lx + ly
