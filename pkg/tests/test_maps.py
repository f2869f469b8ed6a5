import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pisotdyn import (affine_form, apply, apply_one_sided, beta_map, build_map, digit_alpha,
                      flip_radix_map, flipped_beta_counterexample, handelman_map, handelman_search,
                      iterate_exact, kn_pair, make_field, st_map, tent_map)
from pisotdyn.errors import (BadArrangement, BadIdentity, BetaOutOfRange, ImageEscapes, LengthMismatch,
                             NoSidedNeighborhood, OutOfDomain, PartitionGap, PartitionOverlap,
                             TOutOfRange)
from pisotdyn.maps import (Branch, builtin_map, dissipative_interval, format_map_spec, parse_map_spec,
                           t_max)


def _tiles(plmap):
    """Independent tiling check: consecutive branches share endpoints with complementary flags."""
    brs = plmap.branches
    assert brs[0].left == 0 and brs[0].left_closed
    assert brs[-1].right == 1 and brs[-1].right_closed
    for a, b in zip(brs, brs[1:]):
        assert a.right == b.left
        assert a.right_closed != b.left_closed


def test_golden_beta_map(golden):
    T = beta_map(golden)
    _tiles(T)
    assert len(T.branches) == 2
    assert T.branches[0].right == golden.beta.inverse()
    assert apply(T, golden.one) == (golden.beta - 1, 1)


def test_integer_beta_map(two):
    T = beta_map(two)
    _tiles(T)
    assert [b.right for b in T.branches] == [Fraction(1, 2), 1, 1]
    assert apply(T, two.one)[0] == 0
    assert apply(T, Fraction(3, 4))[0] == Fraction(1, 2)


def test_big_beta_map(big):
    T = beta_map(big)
    _tiles(T)
    inv = big.beta.inverse()
    assert [b.right for b in T.branches[:2]] == [inv, 2 * inv]
    assert len(T.branches) == 3


def test_build_map_errors(golden):
    inv = golden.beta.inverse()
    with pytest.raises(PartitionGap):
        build_map(golden, [Branch(golden.zero, golden.element(Fraction(1, 2)), True, False, 1, 1, golden.zero)])
    with pytest.raises(PartitionOverlap):
        build_map(golden, [Branch(golden.zero, inv, True, True, 1, 1, golden.zero),
                           Branch(inv, golden.one, True, True, 1, 1, -golden.one)])
    with pytest.raises(ImageEscapes):
        build_map(golden, [Branch(golden.zero, golden.one, True, True, 1, 1, golden.zero)])


def test_flipped_example_is_valid(plastic):
    S = flipped_beta_counterexample(plastic)
    _tiles(S)
    assert S.branches[0].epsilon == -1
    a, b = dissipative_interval(plastic)
    assert abs(float(a) - 0.32471795724) < 1e-10
    assert abs(float(b) - 0.56984029099) < 1e-10


def test_flipped_needs_small_beta():
    with pytest.raises(BetaOutOfRange):
        flipped_beta_counterexample(make_field([-3, 0, 1]))  # sqrt 3 > sqrt 2


def test_flip_radix():
    T = tent_map()
    assert T.label == "tent"
    assert apply(T, Fraction(3, 4))[0] == Fraction(1, 2)
    assert apply(T, Fraction(1))[0] == 0
    B = flip_radix_map(2, (0, 0))
    for x in (Fraction(1, 3), Fraction(5, 7), Fraction(1, 2)):
        assert apply(B, x)[0] == (2 * x) % 1
    D = flip_radix_map(10, (1,) + (0,) * 9)
    _tiles(D)
    assert apply(D, Fraction(1, 20))[0] == Fraction(1, 2)
    with pytest.raises(LengthMismatch):
        flip_radix_map(3, (0, 1))


def test_kn_pairs(golden):
    T1, S1 = kn_pair(1)
    assert [b.m for b in S1.branches] == [1, 2, 2]
    assert [b.right for b in S1.branches] == [Fraction(1, 2), Fraction(3, 4), 1]
    assert apply(S1, Fraction(2, 3))[0] == Fraction(2, 3)
    for x in (Fraction(1, 3), Fraction(3, 5)):
        assert apply(T1, x)[0] == (2 * x) % 1
    T2, S2 = kn_pair(2)
    assert [b.m for b in S2.branches] == [1, 2]
    assert S2.branches[0].right == S2.field.beta.inverse()
    assert S2.branches[1].b == -S2.field.beta


def test_handelman(golden, two):
    assert (1, 1) in handelman_search(golden, 2, 3)
    assert (2,) in handelman_search(two, 1, 3)
    assert (1, 2) in handelman_search(two, 2, 3)
    for vec in handelman_search(golden, 3, 3):
        assert sum(a * golden.beta ** -(i + 1) for i, a in enumerate(vec)) == 1
    H = handelman_map(golden, [1, 1], None, ["+", "+"])
    _, S2 = kn_pair(2)
    assert H.branches == S2.branches
    Hm = handelman_map(golden, [1, 1], None, ["+", "-"])
    b = Hm.branches[1]
    assert b.epsilon == -1 and b.m == 2
    # closure maps onto [0, 1]
    assert Hm.evaluate_branch(1, b.left) == 1 and Hm.evaluate_branch(1, b.right) == 0
    tent = handelman_map(two, [2], None, ["+", "-"])
    for x in (Fraction(1, 5), Fraction(1, 2), Fraction(5, 6), Fraction(1)):
        assert apply(tent, x)[0] == apply(tent_map(), x)[0]
    with pytest.raises(BadIdentity):
        handelman_map(golden, [1, 2])
    with pytest.raises(BadArrangement):
        handelman_map(golden, [1, 1], [1, 1])


def test_st_map(big, two):
    S0 = st_map(big, 0)
    assert [b.right for b in S0.branches] == [b.right for b in beta_map(big).branches]
    assert t_max(big) == 3 * big.beta.inverse() - 1
    t = Fraction(1, 10)
    St = st_map(big, t)
    cut = 2 * big.beta.inverse() - t
    assert St.branches[-1].left == cut
    y, i = apply(St, cut)
    assert y == big.beta * (cut - 1) + 1 and i == len(St.branches) - 1
    with pytest.raises(TOutOfRange):
        st_map(big, t_max(big) + Fraction(1, 1000))
    with pytest.raises(TOutOfRange):
        st_map(two, Fraction(1, 10))
    assert st_map(two, 0).branches == beta_map(two).branches


def test_one_sided(big):
    t = Fraction(1, 10)
    St = st_map(big, t)
    c = 2 * big.beta.inverse() - t
    y, side, _ = apply_one_sided(St, c, "right")
    assert y == big.beta * c - big.beta + 1 and side == "right"
    y, side, _ = apply_one_sided(St, c, "left")
    assert y == big.beta * c - 1 and side == "left"
    y, side, _ = apply_one_sided(tent_map(), Fraction(1, 2), "left")
    assert y == 1 and side == "left"
    y, side, _ = apply_one_sided(tent_map(), Fraction(1, 4), "left")
    assert y == Fraction(1, 2) and side == "left"
    y, side, _ = apply_one_sided(tent_map(), Fraction(3, 4), "left")
    assert y == Fraction(1, 2) and side == "right"
    with pytest.raises(NoSidedNeighborhood):
        apply_one_sided(St, big.zero, "left")
    with pytest.raises(OutOfDomain):
        apply(St, big.element(2))


def test_affine_form_examples(golden):
    _, S1 = kn_pair(1)
    af = affine_form(S1, Fraction(1, 3), 2)
    assert af.exponent == 3
    assert af.evaluate(S1.field.element(Fraction(1, 3))) == Fraction(2, 3)
    af0 = affine_form(S1, Fraction(1, 3), 0)
    assert (af0.sign, af0.exponent) == (1, 0) and af0.intercept == 0
    T2 = beta_map(golden)
    af = affine_form(T2, golden.one, 2)
    assert af.exponent == 2
    assert af.sign * golden.beta ** 2 + af.intercept == 0


def test_digit_alpha(big):
    S0 = st_map(big, 0)
    assert digit_alpha(S0, Fraction(1, 5)) == 0
    t = Fraction(1, 10)
    St = st_map(big, t)
    assert digit_alpha(St, Fraction(99, 100)) == big.beta - 1
    assert digit_alpha(St, big.beta.inverse() + Fraction(1, 100)) == 1


MAPS = ["beta", "kn1", "kn2", "tent", "st(t=(1/10))", "flip(r=3; s=1,0,1)", "handelman(a=1,1; signs=+,-)"]


@pytest.mark.parametrize("spec", MAPS)
def test_map_spec_round_trip(spec, big, golden):
    field = big if spec.startswith("st") else golden
    m = builtin_map(spec, field)
    _tiles(m)
    again = parse_map_spec(format_map_spec(m))
    assert again.branches == m.branches
    assert again == m


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3), st.integers(1, 97), st.integers(2, 101), st.integers(0, 50))
def test_affine_form_soundness(which, num, den, n):
    maps = [kn_pair(1)[1], kn_pair(2)[1], tent_map(), handelman_map(kn_pair(2)[1].field, [1, 1], None, ["-", "+"])]
    S = maps[which]
    x0 = S.field.element(Fraction(min(num, den), den))
    af = affine_form(S, x0, n)
    orb = iterate_exact(S, x0, n)
    beta = S.field.beta
    assert af.sign * beta ** af.exponent * x0 + af.intercept == orb.points[-1]
    assert af.exponent == orb.theta[-1]
    steps = [b - a for a, b in zip(orb.theta, orb.theta[1:])]
    assert all(1 <= s <= S.M for s in steps)
