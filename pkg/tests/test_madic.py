"""Exact m-adic arithmetic, the coordinate-model metric, and cylinder maps."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from solvdelone.madic import (
    BaseMismatchError,
    BsPoint,
    CylinderMap,
    MadicBall,
    MadicRational,
    ModelViolationError,
    ball_decompose_image,
    bs_dist,
    madic_dist,
    madic_valuation,
    unit_ball,
)

# elements of Z[1/2]: integer mantissa times a power of two
rationals = st.builds(
    lambda num, e: Fraction(num, 2**e),
    st.integers(min_value=-(10**6), max_value=10**6),
    st.integers(min_value=0, max_value=12),
)


def m2(v) -> MadicRational:
    return MadicRational.from_fraction(Fraction(v), 2)


def test_valuation_examples():
    assert madic_valuation(m2(0)) == math.inf
    assert madic_valuation(m2(4)) == 2
    assert madic_valuation(m2(Fraction(1, 2))) == -1
    assert madic_valuation(MadicRational.from_int(45, 3)) == 2  # 45 = 5 * 9


def test_canonical_form_idempotent_and_value_preserving():
    for val in (Fraction(12), Fraction(7, 8), Fraction(-40), Fraction(0), Fraction(96, 4)):
        q = m2(val)
        q2 = MadicRational(q.mantissa, q.exponent, 2)
        assert (q2.mantissa, q2.exponent) == (q.mantissa, q.exponent)
        assert q.as_fraction() == val
        if not q.is_zero:
            assert q.mantissa % 2 != 0


def test_arithmetic_exact():
    a, b = m2(Fraction(3, 4)), m2(Fraction(5, 8))
    assert (a + b).as_fraction() == Fraction(11, 8)
    assert (a - b).as_fraction() == Fraction(1, 8)
    assert (a * b).as_fraction() == Fraction(15, 32)
    assert (-a).as_fraction() == Fraction(-3, 4)


def test_from_fraction_rejects_foreign_denominator():
    with pytest.raises(ValueError):
        MadicRational.from_fraction(Fraction(1, 3), 2)
    # composite base: 1/2 is in Z[1/4]
    q = MadicRational.from_fraction(Fraction(1, 2), 4)
    assert q.as_fraction() == Fraction(1, 2)


def test_parse_roundtrip():
    q = m2(Fraction(-7, 16))
    assert MadicRational.parse(str(q)) == q
    with pytest.raises(BaseMismatchError):
        MadicRational.parse(str(q), m=3)


def test_dist_examples():
    y = m2(Fraction(5, 4))
    assert madic_dist(y, y) == 0.0
    assert madic_dist(m2(0), m2(4)) == 0.25
    assert madic_dist(m2(0), m2(Fraction(1, 2))) == 2.0


def test_dist_base_mismatch():
    with pytest.raises(BaseMismatchError):
        madic_dist(m2(1), MadicRational.from_int(1, 3))


@given(rationals, rationals, rationals)
@settings(max_examples=300, deadline=None)
def test_ultrametric_inequality(a, b, c):
    y1, y2, y3 = m2(a), m2(b), m2(c)
    assert madic_dist(y1, y3) <= max(madic_dist(y1, y2), madic_dist(y2, y3)) + 0


def test_reduce_mod():
    q = m2(13)  # digits 1011
    assert q.reduce_mod(2).as_fraction() == 1
    assert q.reduce_mod(3).as_fraction() == 5
    assert q.reduce_mod(0).as_fraction() == 0
    h = m2(Fraction(5, 2))
    assert h.reduce_mod(1).as_fraction() == Fraction(1, 2)


def test_bs_point_and_dist():
    p0 = BsPoint(m2(0), m2(0), 0)
    assert bs_dist(p0, p0) == 0.0
    assert bs_dist(p0, BsPoint(m2(3), m2(0), 0)) == 3.0
    assert bs_dist(p0, BsPoint(m2(0), m2(1), 0)) == 1.0  # d_{Q_2}(0,1) = 2^0
    assert bs_dist(p0, BsPoint(m2(0), m2(0), 3)) == 3.0


def test_bs_point_from_group_truncates_low_digits():
    p = BsPoint.from_group(m2(13), 2)
    assert p.y.as_fraction() == 1  # 13 mod 4
    assert p.x.as_fraction() == 13


def test_ball_membership():
    ball = MadicBall(m2(1), 2)  # 1 + 4 Z_2
    assert ball.contains(m2(5))
    assert ball.contains(m2(1))
    assert not ball.contains(m2(3))
    assert ball.radius == 0.25


def test_decompose_identity():
    balls = ball_decompose_image(CylinderMap.identity(2), unit_ball(2), 1.0)
    assert len(balls) == 1 and balls[0].j == 0


def test_decompose_multiplication_by_two():
    balls = ball_decompose_image(CylinderMap.scale(2, 1), unit_ball(2), 2.0)
    assert len(balls) == 1 and balls[0].j == 1
    assert balls[0].center.is_zero
    # count bound m^j / L <= |I|: 2/2 <= 1
    assert 2**1 / 2.0 <= len(balls) <= 2.0**3


def test_decompose_depth_one_swap():
    f = CylinderMap.cylinder_permutation(2, 1, [1, 0])
    balls = ball_decompose_image(f, unit_ball(2), 2.0)
    assert len(balls) == 2 and all(b.j == 1 for b in balls)
    centers = sorted(b.center.as_fraction() for b in balls)
    assert centers == [0, 1]


def test_decompose_balls_disjoint_and_cover_prefix_images():
    # depth-(j+2) cylinder representatives all land in exactly one ball
    m = 3
    f = CylinderMap.cylinder_permutation(m, 1, [2, 0, 1])
    balls = ball_decompose_image(f, unit_ball(m), float(m))
    j = balls[0].j
    for z in range(m ** (j + 2)):
        y = f(MadicRational.from_int(z, m))
        hits = [b for b in balls if b.contains(y)]
        assert len(hits) == 1


def test_decompose_rejects_overlapping_pieces():
    # both cylinders sent onto the same ball: not injective
    bad = CylinderMap(
        2, 1,
        ((MadicRational.from_int(0, 2), 1, 0), (MadicRational.from_int(0, 2), 1, 0)),
    )
    with pytest.raises(ModelViolationError):
        ball_decompose_image(bad, unit_ball(2), 2.0)


def test_decompose_rejects_false_lipschitz_claim():
    f = CylinderMap.scale(2, 3)  # shifts valuations by 3: 8-biLipschitz
    with pytest.raises(ModelViolationError):
        ball_decompose_image(f, unit_ball(2), 1.5)


def test_cylinder_map_requires_unit():
    with pytest.raises(ValueError):
        CylinderMap(2, 0, ((MadicRational.from_int(0, 2), 2, 0),))


def test_mixed_map_unequal_pieces():
    pieces = (
        (MadicRational.from_int(0, 2), 1, 1),   # contracts cylinder 0
        (MadicRational.from_int(1, 2), 1, 0),   # translates cylinder 1
    )
    f = CylinderMap(2, 1, pieces)
    balls = ball_decompose_image(f, unit_ball(2), 2.0)
    assert all(b.j == 2 for b in balls)
    assert len(balls) == 3  # one radius-1/4 image + a split radius-1/2 image
