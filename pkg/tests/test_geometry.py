"""Group law, quasi-metric, and even-scaling witness checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solvdelone.geometry import (
    HRSpec,
    QIParams,
    SOL_IDENTITY,
    SolPoint,
    even_scaling_witness,
    sol_dist,
    sol_inv,
    sol_mul,
)

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_identity_element():
    p = SolPoint(0.3, -2.0, 1.5)
    q = sol_mul(SOL_IDENTITY, p)
    assert (q.x, q.y, q.t) == (p.x, p.y, p.t)


def test_mul_height_zero_is_translation():
    p = sol_mul(SolPoint(1, 2, 0), SolPoint(3, 4, 5))
    assert (p.x, p.y, p.t) == (4.0, 6.0, 5.0)


def test_mul_exponential_action():
    p = sol_mul(SolPoint(0, 0, 1), SolPoint(1, 0, 0))
    assert abs(p.x - math.e) < 1e-15 and p.y == 0 and p.t == 1


def test_inverse_cases():
    assert sol_inv(SOL_IDENTITY) == SOL_IDENTITY
    q = sol_inv(SolPoint(2.0, -3.0, 0.0))
    assert (q.x, q.y, q.t) == (-2.0, 3.0, 0.0)
    q = sol_inv(SolPoint(1.0, 0.0, 1.0))
    assert abs(q.x + math.exp(-1)) < 1e-15 and q.t == -1.0


@given(st.tuples(coord, coord, coord), st.tuples(coord, coord, coord))
@settings(max_examples=200, deadline=None)
def test_inverse_property(a, b):
    p = SolPoint(a[0], a[1], a[2] / 5)
    r = sol_mul(p, sol_inv(p))
    assert abs(r.x) < 1e-9 and abs(r.y) < 1e-9 and abs(r.t) < 1e-12


def test_associativity_random():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        p, q, r = (
            SolPoint(*rng.uniform(-3, 3, 2), rng.uniform(-2, 2)) for _ in range(3)
        )
        lhs = sol_mul(sol_mul(p, q), r)
        rhs = sol_mul(p, sol_mul(q, r))
        assert abs(lhs.x - rhs.x) + abs(lhs.y - rhs.y) + abs(lhs.t - rhs.t) < 1e-9


def test_dist_examples():
    p = SolPoint(0.7, -0.2, 3.0)
    assert sol_dist(p, p) == 0.0
    assert sol_dist(SOL_IDENTITY, SolPoint(5, 0, 0)) == 5.0
    assert sol_dist(SOL_IDENTITY, SolPoint(0, 0, 2)) == 2.0


def test_dist_symmetry_and_definiteness():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        p = SolPoint(*rng.uniform(-5, 5, 2), rng.uniform(-10, 10))
        q = SolPoint(*rng.uniform(-5, 5, 2), rng.uniform(-10, 10))
        assert sol_dist(p, q) == sol_dist(q, p)
        assert sol_dist(p, q) > 0 or (p == q)


def test_dist_left_invariance():
    # the quasi-metric is exactly invariant under left multiplication
    rng = np.random.default_rng(2)
    for _ in range(2000):
        g = SolPoint(*rng.uniform(-5, 5, 2), rng.uniform(-3, 3))
        p = SolPoint(*rng.uniform(-5, 5, 2), rng.uniform(-3, 3))
        q = SolPoint(*rng.uniform(-5, 5, 2), rng.uniform(-3, 3))
        d0 = sol_dist(p, q)
        d1 = sol_dist(sol_mul(g, p), sol_mul(g, q))
        assert abs(d0 - d1) <= 1e-9 * max(1.0, d0)


def test_dist_triangle_inequality_on_level_sets():
    # restricted to a fixed height the formula is a weighted L1 metric
    rng = np.random.default_rng(3)
    for _ in range(2000):
        t = rng.uniform(-10, 10)
        p = SolPoint(*rng.uniform(-5, 5, 2), t)
        q = SolPoint(*rng.uniform(-5, 5, 2), t)
        r = SolPoint(*rng.uniform(-5, 5, 2), t)
        assert sol_dist(p, r) <= sol_dist(p, q) + sol_dist(q, r) + 1e-9


def test_dist_triangle_inequality_fails_across_heights():
    # witness: climbing shortcuts horizontal travel, so the unrestricted
    # triangle inequality is false even at bounded heights
    p = SolPoint(-1.0, 0.0, -1.0)
    r = SolPoint(1.0, 0.0, -1.0)
    q = SolPoint(0.0, 0.0, 0.0)
    assert sol_dist(p, r) > sol_dist(p, q) + sol_dist(q, r) + 0.1


def test_even_scaling_witness_log_integers():
    w = even_scaling_witness([math.log(2), math.log(4)], 2.0)
    assert abs(w - 1.0) < 1e-9


def test_even_scaling_witness_unit_roots():
    w = even_scaling_witness([1.0, 1.0], 1.0)
    assert abs(w - math.log(2)) < 1e-9


def test_even_scaling_witness_incommensurable():
    assert even_scaling_witness([1.0, math.pi], 100.0) is None


def test_even_scaling_witness_fractional():
    # a single root log(4): e^{t log 4} = 2 already at t = 1/2
    w = even_scaling_witness([math.log(4)], 2.0)
    assert abs(w - 0.5) < 1e-9


def test_hr_spec_construction():
    spec = HRSpec.from_even_integers([2, 4], 1.0)
    assert spec.n == 2
    assert abs(spec.roots[0] - math.log(2)) < 1e-15
    assert spec.scale_factors(1.0) == [2, 4]
    assert spec.scale_factors(2.0) == [4, 16]
    # alpha_{n+1} = -sum alpha_i exactly
    t = (0.3, -1.2)
    assert spec.alpha(3, t) == -(spec.alpha(1, t) + spec.alpha(2, t))


def test_hr_spec_rejects_odd_integers():
    with pytest.raises(ValueError):
        HRSpec.from_even_integers([2, 3], 1.0)


def test_hr_free_roots_have_no_witness():
    spec = HRSpec.from_roots([1.0, 2.0])
    with pytest.raises(ValueError):
        spec.scale_factors(1.0)


def test_qi_params_validation():
    QIParams(K=2, C=1, L=3, A=0.5, D=1.0)
    with pytest.raises(ValueError):
        QIParams(K=0.5)
    with pytest.raises(ValueError):
        QIParams(C=-1)
