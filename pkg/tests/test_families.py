import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from invlimit.families import (
    FamilyParam,
    IntervalBox,
    entropy_estimate,
    evaluate,
    image_interval,
    itinerary,
    lift_eval,
    phase_interval,
    preimages,
    stabilization_index,
    tent_periodic_count,
    tent_periodic_points,
)


def test_parameter_ranges():
    with pytest.raises(ValueError):
        FamilyParam.tent(2.5)
    with pytest.raises(ValueError):
        FamilyParam.quadratic(-1.0)
    with pytest.raises(ValueError):
        FamilyParam.standard(9.0, 0.1)
    with pytest.raises(ValueError):
        FamilyParam("logistic", (1.0,))


@pytest.mark.parametrize("p, x, y", [
    (FamilyParam.tent(1.5), 0.0, 0.0),
    (FamilyParam.tent(1.5), 0.5, 0.75),
    (FamilyParam.quadratic(2.0), 0.0, 2.0),
])
def test_eval_examples(p, x, y):
    assert evaluate(p, x) == pytest.approx(y)


@pytest.mark.parametrize("b, w, x, y", [
    (0.0, 0.3, 2.0, 2.3),
    (1.7, 0.4, 0.0, 0.4),
    (2 * math.pi, 0.0, 0.25, 1.25),
])
def test_lift_examples(b, w, x, y):
    assert lift_eval(FamilyParam.standard(b, w), x) == pytest.approx(y, abs=1e-12)


@given(st.floats(0, 8), st.floats(0, 1), st.floats(-50, 50), st.integers(-5, 5))
def test_lift_degree_one(b, w, x, k):
    p = FamilyParam.standard(b, w)
    assert lift_eval(p, x + k) == pytest.approx(lift_eval(p, x) + k, abs=1e-12)


def test_quadratic_phase_interval_is_forward_invariant():
    for a in (0.0, 0.5, 1.4, 2.0):
        p = FamilyParam.quadratic(a)
        box = phase_interval(p)
        beta = (1 + math.sqrt(1 + 4 * a)) / 2
        assert (box.lo, box.hi) == pytest.approx((-beta, beta))
        img = image_interval(p, box)
        assert box.lo - 1e-12 <= img.lo and img.hi <= box.hi + 1e-12


@pytest.mark.parametrize("p, box, expected", [
    (FamilyParam.tent(1.5), (0.0, 1.0), (0.0, 0.75)),
    (FamilyParam.tent(1.5), (0.0, 0.75), (0.0, 0.75)),
    (FamilyParam.quadratic(2.0), (-2.0, 2.0), (-2.0, 2.0)),
])
def test_image_interval_examples(p, box, expected):
    img = image_interval(p, IntervalBox(*box))
    assert (img.lo, img.hi) == pytest.approx(expected)


def test_standard_image_full_when_onto():
    assert image_interval(FamilyParam.standard(0.5, 0.2), IntervalBox(0.0, 1.0)).full


@given(st.floats(0, 2), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_image_interval_monotone(s, a, b, c, d):
    p = FamilyParam.tent(s)
    lo2, hi2 = sorted((a, b))
    lo1 = lo2 + (hi2 - lo2) * min(c, d)
    hi1 = lo2 + (hi2 - lo2) * max(c, d)
    small = image_interval(p, IntervalBox(lo1, hi1))
    big = image_interval(p, IntervalBox(lo2, hi2))
    assert big.lo - 1e-12 <= small.lo and small.hi <= big.hi + 1e-12


@given(st.floats(-0.5, 2.0), st.floats(0, 1), st.floats(0, 1))
def test_quadratic_image_monotone(a, u, v):
    p = FamilyParam.quadratic(a)
    box = phase_interval(p)
    lo, hi = sorted((box.lo + u * (box.hi - box.lo), box.lo + v * (box.hi - box.lo)))
    small = image_interval(p, IntervalBox(lo, hi))
    big = image_interval(p, box)
    assert big.lo - 1e-12 <= small.lo and small.hi <= big.hi + 1e-12


def test_stabilization_examples():
    assert stabilization_index(FamilyParam.tent(1.5)) == 1
    assert stabilization_index(FamilyParam.tent(0.5), 64, 1e-9) is None
    assert stabilization_index(FamilyParam.tent(0.0)) is None
    assert stabilization_index(FamilyParam.tent(2.0)) == 0
    for b, w in ((0.0, 0.0), (1.0, 0.3), (5.0, 0.9)):
        assert stabilization_index(FamilyParam.standard(b, w)) == 0


@given(st.floats(1.0, 2.0 - 1e-6, exclude_min=True))
def test_expanding_tents_stabilize_at_one(s):
    # within the relative tolerance of s = 2 the first image already equals [0, 1]
    assert stabilization_index(FamilyParam.tent(s)) == 1


@given(st.floats(0.0, 1.0 - 1e-6))
def test_contracting_tents_never_stabilize(s):
    assert stabilization_index(FamilyParam.tent(s), 64, 1e-9) is None


def test_tent_periodic_point_examples():
    assert [x for x, _ in tent_periodic_points(2.0, 1)] == pytest.approx([0.0, 2 / 3])
    assert [x for x, _ in tent_periodic_points(1.5, 1)] == pytest.approx([0.0, 0.6])
    assert len(tent_periodic_points(2.0, 3)) == 8
    with pytest.raises(ValueError):
        tent_periodic_points(2.0, 21)


@pytest.mark.parametrize("s", [1.2, 1.5, 1.8, 2.0])
@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_tent_periodic_points_are_periodic_and_distinct(s, n):
    pts = np.array([x for x, _ in tent_periodic_points(s, n)])
    y = pts.copy()
    for _ in range(n):
        y = evaluate(FamilyParam.tent(s), y)
    assert np.all(np.abs(y - pts) < 1e-10)
    assert np.all(np.diff(np.sort(pts)) > 1e-10)


def test_tent_count_brute_force_oracle():
    # sign changes of T^n(x) - x on a fine grid count the fixed points of T^n
    for s, n in ((1.3, 6), (1.7, 5)):
        x = np.linspace(0, 1, 2_000_001)
        y = x.copy()
        for _ in range(n):
            y = np.minimum(s * y, s * (1 - y))
        g = y - x
        crossings = int(np.sum(np.sign(g[1:]) != np.sign(g[:-1])))
        assert tent_periodic_count(s, n) == crossings


def test_entropy():
    for n in range(4, 17):
        assert tent_periodic_count(2.0, n) == 2**n
        assert entropy_estimate(2.0, n) == math.log(2.0)
    assert abs(entropy_estimate(1.3, 14) - math.log(1.3)) <= 0.08
    assert entropy_estimate(1.01, 12) < 0.2
    with pytest.raises(ValueError):
        entropy_estimate(2.0, 3)


def test_itinerary_examples():
    t2 = FamilyParam.tent(2.0)
    assert itinerary(t2, 2 / 3, 5) == "RRRRR"
    assert itinerary(FamilyParam.tent(1.4), 0.0, 4) == "LLLL"
    assert itinerary(t2, 0.5, 5) == "CRLLL"


def test_preimages():
    t2 = FamilyParam.tent(2.0)
    np.testing.assert_allclose(preimages(t2, 0.5), [0.25, 0.75])
    np.testing.assert_allclose(preimages(FamilyParam.quadratic(1.0), 0.75), [-0.5, 0.5])
    p = FamilyParam.standard(3.0, 0.2)
    x = np.linspace(0, 1, 200_001)
    for target in (0.4, 0.05, 0.9):
        g = np.mod(evaluate(p, x) - target + 0.5, 1.0) - 0.5
        expected = int(np.sum((np.sign(g[1:]) != np.sign(g[:-1])) & (np.abs(g[1:] - g[:-1]) < 0.5)))
        pre = preimages(p, target)
        assert len(pre) == expected
        d = np.mod(evaluate(p, pre) - target + 0.5, 1.0) - 0.5
        assert np.all(np.abs(d) < 1e-12)
