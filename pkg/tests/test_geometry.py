"""Level-set geometry: classification and exact edge crossings."""

import numpy as np
import pytest

from cutfsi.geometry import CircleLevelSet, Region, edge_zero_crossings

RS = 0.75
R = np.sqrt(RS)


def bisect_crossing(ls, a, b, tol=1e-15):
    """Independent oracle: bisection on phi along the segment a-b."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    fa, fb = ls(a), ls(b)
    assert fa * fb < 0
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = ls(m)
        if abs(fm) < tol:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def test_level_set_values():
    ls = CircleLevelSet(RS)
    assert ls([0.0, 0.0]) == pytest.approx(-RS)
    assert ls([1.0, 0.0]) == pytest.approx(1.0 - RS)
    on = np.array([R, 0.0])
    assert abs(ls(on)) < 1e-14


def test_level_set_vectorized():
    ls = CircleLevelSet(RS)
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [R, 0.0]])
    phi = ls(pts)
    assert phi.shape == (3,)
    assert phi[0] < 0 < phi[1]


def test_classify():
    ls = CircleLevelSet(RS)
    assert ls.classify([0.0, 0.0]) is Region.SOLID
    assert ls.classify([0.99, 0.99]) is Region.FLUID
    assert ls.classify([R, 0.0]) is Region.INTERFACE


def test_radius_property():
    assert CircleLevelSet(RS).radius == pytest.approx(R)


def test_crossing_matches_bisection_oracle():
    ls = CircleLevelSet(RS)
    rng = np.random.default_rng(7)
    count = 0
    for _ in range(50):
        a = rng.uniform(-1, 1, 2)
        b = rng.uniform(-1, 1, 2)
        if ls(a) * ls(b) >= 0:
            continue
        count += 1
        roots = edge_zero_crossings(ls, a, b)
        assert len(roots) >= 1
        ref = bisect_crossing(ls, a, b)
        best = min(np.linalg.norm(r - ref) for r in roots)
        assert best < 1e-12
    assert count > 10


def test_crossings_lie_on_circle():
    ls = CircleLevelSet(RS)
    for a, b in [([0, 0], [1, 0]), ([-1, -1], [0.5, 0.6]), ([0, -1], [0, 1])]:
        for p in edge_zero_crossings(ls, a, b):
            assert abs(np.dot(p, p) - RS) < 1e-12


def test_double_crossing_both_found():
    # Horizontal chord through the disk: two crossings on one segment.
    ls = CircleLevelSet(RS)
    roots = edge_zero_crossings(ls, [-1.0, 0.1], [1.0, 0.1])
    assert len(roots) == 2
    xs = sorted(r[0] for r in roots)
    exact = np.sqrt(RS - 0.1 ** 2)
    assert xs[0] == pytest.approx(-exact, abs=1e-13)
    assert xs[1] == pytest.approx(exact, abs=1e-13)


def test_no_crossing_outside():
    ls = CircleLevelSet(RS)
    assert edge_zero_crossings(ls, [0.9, 0.9], [1.0, 1.0]) == []


def test_tangent_segment():
    # Segment tangent to the circle at (0, R): single touching point.
    ls = CircleLevelSet(RS)
    roots = edge_zero_crossings(ls, [-1.0, R], [1.0, R])
    assert len(roots) <= 1
    for p in roots:
        assert np.allclose(p, [0.0, R], atol=1e-7)
