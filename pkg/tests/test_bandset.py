import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockband import BandSet

reals = st.floats(-50, 50, allow_nan=False)
intervals = st.lists(st.tuples(reals, reals), max_size=5)
points = st.lists(reals, max_size=5)
bandsets = st.builds(BandSet.build, intervals, points)


def _same(a, b, tol=1e-9):
    if len(a.intervals) != len(b.intervals) or len(a.points) != len(b.points):
        return False
    return np.allclose(np.ravel(a.intervals), np.ravel(b.intervals), atol=tol) and np.allclose(
        a.points, b.points, atol=tol
    )


def test_merging():
    b = BandSet.build([(0, 1), (1 + 1e-10, 2), (5, 6)], [3.0, 5.5, 6 + 1e-12])
    assert b.intervals == ((0.0, 2.0), (5.0, 6.0))
    assert b.points == (3.0,)
    assert b.measure == pytest.approx(3.0)
    assert b.min == 0.0 and b.max == 6.0


def test_empty():
    e = BandSet()
    assert e.is_empty
    assert e.distance(0.0) == np.inf
    with pytest.raises(ValueError):
        e.min


def test_distance_and_complement():
    b = BandSet.build([(0, 1)], [3.0])
    np.testing.assert_allclose(b.distance([-1.0, 0.5, 2.0, 3.5]), [1.0, 0.0, 1.0, 0.5])
    assert b.complement(-5, 5, guard=0.1) == [(-5, -0.1), (1.1, 2.9), (3.1, 5)]


def test_hausdorff_finite():
    b = BandSet.interval(0.0, 1.0)
    assert b.hausdorff(np.linspace(0, 1, 11)) == pytest.approx(0.05)
    assert b.hausdorff([0.0, 1.0, 1.5]) == pytest.approx(0.5)


@given(bandsets, bandsets)
def test_union_commutative(a, b):
    assert _same(a | b, b | a)


@given(bandsets, bandsets, bandsets)
def test_union_associative(a, b, c):
    assert _same((a | b) | c, a | (b | c))


@given(bandsets)
def test_union_idempotent(a):
    assert _same(a | a, a)


@given(bandsets, reals)
def test_dilate_contains(a, x):
    if a.is_empty:
        return
    d = a.distance(x)
    assert a.dilate(d + 1e-9).contains(x)


@given(bandsets)
def test_complement_disjoint(a):
    for lo, hi in a.complement(-60, 60, guard=1e-6):
        mid = 0.5 * (lo + hi)
        assert a.distance(mid) > 0


@given(bandsets, st.lists(reals, min_size=1, max_size=8))
def test_hausdorff_matches_dense_sampling(a, values):
    if a.is_empty:
        return
    values = np.asarray(values)
    cloud = np.concatenate([np.asarray(a.points)] + [np.linspace(lo, hi, 2001) for lo, hi in a.intervals])
    backward = np.max(np.min(np.abs(cloud[:, None] - values[None, :]), axis=1))
    forward = np.max(a.distance(values))
    dense = max(forward, backward)
    width = max([hi - lo for lo, hi in a.intervals], default=0.0)
    # dense sampling underestimates by at most half a sampling step
    assert dense - 1e-9 <= a.hausdorff(values) <= dense + width / 2000 + 1e-9
