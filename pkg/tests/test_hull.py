from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from supconv.convexcore import CORNER, LabeledPoint, caratheodory_reduce, hull_from_arrays, upper_hull_2d
from supconv.errors import InputError

from conftest import FLAT_LEVEL, fig2_firms


def _pts(pairs, firm=0):
    return [LabeledPoint((t, 1 - t), y, firm) for t, y in pairs]


def test_leontief_peaks():
    peaks = [(0, 0), (0.2, 0.4), (0.5, 0.5), (0.8, 0.4), (1, 0)]
    hull = upper_hull_2d(_pts(peaks))
    np.testing.assert_allclose(hull.vertices(), peaks, atol=1e-12)


def test_dominated_point_dropped():
    hull = upper_hull_2d(_pts([(0, 0), (0.5, 0.2), (1, 0), (0.5, 0.5)]))
    np.testing.assert_allclose(hull.vertices(), [(0, 0), (0.5, 0.5), (1, 0)])


def test_cobb_douglas_samples_flat():
    t = np.linspace(0, 1, 1001)
    P = np.column_stack([t, 1 - t])
    firms = fig2_firms()
    ts = np.concatenate([t, t])
    ys = np.concatenate([f.evaluate_simplex(P) for f in firms])
    labels = np.repeat([0, 1], t.size)
    hull = hull_from_arrays(ts, ys, labels)
    slopes = hull.slopes()
    k = int(np.argmin(np.abs(slopes)))
    assert abs(slopes[k]) < 1e-12
    assert hull.t[k] == pytest.approx(1 / 3, abs=1e-3)
    assert hull.t[k + 1] == pytest.approx(2 / 3, abs=1e-3)
    assert hull.y[k] == pytest.approx(FLAT_LEVEL, abs=1e-4)


def test_corners_always_present():
    hull = hull_from_arrays([0.3, 0.6], [1.0, 1.0], [2, 2])
    assert hull.t[0] == 0 and hull.t[-1] == 1
    assert hull.firms[0] == CORNER and hull.firms[-1] == CORNER


def test_rejects_degenerate():
    with pytest.raises(InputError):
        hull_from_arrays([1.2], [1.0])


@settings(max_examples=150, deadline=None)
@given(arrays(float, st.integers(2, 30), elements=st.floats(0, 1).map(lambda v: round(v, 6))), st.data())
def test_hull_dominates_and_is_concave(t, data):
    y = data.draw(arrays(float, t.size, elements=st.floats(0, 5)))
    if np.unique(t).size < 2:
        return
    hull = hull_from_arrays(t, y)
    assert np.all(y <= hull(t) + 1e-10)
    assert np.all(np.diff(hull.slopes()) < 0)
    # each hull vertex is an input point or a corner
    pool = set(zip(t.tolist(), y.tolist())) | {(0.0, 0.0), (1.0, 0.0)}
    assert all(v in pool for v in hull.vertices())


def _exhaustive_support(P, target, r):
    # smallest support size reproducing target by a nonnegative combination
    for size in range(1, r + 1):
        for S in combinations(range(len(P)), size):
            M = np.vstack([P[list(S)].T, np.ones(size)])
            w, *_ = np.linalg.lstsq(M, np.append(target, 1.0), rcond=None)
            if np.all(w >= -1e-9) and np.allclose(M @ w, np.append(target, 1.0), atol=1e-9):
                return size
    return None


def test_caratheodory_four_points():
    pts = _pts([(0.1, 0.3), (0.4, 0.7), (0.7, 0.2), (0.9, 0.5)])
    w0 = np.array([0.25, 0.25, 0.25, 0.25])
    P = np.array([[p.x[0], p.x[1], p.y] for p in pts])
    target = w0 @ P
    w = caratheodory_reduce(pts, w0)
    assert np.count_nonzero(w) <= 3
    np.testing.assert_allclose(w @ P, target, atol=1e-10)
    assert _exhaustive_support(P, target, 4) <= np.count_nonzero(w)


def test_caratheodory_noop_and_degenerate():
    pts = _pts([(0.1, 0.3), (0.4, 0.7)])
    np.testing.assert_allclose(caratheodory_reduce(pts, [0.4, 0.6]), [0.4, 0.6])
    same = _pts([(0.5, 0.5)] * 4)
    w = caratheodory_reduce(same, [0.1, 0.2, 0.3, 0.4])
    assert np.count_nonzero(w) == 1 and w.sum() == pytest.approx(1.0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4), st.integers(3, 12))
def test_caratheodory_random(seed, d, m):
    rng = np.random.default_rng(seed)
    P = rng.uniform(0, 1, (m, d))
    w0 = rng.dirichlet(np.ones(m))
    target = w0 @ P
    w = caratheodory_reduce(P, w0)
    assert np.all(w >= 0) and w.sum() == pytest.approx(1.0)
    assert np.count_nonzero(w) <= d + 1
    np.testing.assert_allclose(w @ P, target, atol=1e-8)
