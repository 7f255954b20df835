from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from supconv.errors import GridCapError, InputError
from supconv.simplexgeom import ConeRegion, cone_contains, grid_size, project, simplex_counts, simplex_grid


@pytest.mark.parametrize("x, scale, point", [
    ((2, 2), 4.0, (0.5, 0.5)),
    ((1, 0), 1.0, (1.0, 0.0)),
    ((0.3, 0.9), 1.2, (0.25, 0.75)),
])
def test_project(x, scale, point):
    s, p = project(x)
    assert s == pytest.approx(scale)
    np.testing.assert_allclose(p, point, atol=1e-15)


def test_project_zero_rejected():
    with pytest.raises(InputError):
        project([0.0, 0.0])


def test_grid_examples():
    np.testing.assert_array_equal(simplex_grid(2, 2), [[0, 1], [0.5, 0.5], [1, 0]])
    np.testing.assert_array_equal(simplex_grid(3, 1), [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    assert simplex_grid(3, 10).shape == (66, 3)


@pytest.mark.parametrize("n, k", [(2, 7), (3, 10), (4, 6), (5, 3)])
def test_grid_matches_exhaustive_enumeration(n, k):
    brute = sorted(c for c in product(range(k + 1), repeat=n) if sum(c) == k)
    counts = simplex_counts(n, k)
    assert [tuple(r) for r in counts] == brute
    assert grid_size(n, k) == comb(k + n - 1, n - 1) == len(brute)
    assert np.all(counts.sum(axis=1) == k)


def test_grid_cap():
    with pytest.raises(GridCapError):
        simplex_grid(10, 60, cap=1000)


def test_cone_examples():
    cone = ConeRegion(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert cone_contains(cone, [3, 3])
    assert not cone_contains(cone, [1, 0])
    assert cone_contains(ConeRegion(np.array([[1.0, 2.0]])), [0, 0])


@settings(max_examples=80, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(0.0, 5.0)), st.floats(0.01, 100.0))
def test_cone_contains_generators_and_scaling(rays, c):
    rays = rays[rays.sum(axis=1) > 0.1]
    if rays.size == 0:
        return
    cone = ConeRegion(rays)
    for r in cone.rays:
        assert cone_contains(cone, r)
    probe = np.array([1.0, 0.3, 0.0])
    assert cone_contains(cone, probe) == cone_contains(cone, c * probe)
