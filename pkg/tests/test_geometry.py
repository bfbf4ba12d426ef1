import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ballkmeans import EmptyClusterError, UsageError
from ballkmeans.geometry import centroid_shift, compute_radius, distance, update_centroid


def naive_distance(a, b):
    total = 0.0
    for x, y in zip(a, b):
        total += (x - y) ** 2
    return math.sqrt(total)


def test_distance_345():
    assert distance([0, 0], [3, 4]) == 5.0


@pytest.mark.parametrize("x", [[0.0], [1.5, -2.0], [1e300, -1e-300, 7.0]])
def test_distance_identity(x):
    assert distance(x, x) == 0.0


def test_distance_matches_coordinate_loop():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b = rng.normal(size=(2, 8))
        assert distance(a, b) == pytest.approx(naive_distance(a, b), rel=1e-14)


def test_distance_dimension_mismatch():
    with pytest.raises(UsageError):
        distance([0, 0], [0, 0, 0])


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (3, 4), elements=finite))
def test_triangle_inequality(pts):
    a, b, c = pts
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (2, 5), elements=finite))
def test_distance_symmetric(pts):
    assert distance(pts[0], pts[1]) == distance(pts[1], pts[0])


X3 = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]])


def test_update_centroid_exact():
    np.testing.assert_array_equal(update_centroid({0, 1, 2}, X3), [1.0, 1.0])


def test_update_centroid_singleton():
    np.testing.assert_array_equal(update_centroid([0], [[5.0, 5.0]]), [5.0, 5.0])


def test_update_centroid_empty_signals():
    with pytest.raises(EmptyClusterError):
        update_centroid([], X3)


def test_update_centroid_against_fsum():
    rng = np.random.default_rng(11)
    X = rng.normal(scale=100.0, size=(100, 6))
    got = update_centroid(range(100), X)
    ref = [math.fsum(X[:, t]) / 100 for t in range(6)]
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12 * np.abs(X).max())


def test_update_centroid_permutation_invariant():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(60, 4))
    members = rng.choice(60, size=40, replace=False)
    base = update_centroid(members, X)
    for _ in range(5):
        shuffled = rng.permutation(members)
        np.testing.assert_allclose(update_centroid(shuffled, X), base, rtol=1e-9)


def test_compute_radius_exact():
    r, dists = compute_radius({0, 1, 2}, [1.0, 1.0], X3)
    assert r == 2.0
    np.testing.assert_allclose(dists, [math.sqrt(2), math.sqrt(2), 2.0])


def test_compute_radius_singleton_and_empty():
    assert compute_radius([1], X3[1], X3)[0] == 0.0
    assert compute_radius([], [0.0, 0.0], X3)[0] == 0.0


def test_compute_radius_against_brute_max():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(200, 3))
    members = rng.choice(200, size=50, replace=False)
    c = X[members].mean(axis=0)
    r, dists = compute_radius(members, c, X)
    brute = [naive_distance(X[p], c) for p in sorted(members)]
    assert r == pytest.approx(max(brute), rel=1e-14)
    np.testing.assert_allclose(dists, brute, rtol=1e-14)


def test_centroid_shift():
    assert centroid_shift([0, 0], [3, 4]) == 5.0
    assert centroid_shift([1.25, -2], [1.25, -2]) == 0.0
    rng = np.random.default_rng(8)
    a, b = rng.normal(size=(2, 7))
    assert centroid_shift(a, b) == distance(a, b)
