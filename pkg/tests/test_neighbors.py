import math

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from ballkmeans import DistanceBoundMatrix, build_neighbor_lists, neighbors_of, refresh_bounds, skip_test


@pytest.mark.parametrize(
    "prev, r, di, dj, expected",
    [(20.0, 8.0, 1.0, 2.0, True), (18.0, 8.0, 1.0, 2.0, False), (16.0, 8.0, 0.0, 0.0, True)],
)
def test_skip_test(prev, r, di, dj, expected):
    assert skip_test(prev, r, di, dj) is expected


def two_cluster_bounds(prev):
    b = DistanceBoundMatrix(2)
    b.value[0, 1] = b.value[1, 0] = prev
    b.exact[:] = True
    b.sq[0, 1] = b.sq[1, 0] = prev * prev
    return b


def test_refresh_keeps_bound_when_nothing_moved():
    b = two_cluster_bounds(20.0)
    centroids = np.array([[0.0, 0.0], [20.0, 0.0]])
    computed, skipped = refresh_bounds(b, centroids, [8.0, 7.0], [0.0, 0.0])
    assert (computed, skipped) == (0, 1)
    assert b.value[0, 1] == b.value[1, 0] == 20.0
    assert not b.exact[0, 1] and not b.exact[1, 0]


def test_refresh_computes_when_one_direction_fails():
    b = two_cluster_bounds(18.0)
    # previous centroids (0,0) and (18,0); cluster 0 moved 1, cluster 1 moved 2
    centroids = np.array([[-1.0, 0.0], [20.0, 0.0]])
    computed, skipped = refresh_bounds(b, centroids, [8.0, 5.0], [1.0, 2.0])
    assert (computed, skipped) == (1, 0)
    assert b.exact[0, 1]
    assert b.value[0, 1] == 21.0


def test_refresh_bound_clamps_at_zero():
    b = two_cluster_bounds(4.0)
    refresh_bounds(b, np.zeros((2, 1)), [0.0, 0.0], [2.0, 2.0])
    assert b.value[0, 1] == 0.0 and not b.exact[0, 1]


def test_refresh_skip_disabled_measures_everything():
    b = two_cluster_bounds(20.0)
    computed, skipped = refresh_bounds(b, np.array([[0.0, 0.0], [20.0, 0.0]]), [8.0, 7.0], [0, 0],
                                       skip=False)
    assert (computed, skipped) == (1, 0)


def test_bounds_stay_sound_over_random_walk():
    rng = np.random.default_rng(1)
    k = 10
    for trial in range(20):
        C = rng.uniform(0, 50, size=(k, 3))
        b = DistanceBoundMatrix.from_centroids(C)
        skips = 0
        for _ in range(5):
            step = rng.normal(scale=0.5, size=(k, 3))
            new = C + step
            shift = np.sqrt((step ** 2).sum(axis=1))
            radius = rng.uniform(0, 6, size=k)
            _, s = refresh_bounds(b, new, radius, shift)
            skips += s
            truth = cdist(new, new)
            off = ~np.eye(k, dtype=bool)
            assert np.all(b.value[off] <= truth[off] + 1e-9)
            np.testing.assert_allclose(b.value[b.exact], truth[b.exact], rtol=1e-12)
            C = new
        assert skips > 0


def bounds_from_distances(D):
    k = D.shape[0]
    b = DistanceBoundMatrix(k)
    b.value[:] = D
    b.sq[:] = D * D
    b.exact[:] = ~np.eye(k, dtype=bool)
    return b


def test_neighbors_strict_inequality():
    D = np.array([[0, 8, 12], [8, 0, 5], [12, 5, 0]], dtype=float)
    b = bounds_from_distances(D)
    assert neighbors_of(b, np.array([25.0, 0.0, 0.0]), 0) == [(1, 8.0)]
    # r = 4, distance 8: 4 > 4 is false
    assert neighbors_of(b, np.array([16.0, 0.0, 0.0]), 0) == []


def test_neighbors_asymmetric():
    D = np.array([[0.0, 10.0], [10.0, 0.0]])
    nl = build_neighbor_lists(bounds_from_distances(D), np.array([36.0, 4.0]))
    assert nl[0] == [(1, 10.0)]
    assert nl[1] == []


def test_neighbors_sorted_with_id_ties():
    D = np.array([[0, 6, 3, 6], [6, 0, 1, 1], [3, 1, 0, 1], [6, 1, 1, 0]], dtype=float)
    nl = build_neighbor_lists(bounds_from_distances(D), np.array([100.0, 0, 0, 0]))
    assert [j for j, _ in nl[0]] == [2, 1, 3]


def test_neighbors_match_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(25):
        k = 16
        C = rng.uniform(0, 20, size=(k, 4))
        r = rng.uniform(0, 8, size=k)
        b = DistanceBoundMatrix.from_centroids(C)
        nl = build_neighbor_lists(b, r * r)
        D = cdist(C, C)
        for i in range(k):
            expected = sorted((D[i, j], j) for j in range(k) if j != i and r[i] > 0.5 * D[i, j])
            assert [j for j, _ in nl[i]] == [j for _, j in expected]
            np.testing.assert_allclose([v for _, v in nl[i]], [v for v, _ in expected], rtol=1e-12)


def test_lower_bound_entries_are_excluded():
    D = np.array([[0.0, 4.0], [4.0, 0.0]])
    b = bounds_from_distances(D)
    b.exact[:] = False
    assert neighbors_of(b, np.array([100.0, 100.0]), 0) == []
    assert math.isclose(b.value[0, 1], 4.0)
