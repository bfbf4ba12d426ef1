"""Centroid-distance bookkeeping and neighbor-cluster discovery.

Cluster ``j`` is a neighbor of ``i`` when ``r_i > |c_i - c_j| / 2``; only
neighbors can receive points from ``i`` in the next assignment step.  The
relation is asymmetric.

Centroid distances are carried across iterations as lower bounds: if the
previous distance (or bound) is at least ``2 r_i + shift_i + shift_j`` then
``j`` cannot be a neighbor of ``i`` now, and the distance is never computed.
"""

import math

import numpy as np
from numba import njit

from .core import DistanceBoundMatrix, NeighborList
from .geometry import sqdist


@njit(cache=True, nogil=True)
def skip_test(prev_bound, r_i, delta_i, delta_j):
    """True when ``j`` provably is not a neighbor of ``i`` this iteration."""
    return prev_bound >= 2.0 * r_i + delta_i + delta_j


@njit(cache=True, nogil=True)
def _refresh_bounds(centroids, radius, shift, value, exact, sq, skip):
    k = centroids.shape[0]
    computed = 0
    skipped = 0
    for i in range(k):
        for j in range(i + 1, k):
            if skip:
                prev = value[i, j]
                if skip_test(prev, radius[i], shift[i], shift[j]) and skip_test(
                    prev, radius[j], shift[j], shift[i]
                ):
                    b = prev - shift[i] - shift[j]
                    if b < 0.0:
                        b = 0.0
                    value[i, j] = b
                    value[j, i] = b
                    exact[i, j] = False
                    exact[j, i] = False
                    skipped += 1
                    continue
            s = sqdist(centroids[i], centroids[j])
            sq[i, j] = s
            sq[j, i] = s
            value[i, j] = math.sqrt(s)
            value[j, i] = value[i, j]
            exact[i, j] = True
            exact[j, i] = True
            computed += 1
    return computed, skipped


def refresh_bounds(bounds: DistanceBoundMatrix, centroids, radius, shift, *, skip=True):
    """Bring ``bounds`` up to date with the current centroids, in place.

    ``bounds`` must hold last iteration's distances or sound lower bounds.
    A pair is skipped only if the skip test passes in both directions; its
    entry then becomes ``max(0, prev - shift_i - shift_j)`` with
    ``exact=False``.  Every other pair is measured exactly.

    Returns ``(computed_pairs, skipped_pairs)``.
    """
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    radius = np.ascontiguousarray(radius, dtype=np.float64)
    shift = np.ascontiguousarray(shift, dtype=np.float64)
    computed, skipped = _refresh_bounds(
        centroids, radius, shift, bounds.value, bounds.exact, bounds.sq, bool(skip)
    )
    return int(computed), int(skipped)


@njit(cache=True, nogil=True)
def _build_neighbors(radius_sq, exact, sq, ids, nbr_sq, count):
    k = radius_sq.shape[0]
    for i in range(k):
        m = 0
        r2 = radius_sq[i]
        for j in range(k):
            if j == i or not exact[i, j]:
                continue
            s = sq[i, j]
            # r > d/2 tested as r^2 > d^2/4
            if r2 > 0.25 * s:
                # stable insertion: equal distances keep ascending id order
                pos = m
                while pos > 0 and nbr_sq[i, pos - 1] > s:
                    ids[i, pos] = ids[i, pos - 1]
                    nbr_sq[i, pos] = nbr_sq[i, pos - 1]
                    pos -= 1
                ids[i, pos] = j
                nbr_sq[i, pos] = s
                m += 1
        count[i] = m
        for t in range(m, k):
            ids[i, t] = -1


def build_neighbor_lists(bounds: DistanceBoundMatrix, radius_sq, out: NeighborList = None) -> NeighborList:
    """Neighbor lists of every cluster from refreshed bounds and squared radii.

    Pairs whose entry is a lower bound were skipped because they cannot be
    neighbors, so they are excluded without measuring anything.
    """
    radius_sq = np.ascontiguousarray(radius_sq, dtype=np.float64)
    if out is None:
        out = NeighborList(radius_sq.shape[0])
    _build_neighbors(radius_sq, bounds.exact, bounds.sq, out.ids, out.sq, out.count)
    return out


def neighbors_of(bounds: DistanceBoundMatrix, radius_sq, i: int) -> list[tuple[int, float]]:
    """Sorted ``(cluster id, distance)`` pairs of the neighbors of cluster ``i``."""
    return build_neighbor_lists(bounds, radius_sq)[i]
