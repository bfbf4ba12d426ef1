"""Distance, centroid, radius and shift kernels.

All reductions run sequentially in ascending index order so that two code
paths fed the same members produce bit-identical floats.  The ``_``-prefixed
functions are numba kernels used by the iteration drivers; the public
functions wrap them with argument checking.
"""

import math

import numpy as np
from numba import njit

from .errors import EmptyClusterError, UsageError


@njit(cache=True, nogil=True, inline="always")
def sqdist(a, b):
    s = 0.0
    for t in range(a.shape[0]):
        diff = a[t] - b[t]
        s += diff * diff
    return s


@njit(cache=True, nogil=True)
def _centroids_from_members(X, order, starts, clusters, out):
    """Overwrite ``out[c]`` with the mean of cluster ``c`` for each non-empty ``c``."""
    d = X.shape[1]
    acc = np.empty(d)
    for c in clusters:
        lo = starts[c]
        hi = starts[c + 1]
        if hi == lo:
            continue
        acc[:] = 0.0
        for q in range(lo, hi):
            p = order[q]
            for t in range(d):
                acc[t] += X[p, t]
        m = hi - lo
        for t in range(d):
            out[c, t] = acc[t] / m


@njit(cache=True, nogil=True)
def _radii_from_members(X, centroids, order, starts, clusters, pc_sq, radius_sq):
    """Refresh the member-distance cache and squared radius of the given clusters.

    Returns the number of point-centroid distances evaluated.
    """
    count = 0
    for c in clusters:
        r2 = 0.0
        for q in range(starts[c], starts[c + 1]):
            p = order[q]
            s = sqdist(X[p], centroids[c])
            pc_sq[p] = s
            if s > r2:
                r2 = s
            count += 1
        radius_sq[c] = r2
    return count


@njit(cache=True, nogil=True)
def _shifts(prev, cur, clusters, out):
    for c in clusters:
        out[c] = math.sqrt(sqdist(prev[c], cur[c]))


@njit(cache=True, nogil=True, inline="always")
def _better(s, j, best_s, best, current):
    """Tie rule: strictly closer wins; on a tie keep ``current``, else the smaller id."""
    if s < best_s:
        return True
    if s == best_s and best != current:
        return j == current or j < best
    return False


@njit(cache=True, nogil=True)
def _nearest_centroids(X, centroids, current, out_assign, out_sq):
    """Full argmin over all centroids for every point; ``current[p] = -1`` if unassigned."""
    k = centroids.shape[0]
    for p in range(X.shape[0]):
        cur = current[p]
        best = -1
        best_s = np.inf
        for j in range(k):
            s = sqdist(X[p], centroids[j])
            if best == -1 or _better(s, j, best_s, best, cur):
                best = j
                best_s = s
        out_assign[p] = best
        out_sq[p] = best_s
    return X.shape[0] * k


def _as_vector(a):
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise UsageError(f"expected a 1-d vector, got shape {v.shape}")
    return np.ascontiguousarray(v)


def distance(a, b) -> float:
    """Euclidean distance between two equal-length vectors."""
    a = _as_vector(a)
    b = _as_vector(b)
    if a.shape != b.shape:
        raise UsageError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return math.sqrt(sqdist(a, b))


def _coords(dataset):
    return dataset.coords if hasattr(dataset, "coords") else np.asarray(dataset, dtype=np.float64)


def _sorted_members(members) -> np.ndarray:
    return np.unique(np.fromiter(members, dtype=np.int64))


def update_centroid(members, dataset) -> np.ndarray:
    """Mean of the member points, accumulated in ascending point order.

    Raises EmptyClusterError when ``members`` is empty; callers apply the
    keep-previous-centroid rule themselves.
    """
    X = _coords(dataset)
    idx = _sorted_members(members)
    if idx.size == 0:
        raise EmptyClusterError("cannot take the mean of an empty cluster")
    out = np.zeros((1, X.shape[1]))
    starts = np.array([0, idx.size], dtype=np.int64)
    _centroids_from_members(X, idx, starts, np.zeros(1, dtype=np.int64), out)
    return out[0]


def compute_radius(members, centroid, dataset):
    """Return ``(radius, member_distances)``.

    ``member_distances`` is aligned with the sorted member indices.  An empty
    member set yields radius 0 and an empty array.
    """
    X = _coords(dataset)
    idx = _sorted_members(members)
    c = _as_vector(centroid)
    if c.shape[0] != X.shape[1]:
        raise UsageError(f"dimension mismatch: {c.shape[0]} vs {X.shape[1]}")
    if idx.size == 0:
        return 0.0, np.empty(0)
    pc_sq = np.zeros(X.shape[0])
    radius_sq = np.zeros(1)
    starts = np.array([0, idx.size], dtype=np.int64)
    _radii_from_members(X, c[None, :], idx, starts, np.zeros(1, dtype=np.int64), pc_sq, radius_sq)
    return math.sqrt(radius_sq[0]), np.sqrt(pc_sq[idx])


def centroid_shift(prev, new) -> float:
    """How far a centroid moved between two consecutive iterations."""
    return distance(prev, new)
