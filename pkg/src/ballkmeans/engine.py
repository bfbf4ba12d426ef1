"""Ball k-means iteration driver.

One call to :func:`iterate` runs, in order:

1. recompute centroids of clusters whose membership changed, record shifts;
2. recompute radii and the member-distance cache of those clusters;
3. refresh the centroid distance bounds, skipping provably distant pairs;
4. rebuild neighbor lists;
5. freeze clusters that are stable and whose neighbors are all stable;
6. locate every member of a non-frozen cluster in its stable area or an
   annulus and compare annulus points against the allowed neighbors only;
7. apply all moves at once;
8. update stability flags;
9. record metrics.

Moves are buffered and applied synchronously, exactly as Lloyd's algorithm
does, so the assignment sequence is the same as the naive algorithm's.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import (
    ClusteringState,
    DistanceBoundMatrix,
    IterationMetrics,
    MetricsLog,
    NeighborList,
    as_dataset,
    sse,
)
from .errors import ConsistencyError, UsageError
from .geometry import (
    _better,
    _centroids_from_members,
    _nearest_centroids,
    _radii_from_members,
    _shifts,
    sqdist,
)
from .neighbors import build_neighbor_lists, refresh_bounds
from .partition import candidate_count

INIT_METHODS = ("random", "kmeanspp")


def initialize_centroids(dataset, k: int, method="random", seed=0) -> np.ndarray:
    """Pick ``k`` starting centroids among the data points.

    ``random`` draws ``k`` distinct points without replacement; ``kmeanspp``
    is D^2-weighted seeding.  Both use ``numpy.random.default_rng(seed)``.
    An explicit ``(k, d)`` array is accepted as ``method`` and copied.
    """
    ds = as_dataset(dataset)
    X = ds.coords
    if not isinstance(method, str):
        C = np.array(method, dtype=np.float64, order="C")
        if C.shape != (k, ds.d):
            raise UsageError(f"initial centroids must have shape ({k}, {ds.d}), got {C.shape}")
        return C
    if not 1 <= k <= ds.n:
        raise UsageError(f"k must satisfy 1 <= k <= n = {ds.n}, got {k}")
    rng = np.random.default_rng(seed)
    if method == "random":
        idx = rng.choice(ds.n, size=k, replace=False)
        return X[np.sort(idx)].copy()
    if method == "kmeanspp":
        chosen = [int(rng.integers(ds.n))]
        d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
        for _ in range(1, k):
            total = d2.sum()
            if total > 0.0:
                cum = np.cumsum(d2)
                nxt = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
                nxt = min(nxt, ds.n - 1)
            else:
                # every point coincides with a chosen centroid
                rest = np.setdiff1d(np.arange(ds.n), chosen)
                nxt = int(rest[rng.integers(rest.size)])
            chosen.append(nxt)
            d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
        return X[chosen].copy()
    raise UsageError(f"unknown init method {method!r}; expected one of {INIT_METHODS}")


@njit(cache=True, nogil=True, inline="always")
def _restricted_argmin(x, own, own_sq, cand_ids, m, centroids):
    best = own
    best_s = own_sq
    for u in range(m):
        j = cand_ids[u]
        s = sqdist(x, centroids[j])
        if _better(s, j, best_s, best, own):
            best = j
            best_s = s
    return best, best_s


def assign_restricted(x, own: int, own_dist: float, candidates, centroids):
    """Nearest of the own centroid and the candidate neighbor centroids.

    ``own_dist`` is the cached distance to the own centroid and costs
    nothing; each candidate costs one distance.  Returns
    ``(target, distances_computed)``.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    cand = np.ascontiguousarray(candidates, dtype=np.int64)
    C = np.ascontiguousarray(centroids, dtype=np.float64)
    best, _ = _restricted_argmin(x, int(own), float(own_dist) ** 2, cand, cand.shape[0], C)
    return int(best), int(cand.shape[0])


@njit(cache=True, nogil=True)
def _assign_clusters(X, centroids, order, starts, clusters, pc_sq, radius_sq,
                     nbr_ids, nbr_sq, nbr_count, target, region):
    count = 0
    for c in clusters:
        m_all = nbr_count[c]
        r2 = radius_sq[c]
        for q in range(starts[c], starts[c + 1]):
            p = order[q]
            s = pc_sq[p]
            if s > r2:
                return count, p
            m = candidate_count(s, nbr_sq[c], m_all)
            region[p] = m
            if m == 0:
                continue
            best, _ = _restricted_argmin(X[p], c, s, nbr_ids[c], m, centroids)
            target[p] = best
            count += m
    return count, -1


def update_stability_flags(prev_assignment, assignment, k: int) -> np.ndarray:
    """A cluster is stable iff no point entered or left it in the last step."""
    prev_assignment = np.asarray(prev_assignment)
    assignment = np.asarray(assignment)
    flags = np.ones(k, dtype=np.bool_)
    moved = prev_assignment != assignment
    flags[prev_assignment[moved]] = False
    flags[assignment[moved]] = False
    return flags


def should_freeze(flags, neighbors: NeighborList, i: int) -> bool:
    """Cluster ``i`` and all of its current neighbors are stable."""
    return bool(flags[i]) and bool(np.all(flags[neighbors.ids_of(i)]))


def freeze_mask(flags, neighbors: NeighborList) -> np.ndarray:
    return np.array([should_freeze(flags, neighbors, i) for i in range(len(flags))], dtype=np.bool_)


@dataclass
class IterationReport:
    iteration: int
    moved_point_count: int
    frozen_cluster_count: int
    converged: bool
    metrics: IterationMetrics


@dataclass
class Snapshot:
    """Assignment produced in one iteration and the centroids it was made against."""

    iteration: int
    assignment: np.ndarray
    centroids: np.ndarray


@dataclass
class RunResult:
    assignment: np.ndarray
    centroids: np.ndarray
    metrics: MetricsLog
    iterations: int
    converged: bool
    state: ClusteringState = field(repr=False)
    history: list = field(default_factory=list, repr=False)


def _chunks(clusters: np.ndarray, workers: int):
    if workers <= 1 or clusters.size <= 1:
        return [clusters]
    return [np.ascontiguousarray(c) for c in (clusters[w::workers] for w in range(workers)) if c.size]


def _map_clusters(fn, clusters, workers, executor):
    """Run a per-cluster kernel over interleaved chunks; writes are disjoint."""
    parts = _chunks(clusters, workers)
    if executor is None or len(parts) == 1:
        return [fn(part) for part in parts]
    return list(executor.map(fn, parts))


def initialize_state(dataset, centroids) -> tuple[ClusteringState, IterationMetrics]:
    """Iteration 0: assign every point by full argmin and measure every centroid pair."""
    t0 = time.perf_counter()
    ds = as_dataset(dataset)
    C = np.ascontiguousarray(centroids, dtype=np.float64)
    n, k = ds.n, C.shape[0]
    assignment = np.empty(n, dtype=np.int64)
    pc_sq = np.empty(n)
    pc_count = _nearest_centroids(ds.coords, C, np.full(n, -1, dtype=np.int64), assignment, pc_sq)
    bounds = DistanceBoundMatrix.from_centroids(C)
    state = ClusteringState(ds, C, assignment, pc_sq=pc_sq, bounds=bounds)
    state.prev_assignment = np.full(n, -1, dtype=np.int64)
    rec = IterationMetrics(
        iteration=0,
        point_centroid_dist_count=int(pc_count),
        centroid_centroid_dist_count=k * (k - 1) // 2,
        moved_point_count=n,
        sse=sse(state),
    )
    rec.wall_time = time.perf_counter() - t0
    return state, rec


def refresh_centroids(state: ClusteringState, clusters) -> None:
    """Recompute means of ``clusters`` (empty ones keep their centroid) and their shifts."""
    clusters = np.ascontiguousarray(clusters, dtype=np.int64)
    state.prev_centroids[:] = state.centroids
    _centroids_from_members(state.dataset.coords, state.order, state.starts, clusters, state.centroids)
    state.shift[:] = 0.0
    _shifts(state.prev_centroids, state.centroids, clusters, state.shift)


def apply_moves(state: ClusteringState, target: np.ndarray) -> int:
    moved = int(np.count_nonzero(target != state.assignment))
    state.prev_assignment = state.assignment
    state.assignment = target
    state.flags = update_stability_flags(state.prev_assignment, target, state.k)
    state.regroup()
    return moved


def iterate(state: ClusteringState, *, freeze=True, skip=True, workers=1, executor=None) -> IterationReport:
    """Run one Ball k-means iteration on ``state`` in place."""
    t0 = time.perf_counter()
    X = state.dataset.coords
    state.iteration += 1
    rec = IterationMetrics(iteration=state.iteration)

    changed = np.flatnonzero(~state.flags)
    refresh_centroids(state, changed)

    def radii(part):
        return _radii_from_members(X, state.centroids, state.order, state.starts, part,
                                   state.pc_sq, state.radius_sq)

    pc_count = sum(_map_clusters(radii, changed, workers, executor))

    computed, skipped = refresh_bounds(state.bounds, state.centroids, state.radius, state.shift,
                                       skip=skip)
    build_neighbor_lists(state.bounds, state.radius_sq, state.neighbors)

    if freeze:
        state.frozen = freeze_mask(state.flags, state.neighbors)
    else:
        state.frozen = np.zeros(state.k, dtype=np.bool_)
    active = np.flatnonzero(~state.frozen)

    target = state.assignment.copy()
    state.region = np.full(state.dataset.n, -1, dtype=np.int64)
    nb = state.neighbors

    def assign(part):
        return _assign_clusters(X, state.centroids, state.order, state.starts, part, state.pc_sq,
                                state.radius_sq, nb.ids, nb.sq, nb.count, target, state.region)

    for count, bad in _map_clusters(assign, active, workers, executor):
        if bad >= 0:
            raise ConsistencyError(f"point {bad} lies outside the radius of its cluster")
        pc_count += count

    moved = apply_moves(state, target)

    rec.point_centroid_dist_count = int(pc_count)
    rec.centroid_centroid_dist_count = computed
    rec.skipped_pair_count = skipped
    rec.frozen_cluster_count = int(state.frozen.sum())
    rec.moved_point_count = moved
    rec.sse = sse(state)
    rec.wall_time = time.perf_counter() - t0
    return IterationReport(state.iteration, moved, rec.frozen_cluster_count, moved == 0, rec)


def _drive(state, first, step, algorithm, max_iter, callback, keep_history) -> RunResult:
    """Shared loop for Ball k-means and the Lloyd oracle."""
    if max_iter < 1:
        raise UsageError(f"max_iter must be >= 1, got {max_iter}")
    log = MetricsLog(algorithm, state.dataset.n, state.k)
    log.append(first)
    history = []
    if keep_history:
        history.append(Snapshot(0, state.assignment.copy(), state.centroids.copy()))
    converged = False
    for _ in range(max_iter):
        report = step(state)
        log.append(report.metrics)
        if keep_history:
            history.append(Snapshot(state.iteration, state.assignment.copy(), state.centroids.copy()))
        if callback is not None:
            callback(state, report)
        if report.converged:
            converged = True
            break
    # means of the final assignment; a no-op after convergence
    refresh_centroids(state, np.flatnonzero(~state.flags))
    return RunResult(
        assignment=state.assignment.copy(),
        centroids=state.centroids.copy(),
        metrics=log,
        iterations=state.iteration,
        converged=converged,
        state=state,
        history=history,
    )


def run(dataset, k: int, init="random", seed=0, max_iter=300, *, freeze=True, skip=True,
        workers=1, callback=None, keep_history=False) -> RunResult:
    """Cluster ``dataset`` into ``k`` groups with Ball k-means.

    Stops when an iteration moves no point or after ``max_iter`` iterations.
    ``freeze`` and ``skip`` switch off stable-cluster freezing and centroid
    distance skipping (for ablation); results do not depend on them, nor on
    ``workers``.  ``callback(state, report)`` runs after every iteration.
    """
    if workers < 1:
        raise UsageError(f"workers must be >= 1, got {workers}")
    ds = as_dataset(dataset)
    C = initialize_centroids(ds, k, init, seed)
    state, first = initialize_state(ds, C)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else nullcontext()
    with pool as executor:
        return _drive(
            state,
            first,
            lambda s: iterate(s, freeze=freeze, skip=skip, workers=workers, executor=executor),
            "ball",
            max_iter,
            callback,
            keep_history,
        )
