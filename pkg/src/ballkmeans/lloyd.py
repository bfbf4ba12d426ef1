"""Naive Lloyd's k-means, the reference the accelerated driver must reproduce.

It shares initialization, the tie rule, the empty-cluster rule and the
centroid summation order with :mod:`ballkmeans.engine`, so any divergence
between the two isolates a bug in the pruning logic.
"""

from __future__ import annotations

import time

import numpy as np

from .core import ClusteringState, IterationMetrics, as_dataset, sse
from .engine import (
    IterationReport,
    RunResult,
    _drive,
    apply_moves,
    initialize_centroids,
    refresh_centroids,
)
from .geometry import _nearest_centroids


def lloyd_initialize(dataset, centroids) -> tuple[ClusteringState, IterationMetrics]:
    t0 = time.perf_counter()
    ds = as_dataset(dataset)
    C = np.ascontiguousarray(centroids, dtype=np.float64)
    n = ds.n
    assignment = np.empty(n, dtype=np.int64)
    pc_sq = np.empty(n)
    count = _nearest_centroids(ds.coords, C, np.full(n, -1, dtype=np.int64), assignment, pc_sq)
    state = ClusteringState(ds, C, assignment, pc_sq=pc_sq)
    rec = IterationMetrics(iteration=0, point_centroid_dist_count=int(count),
                           moved_point_count=n, sse=sse(state))
    rec.wall_time = time.perf_counter() - t0
    return state, rec


def lloyd_iterate(state: ClusteringState) -> IterationReport:
    """Update every centroid, then reassign every point against all ``k`` centroids."""
    t0 = time.perf_counter()
    state.iteration += 1
    refresh_centroids(state, np.arange(state.k))
    target = np.empty_like(state.assignment)
    count = _nearest_centroids(state.dataset.coords, state.centroids, state.assignment,
                               target, state.pc_sq)
    moved = apply_moves(state, target)
    rec = IterationMetrics(
        iteration=state.iteration,
        point_centroid_dist_count=int(count),
        moved_point_count=moved,
        sse=sse(state),
    )
    rec.wall_time = time.perf_counter() - t0
    return IterationReport(state.iteration, moved, 0, moved == 0, rec)


def lloyd_run(dataset, k: int, init="random", seed=0, max_iter=300, *, callback=None,
              keep_history=False) -> RunResult:
    ds = as_dataset(dataset)
    C = initialize_centroids(ds, k, init, seed)
    state, first = lloyd_initialize(ds, C)
    return _drive(state, first, lloyd_iterate, "lloyd", max_iter, callback, keep_history)


def relative_error(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(float(np.max(np.abs(b), initial=0.0)), np.finfo(float).tiny)
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


def check_equivalence(ball: RunResult, lloyd: RunResult, rtol=1e-9) -> tuple[bool, str]:
    """Compare two runs iteration by iteration.

    Both runs need ``keep_history=True``.  Returns ``(ok, reason)``.
    """
    if ball.iterations != lloyd.iterations:
        return False, f"iteration counts differ: {ball.iterations} vs {lloyd.iterations}"
    if len(ball.history) != len(lloyd.history):
        return False, "history lengths differ (was keep_history set on both runs?)"
    for a, b in zip(ball.history, lloyd.history):
        if not np.array_equal(a.assignment, b.assignment):
            diff = int(np.count_nonzero(a.assignment != b.assignment))
            return False, f"iteration {a.iteration}: {diff} assignments differ"
        err = relative_error(a.centroids, b.centroids)
        if err > rtol:
            return False, f"iteration {a.iteration}: centroid relative error {err:.3e}"
    if not np.array_equal(ball.assignment, lloyd.assignment):
        return False, "final assignments differ"
    err = relative_error(ball.centroids, lloyd.centroids)
    if err > rtol:
        return False, f"final centroid relative error {err:.3e}"
    return True, f"identical over {ball.iterations} iterations"
