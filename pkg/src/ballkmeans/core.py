"""Shared domain types and the clustering state threaded through the drivers."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from numba import njit

from .errors import FormatError, UsageError
from .geometry import sqdist


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable ``n x d`` matrix of finite float64 coordinates, one point per row."""

    coords: np.ndarray

    def __post_init__(self):
        X = np.array(self.coords, dtype=np.float64, order="C", copy=True)
        if X.ndim != 2:
            raise UsageError(f"dataset must be 2-d, got shape {X.shape}")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise UsageError(f"dataset needs n >= 1 and d >= 1, got {X.shape}")
        if not np.isfinite(X).all():
            raise UsageError("dataset contains NaN or infinite coordinates")
        X.setflags(write=False)
        object.__setattr__(self, "coords", X)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self):
        return self.n


def as_dataset(data) -> Dataset:
    return data if isinstance(data, Dataset) else Dataset(data)


@dataclass
class BallCluster:
    """Read-only snapshot of one cluster: centroid, radius and member set."""

    id: int
    centroid: np.ndarray
    radius: float
    members: frozenset
    prev_centroid: np.ndarray
    shift: float
    stable_flag: bool


class DistanceBoundMatrix:
    """Symmetric ``k x k`` table of centroid distances.

    ``exact[i, j]`` marks entries holding the true current distance; other
    entries hold a lower bound carried over from an earlier iteration.
    ``sq`` caches the squared distance and is only meaningful where exact.
    """

    def __init__(self, k: int):
        self.value = np.zeros((k, k))
        self.exact = np.zeros((k, k), dtype=np.bool_)
        self.sq = np.zeros((k, k))

    @property
    def k(self) -> int:
        return self.value.shape[0]

    @classmethod
    def from_centroids(cls, centroids) -> "DistanceBoundMatrix":
        centroids = np.ascontiguousarray(centroids, dtype=np.float64)
        m = cls(centroids.shape[0])
        _full_matrix(centroids, m.value, m.exact, m.sq)
        return m

    def copy(self) -> "DistanceBoundMatrix":
        m = DistanceBoundMatrix(self.k)
        m.value[:] = self.value
        m.exact[:] = self.exact
        m.sq[:] = self.sq
        return m


@njit(cache=True, nogil=True)
def _full_matrix(centroids, value, exact, sq):
    k = centroids.shape[0]
    for i in range(k):
        for j in range(i + 1, k):
            s = sqdist(centroids[i], centroids[j])
            sq[i, j] = s
            sq[j, i] = s
            value[i, j] = math.sqrt(s)
            value[j, i] = value[i, j]
            exact[i, j] = True
            exact[j, i] = True
    return k * (k - 1) // 2


class NeighborList:
    """Per-cluster neighbor ids sorted by centroid distance (ties by id).

    Stored padded: row ``i`` holds ``count[i]`` valid entries.
    """

    def __init__(self, k: int):
        self.ids = np.full((k, k), -1, dtype=np.int64)
        self.sq = np.zeros((k, k))
        self.count = np.zeros(k, dtype=np.int64)

    @property
    def k(self) -> int:
        return self.count.shape[0]

    def ids_of(self, i: int) -> np.ndarray:
        return self.ids[i, : self.count[i]]

    def distances_of(self, i: int) -> np.ndarray:
        return np.sqrt(self.sq[i, : self.count[i]])

    def __getitem__(self, i: int) -> list[tuple[int, float]]:
        return [(int(j), float(v)) for j, v in zip(self.ids_of(i), self.distances_of(i))]

    def __len__(self):
        return self.k


@njit(cache=True, nogil=True)
def _group_members(assignment, k):
    """Counting sort of point indices by cluster; members stay in ascending order."""
    n = assignment.shape[0]
    starts = np.zeros(k + 1, dtype=np.int64)
    for p in range(n):
        starts[assignment[p] + 1] += 1
    for c in range(k):
        starts[c + 1] += starts[c]
    pos = starts[:k].copy()
    order = np.empty(n, dtype=np.int64)
    for p in range(n):
        c = assignment[p]
        order[pos[c]] = p
        pos[c] += 1
    return order, starts


@dataclass(eq=False)
class ClusteringState:
    """Struct-of-arrays view of every cluster plus per-point caches.

    ``pc_sq[p]`` is the squared distance from point ``p`` to the centroid of
    its cluster; ``radius_sq`` the squared ball radius.  ``region[p]`` records
    where the last iteration located ``p``: -1 if its cluster was frozen,
    0 for the stable area, ``i > 0`` for the ``i``-th annulus (equivalently,
    the number of neighbor centroids it was compared against).
    """

    dataset: Dataset
    centroids: np.ndarray
    assignment: np.ndarray
    prev_centroids: np.ndarray = None
    shift: np.ndarray = None
    radius_sq: np.ndarray = None
    flags: np.ndarray = None
    pc_sq: np.ndarray = None
    bounds: DistanceBoundMatrix = None
    neighbors: NeighborList = None
    prev_assignment: np.ndarray = None
    region: np.ndarray = None
    frozen: np.ndarray = None
    iteration: int = 0
    order: np.ndarray = field(default=None, repr=False)
    starts: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.dataset = as_dataset(self.dataset)
        self.centroids = np.array(self.centroids, dtype=np.float64, order="C", copy=True)
        self.assignment = np.array(self.assignment, dtype=np.int64, copy=True)
        n, k = self.dataset.n, self.k
        if self.centroids.ndim != 2 or self.centroids.shape[1] != self.dataset.d:
            raise UsageError(f"centroids must have shape (k, {self.dataset.d})")
        if self.assignment.shape != (n,):
            raise UsageError(f"assignment must have length {n}")
        if n and (self.assignment.min() < 0 or self.assignment.max() >= k):
            raise UsageError("assignment holds ids outside [0, k)")
        if self.prev_centroids is None:
            self.prev_centroids = self.centroids.copy()
        if self.shift is None:
            self.shift = np.zeros(k)
        if self.flags is None:
            self.flags = np.zeros(k, dtype=np.bool_)
        if self.pc_sq is None:
            self.pc_sq = _own_sqdist(self.dataset.coords, self.centroids, self.assignment)
        if self.bounds is None:
            self.bounds = DistanceBoundMatrix(k)
        if self.neighbors is None:
            self.neighbors = NeighborList(k)
        if self.prev_assignment is None:
            self.prev_assignment = self.assignment.copy()
        if self.region is None:
            self.region = np.full(n, -1, dtype=np.int64)
        if self.frozen is None:
            self.frozen = np.zeros(k, dtype=np.bool_)
        self.regroup()
        if self.radius_sq is None:
            self.radius_sq = np.zeros(k)
            np.maximum.at(self.radius_sq, self.assignment, self.pc_sq)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def radius(self) -> np.ndarray:
        return np.sqrt(self.radius_sq)

    @property
    def point_center_dist(self) -> np.ndarray:
        return np.sqrt(self.pc_sq)

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.starts)

    def regroup(self):
        self.order, self.starts = _group_members(self.assignment, self.k)

    def members(self, i: int) -> np.ndarray:
        return self.order[self.starts[i] : self.starts[i + 1]]

    def cluster(self, i: int) -> BallCluster:
        return BallCluster(
            id=i,
            centroid=self.centroids[i].copy(),
            radius=math.sqrt(self.radius_sq[i]),
            members=frozenset(int(p) for p in self.members(i)),
            prev_centroid=self.prev_centroids[i].copy(),
            shift=float(self.shift[i]),
            stable_flag=bool(self.flags[i]),
        )

    @property
    def clusters(self) -> list[BallCluster]:
        return [self.cluster(i) for i in range(self.k)]


@njit(cache=True, nogil=True)
def _own_sqdist(X, centroids, assignment):
    out = np.empty(X.shape[0])
    for p in range(X.shape[0]):
        out[p] = sqdist(X[p], centroids[assignment[p]])
    return out


@njit(cache=True, nogil=True)
def _sse(X, centroids, assignment):
    total = 0.0
    for p in range(X.shape[0]):
        total += sqdist(X[p], centroids[assignment[p]])
    return total


def sse(state: ClusteringState) -> float:
    """Sum of squared distances from each point to its cluster's centroid.

    Recomputed from scratch in point order; not counted as work in metrics.
    """
    return float(_sse(state.dataset.coords, state.centroids, state.assignment))


@dataclass
class IterationMetrics:
    iteration: int
    point_centroid_dist_count: int = 0
    centroid_centroid_dist_count: int = 0
    skipped_pair_count: int = 0
    frozen_cluster_count: int = 0
    moved_point_count: int = 0
    sse: float = 0.0
    wall_time: float = 0.0


METRIC_FIELDS = tuple(f.name for f in fields(IterationMetrics))
RECORD_FIELDS = ("algorithm", "n", "k") + METRIC_FIELDS


class MetricsLog:
    """Per-iteration counters of one run, serialisable as JSON lines.

    Each line carries ``RECORD_FIELDS``: the algorithm name, ``n`` and ``k``
    followed by the ``IterationMetrics`` fields.
    """

    def __init__(self, algorithm: str, n: int, k: int, records=None):
        self.algorithm = algorithm
        self.n = n
        self.k = k
        self.records: list[IterationMetrics] = list(records or [])

    def append(self, rec: IterationMetrics):
        self.records.append(rec)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def to_jsonl(self) -> str:
        lines = []
        for r in self.records:
            rec = {"algorithm": self.algorithm, "n": self.n, "k": self.k}
            rec.update(asdict(r))
            lines.append(json.dumps(rec))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str) -> "MetricsLog":
        log = None
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"line {lineno}: not valid JSON ({exc.msg})") from None
            if not isinstance(rec, dict):
                raise FormatError(f"line {lineno}: expected an object")
            missing = [f for f in RECORD_FIELDS if f not in rec]
            if missing:
                raise FormatError(f"line {lineno}: missing fields {', '.join(missing)}")
            bad = [f for f in RECORD_FIELDS[1:]
                   if isinstance(rec[f], bool) or not isinstance(rec[f], (int, float))]
            if bad:
                raise FormatError(f"line {lineno}: non-numeric fields {', '.join(bad)}")
            if log is None:
                log = cls(str(rec["algorithm"]), int(rec["n"]), int(rec["k"]))
            log.append(IterationMetrics(**{f: rec[f] for f in METRIC_FIELDS}))
        if log is None:
            raise FormatError("metrics document holds no records")
        return log
