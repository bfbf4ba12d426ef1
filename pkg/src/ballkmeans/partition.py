"""Stable area and annulus areas of a ball cluster.

With neighbors sorted by centroid distance ``D_1 <= D_2 <= ...`` and half
distances ``b_i = D_i / 2``, a member at distance ``t`` from its centroid

* stays put if ``t <= b_1`` (stable area, the whole ball if no neighbors);
* otherwise can only move to one of the neighbors with ``b_i < t``.

Regions are closed on their outer edge: ``[0, b_1]``, ``(b_1, b_2]``, ...,
``(b_k', r]``.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from numba import njit

from .errors import ConsistencyError


@dataclass(frozen=True)
class AnnulusPartition:
    cluster_id: int
    radius: float
    stable_radius: float
    # outer edge of region 0, 1, ...; strictly increasing, last one is the radius
    boundaries: tuple[float, ...]
    neighbor_ids: tuple[int, ...]
    half_distances: tuple[float, ...]

    @property
    def n_annuli(self) -> int:
        return len(self.boundaries) - 1

    def annulus(self, i: int) -> tuple[float, float]:
        """``(inner, outer]`` radii of annulus ``i >= 1``."""
        return self.boundaries[i - 1], self.boundaries[i]

    def candidates(self, region: int) -> tuple[int, ...]:
        """Neighbor ids a point in ``region`` must be compared against."""
        if region == 0:
            return ()
        inner = self.boundaries[region - 1]
        m = sum(1 for h in self.half_distances if h <= inner)
        return self.neighbor_ids[:m]


def build_partition(radius: float, neighbors, cluster_id: int = -1) -> AnnulusPartition:
    """Partition a ball of ``radius`` given its sorted ``(id, distance)`` neighbors.

    Equal half distances collapse into a single boundary.  Half distances at
    or beyond the radius produce no annulus since no member lies there.
    """
    ids = tuple(int(j) for j, _ in neighbors)
    halves = tuple(0.5 * float(dist) for _, dist in neighbors)
    edges = []
    for h in halves:
        if h >= radius:
            break
        if not edges or h > edges[-1]:
            edges.append(h)
    edges.append(float(radius))
    return AnnulusPartition(
        cluster_id=cluster_id,
        radius=float(radius),
        stable_radius=edges[0],
        boundaries=tuple(edges),
        neighbor_ids=ids,
        half_distances=halves,
    )


def locate_point(dist_to_centroid: float, partition: AnnulusPartition) -> int:
    """Region index of a member: 0 for the stable area, ``i`` for annulus ``i``."""
    if dist_to_centroid > partition.radius:
        raise ConsistencyError(
            f"member at distance {dist_to_centroid} lies outside radius {partition.radius}"
        )
    return bisect_left(partition.boundaries, dist_to_centroid)


@njit(cache=True, nogil=True, inline="always")
def candidate_count(own_sq, nbr_sq_row, count):
    """Number of sorted neighbors whose half distance is strictly below the point.

    Works on squared quantities: ``D/2 < t`` is ``D^2/4 < t^2``.  Zero means
    the point is in the stable area.
    """
    m = 0
    while m < count and 0.25 * nbr_sq_row[m] < own_sq:
        m += 1
    return m
