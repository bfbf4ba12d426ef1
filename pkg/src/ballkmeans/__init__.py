"""Exact accelerated k-means (Ball k-means) with a Lloyd reference and benchmark CLI."""

from .core import (
    BallCluster,
    ClusteringState,
    Dataset,
    DistanceBoundMatrix,
    IterationMetrics,
    MetricsLog,
    NeighborList,
    sse,
)
from .data import (
    generate_gaussian_mixture,
    load_binary,
    load_csv,
    load_dataset,
    write_binary,
    write_csv,
)
from .engine import IterationReport, RunResult, initialize_centroids, iterate, run
from .errors import (
    BallKMeansError,
    ConsistencyError,
    EmptyClusterError,
    FormatError,
    GenerationError,
    UsageError,
)
from .geometry import centroid_shift, compute_radius, distance, update_centroid
from .lloyd import check_equivalence, lloyd_iterate, lloyd_run
from .neighbors import build_neighbor_lists, neighbors_of, refresh_bounds, skip_test
from .partition import AnnulusPartition, build_partition, locate_point

__version__ = "0.1.0"
