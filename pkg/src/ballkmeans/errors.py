"""Exception hierarchy shared across the package."""


class BallKMeansError(Exception):
    """Base class for every error raised by ballkmeans."""


class UsageError(BallKMeansError, ValueError):
    """Invalid arguments: bad k, mismatched dimensions, unknown option."""


class EmptyClusterError(BallKMeansError):
    """A centroid or radius was requested for a cluster with no members."""


class FormatError(BallKMeansError, ValueError):
    """A dataset or metrics file could not be parsed."""


class GenerationError(BallKMeansError):
    """Synthetic data could not be generated with the requested parameters."""


class ConsistencyError(BallKMeansError, RuntimeError):
    """Internal state disagrees with itself (e.g. a stale radius cache)."""
