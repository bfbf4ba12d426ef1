"""Dataset readers/writers and the synthetic Gaussian-mixture generator.

Binary layout (little-endian)::

    b"BKM1" | n: uint64 | d: uint64 | n*d float64, row-major
"""

from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .core import Dataset
from .errors import FormatError, GenerationError, UsageError

MAGIC = b"BKM1"
_HEADER = struct.Struct("<4sQQ")


def _parse_row(line: str):
    return [float(tok) for tok in line.split(",")]


def load_csv(path) -> Dataset:
    """Read comma-separated points, one per line.

    A first line that does not parse as numbers is treated as a header.
    Blank lines are ignored.
    """
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                row = _parse_row(line)
            except ValueError:
                if lineno == 1:
                    continue
                raise FormatError(f"{path}:{lineno}: non-numeric field") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise FormatError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
            if not all(math.isfinite(v) for v in row):
                raise FormatError(f"{path}:{lineno}: non-finite value")
            rows.append(row)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=np.float64))


def write_csv(path, coords, header=None) -> None:
    coords = np.asarray(coords, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in coords:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_binary(path) -> Dataset:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, n, d = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * n * d
    if len(data) < expected:
        raise FormatError(f"{path}: header declares {n}x{d} values but payload is truncated")
    if len(data) > expected:
        raise FormatError(f"{path}: {len(data) - expected} trailing bytes")
    coords = np.frombuffer(data, dtype="<f8", count=n * d, offset=_HEADER.size).reshape(n, d)
    try:
        return Dataset(coords)
    except UsageError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_binary(path, coords) -> None:
    coords = np.ascontiguousarray(coords, dtype="<f8")
    if coords.ndim != 2:
        raise UsageError("coords must be 2-d")
    n, d = coords.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, d))
        fh.write(coords.tobytes())


def load_dataset(path) -> Dataset:
    """Dispatch on the file's first bytes: binary if it starts with the magic."""
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return load_binary(path)
    return load_csv(path)


def generate_gaussian_mixture(n: int, d: int, k_true: int, separation: float, seed=0,
                              max_attempts=1000):
    """Unit-variance isotropic Gaussian clumps with well-separated means.

    Means are drawn uniformly in ``[0, L]^d`` with
    ``L = 2 * separation * k_true**(1/d)``, rejecting any draw closer than
    ``separation`` to an earlier mean.  Point ``p`` belongs to component
    ``p % k_true``.  Returns ``(dataset, labels)``.
    """
    if not (n >= k_true >= 1) or d < 1:
        raise UsageError(f"need n >= k_true >= 1 and d >= 1, got n={n}, d={d}, k_true={k_true}")
    if not separation > 0:
        raise UsageError(f"separation must be positive, got {separation}")
    rng = np.random.default_rng(seed)
    side = 2.0 * separation * k_true ** (1.0 / d)
    means = np.empty((k_true, d))
    for c in range(k_true):
        for _ in range(max_attempts):
            m = rng.uniform(0.0, side, size=d)
            if c == 0 or np.sqrt(((means[:c] - m) ** 2).sum(axis=1)).min() >= separation:
                means[c] = m
                break
        else:
            raise GenerationError(
                f"could not place component {c} at separation {separation} "
                f"after {max_attempts} attempts"
            )
    labels = np.arange(n, dtype=np.int64) % k_true
    coords = means[labels] + rng.standard_normal((n, d))
    return Dataset(coords), labels
