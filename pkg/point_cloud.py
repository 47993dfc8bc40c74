"""
Labeled point clouds, time-delay embeddings and their distance matrices.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from errors import ConfigurationError, DimensionError, DomainError, MatrixFormatError
from metrics import (
    ChordClass,
    CirclePoint,
    FiniteSubset,
    PitchTuple,
    RhythmPattern,
    chord_class_distance,
    hausdorff_distance,
    necklace_distance,
    pitch_class_distance,
    rhythm_distance,
    tde_chord_distance,
    tuple_distance,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricSpec:
    """A named distance function and the payloads it accepts."""

    name: str
    accepts: Callable[[Any], bool]
    distance: Callable[[Any, Any], float]
    is_metric: bool
    description: str


def _is_frequency(p) -> bool:
    return isinstance(p, (int, float)) and not isinstance(p, bool) and p > 0


def _is_chord_tuple(p) -> bool:
    return isinstance(p, tuple) and len(p) > 0 and all(isinstance(c, ChordClass) for c in p)


def _pitch_class(a, b) -> float:
    if isinstance(a, CirclePoint) and isinstance(b, CirclePoint):
        return necklace_distance(a, b)
    if _is_frequency(a) and _is_frequency(b):
        return pitch_class_distance(a, b)
    raise ConfigurationError("pitch-class metric needs two CirclePoints or two frequencies")


def _as_subset(p) -> FiniteSubset:
    return p if isinstance(p, FiniteSubset) else FiniteSubset(p.notes)


METRICS: Dict[str, MetricSpec] = {
    spec.name: spec for spec in (
        MetricSpec("necklace", lambda p: isinstance(p, CirclePoint), necklace_distance, True,
                   "shortest arc on R/Z (points of one cycle or pitch classes)"),
        MetricSpec("pitch-class", lambda p: isinstance(p, CirclePoint) or _is_frequency(p), _pitch_class, False,
                   "octave-reduced distance; frequencies in Hz or pitch classes (pseudo-metric on Hz)"),
        MetricSpec("tuple", lambda p: isinstance(p, PitchTuple), tuple_distance, True,
                   "sum of element-wise necklace distances of time-delay tuples"),
        MetricSpec("chord-class", lambda p: isinstance(p, ChordClass), chord_class_distance, True,
                   "minimum-cost matching of chord notes"),
        MetricSpec("hausdorff", lambda p: isinstance(p, (FiniteSubset, ChordClass)),
                   lambda a, b: hausdorff_distance(_as_subset(a), _as_subset(b)), True,
                   "Hausdorff distance between note sets (ragged chords)"),
        MetricSpec("rhythm", lambda p: isinstance(p, RhythmPattern),
                   lambda a, b: rhythm_distance(a, b, "anchored"), False,
                   "minimum over re-anchored cyclic shifts, symmetrized (triangle inequality not guaranteed)"),
        MetricSpec("rhythm-index", lambda p: isinstance(p, RhythmPattern),
                   lambda a, b: rhythm_distance(a, b, "index"), True,
                   "minimum over cyclic index shifts without re-anchoring"),
        MetricSpec("rhythm-continuous", lambda p: isinstance(p, RhythmPattern),
                   lambda a, b: rhythm_distance(a, b, "continuous"), True,
                   "minimum over cyclic shifts and a continuous time offset"),
        MetricSpec("tde-chord", _is_chord_tuple, tde_chord_distance, True,
                   "sum of chord-class distances of time-delay chord tuples"),
    )
}

RHYTHM_METRIC_BY_ALIGNMENT = {
    "anchored": "rhythm",
    "index": "rhythm-index",
    "continuous": "rhythm-continuous",
}


def get_metric(name: str) -> MetricSpec:
    """Look up a metric selector; raises ConfigurationError for unknown names."""
    try:
        return METRICS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown metric {name!r}; choose from {', '.join(sorted(METRICS))}"
        ) from None


def default_metric_for(payload) -> str:
    """Natural metric selector for a payload type."""
    if isinstance(payload, CirclePoint):
        return "necklace"
    if isinstance(payload, PitchTuple):
        return "tuple"
    if isinstance(payload, ChordClass):
        return "chord-class"
    if isinstance(payload, RhythmPattern):
        return "rhythm"
    if isinstance(payload, FiniteSubset):
        return "hausdorff"
    if _is_chord_tuple(payload):
        return "tde-chord"
    if _is_frequency(payload):
        return "pitch-class"
    raise ConfigurationError(f"no metric known for payload of type {type(payload).__name__}")


@dataclass(frozen=True)
class PointCloud:
    """Points with display labels and multiplicities (after duplicate collapse)."""

    points: Tuple[Any, ...]
    labels: Tuple[str, ...] = ()
    multiplicities: Tuple[int, ...] = ()

    def __post_init__(self):
        points = tuple(self.points)
        labels = tuple(self.labels) or tuple(str(i) for i in range(len(points)))
        multiplicities = tuple(self.multiplicities) or (1,) * len(points)
        if len(labels) != len(points) or len(multiplicities) != len(points):
            raise DimensionError("labels, multiplicities and points must align")
        if any(m < 1 for m in multiplicities):
            raise DomainError("multiplicities must be >= 1")
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'multiplicities', multiplicities)

    def __len__(self) -> int:
        return len(self.points)


class DistanceMatrix:
    """
    Symmetric non-negative matrix over a labeled point cloud.

    Stored densely as the strict lower triangle, row by row:
    d(1,0), d(2,0), d(2,1), d(3,0), ...
    """

    def __init__(self, size: int, lower: Sequence[float], labels: Optional[Sequence[str]] = None):
        lower = np.array(lower, dtype=float).reshape(-1)
        if size < 1:
            raise DimensionError("a distance matrix needs at least one point")
        if lower.size != size * (size - 1) // 2:
            raise DimensionError(f"{lower.size} entries do not form the lower triangle of a {size}x{size} matrix")
        if not np.all(np.isfinite(lower)):
            raise DomainError("distance matrix entries must be finite")
        if np.any(lower < 0):
            raise DomainError("distance matrix entries must be non-negative")
        lower.setflags(write=False)
        self.size = size
        self._lower = lower
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(size))
        if len(self.labels) != size:
            raise DimensionError("one label per point is required")
        self._dense: Optional[np.ndarray] = None

    @classmethod
    def from_dense(cls, dense, labels: Optional[Sequence[str]] = None) -> "DistanceMatrix":
        """Build from a square array; the strict lower triangle is used and must mirror the upper."""
        dense = np.asarray(dense, dtype=float)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise DimensionError("distance matrix must be square")
        if not np.allclose(dense, dense.T, atol=1e-12) or np.any(np.diag(dense) != 0):
            raise DomainError("distance matrix must be symmetric with a zero diagonal")
        n = dense.shape[0]
        rows, cols = np.tril_indices(n, k=-1)
        return cls(n, dense[rows, cols], labels)

    def __getitem__(self, index: Tuple[int, int]) -> float:
        i, j = index
        if i == j:
            return 0.0
        if i < j:
            i, j = j, i
        return float(self._lower[i * (i - 1) // 2 + j])

    def __len__(self) -> int:
        return self.size

    @property
    def lower(self) -> np.ndarray:
        return self._lower

    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            dense = np.zeros((self.size, self.size))
            rows, cols = np.tril_indices(self.size, k=-1)
            dense[rows, cols] = self._lower
            dense[cols, rows] = self._lower
            dense.setflags(write=False)
            self._dense = dense
        return self._dense

    def max(self) -> float:
        return float(self._lower.max()) if self._lower.size else 0.0

    def nearest_neighbor_distances(self) -> np.ndarray:
        """Distance from every point to its closest other point."""
        if self.size == 1:
            return np.zeros(1)
        dense = self.to_dense().copy()
        np.fill_diagonal(dense, np.inf)
        return dense.min(axis=1)

    def permuted(self, order: Sequence[int]) -> "DistanceMatrix":
        """Matrix of the same cloud with points listed in the given order."""
        dense = self.to_dense()[np.ix_(order, order)]
        return DistanceMatrix.from_dense(dense, [self.labels[i] for i in order])

    def to_text(self) -> str:
        """Interchange format: n on the first line, then one lower-triangle row per line."""
        lines = [str(self.size)]
        for i in range(1, self.size):
            row = self._lower[i * (i - 1) // 2: i * (i - 1) // 2 + i]
            lines.append(" ".join(format(x, '.17g') for x in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DistanceMatrix":
        """Parse the interchange format written by to_text()."""
        lines = [line.split() for line in text.splitlines() if line.strip()]
        if not lines:
            raise MatrixFormatError("empty distance matrix file")
        try:
            size = int(lines[0][0])
        except (ValueError, IndexError):
            raise MatrixFormatError(f"first line must be the point count, got {lines[0]!r}") from None
        if size < 1 or len(lines[0]) != 1:
            raise MatrixFormatError("first line must hold a single positive point count")
        if len(lines) - 1 != size - 1:
            raise MatrixFormatError(f"expected {size - 1} rows, found {len(lines) - 1}")
        values: List[float] = []
        for i, row in enumerate(lines[1:], start=1):
            if len(row) != i:
                raise MatrixFormatError(f"row {i} has {len(row)} entries, expected {i}")
            try:
                values.extend(float(x) for x in row)
            except ValueError as e:
                raise MatrixFormatError(f"row {i}: {e}") from None
        try:
            return cls(size, values)
        except (DomainError, DimensionError) as e:
            raise MatrixFormatError(str(e)) from None


def delay_embed(sequence: Sequence[Any], d: int) -> List[tuple]:
    """
    Overlapping windows (x_n, ..., x_{n+d-1}) of a sequence.

    Raises:
        DimensionError: if d < 1 or the sequence is shorter than d.
    """
    if d < 1:
        raise DimensionError(f"embedding dimension must be >= 1, got {d}")
    if len(sequence) < d:
        raise DimensionError(f"sequence of length {len(sequence)} is shorter than d={d}")
    return [tuple(sequence[n:n + d]) for n in range(len(sequence) - d + 1)]


def embed_pitches(pitches: Sequence[CirclePoint], d: int) -> List[PitchTuple]:
    """Time-delay embedding of a melody as PitchTuples."""
    return [PitchTuple(window) for window in delay_embed(pitches, d)]


def distance_matrix(cloud: PointCloud, metric: str, threads: int = 1) -> DistanceMatrix:
    """
    Pairwise distances of a point cloud under a named metric.

    Rows are computed independently (optionally on joblib worker threads) and
    placed by index, so the result does not depend on the schedule.

    Raises:
        ConfigurationError: if the metric is unknown or rejects a payload.
    """
    spec = get_metric(metric)
    for index, point in enumerate(cloud.points):
        if not spec.accepts(point):
            raise ConfigurationError(
                f"metric {metric!r} cannot measure payload {index} of type {type(point).__name__}"
            )
    points = cloud.points
    n = len(points)

    def row(i: int) -> List[float]:
        return [spec.distance(points[i], points[j]) for j in range(i)]

    if threads > 1 and n > 2:
        rows = Parallel(n_jobs=threads, backend="threading")(delayed(row)(i) for i in range(n))
    else:
        rows = [row(i) for i in range(n)]

    lower = [value for r in rows for value in r]
    logger.debug("Built %dx%d matrix under %s (threads=%d)", n, n, metric, threads)
    return DistanceMatrix(n, lower, cloud.labels)


def collapse_duplicates(cloud: PointCloud, tolerance: float = 1e-9,
                        metric: Optional[str] = None) -> PointCloud:
    """
    Merge points within tolerance of distance zero.

    The first occurrence is kept; multiplicities are summed and labels joined
    with '/'.

    Args:
        cloud: Input cloud.
        tolerance: Distances <= tolerance count as duplicates.
        metric: Metric selector; defaults to the payload's natural metric.
    """
    if tolerance < 0:
        raise DomainError("tolerance must be >= 0")
    if len(cloud) == 0:
        return cloud
    spec = get_metric(metric or default_metric_for(cloud.points[0]))

    kept: List[int] = []
    labels: Dict[int, List[str]] = {}
    counts: Dict[int, int] = {}
    for i, point in enumerate(cloud.points):
        for k in kept:
            if spec.distance(cloud.points[k], point) <= tolerance:
                labels[k].append(cloud.labels[i])
                counts[k] += cloud.multiplicities[i]
                break
        else:
            kept.append(i)
            labels[i] = [cloud.labels[i]]
            counts[i] = cloud.multiplicities[i]

    if len(kept) < len(cloud):
        logger.debug("Collapsed %d points to %d", len(cloud), len(kept))
    return PointCloud(
        points=tuple(cloud.points[k] for k in kept),
        labels=tuple("/".join(labels[k]) for k in kept),
        multiplicities=tuple(counts[k] for k in kept),
    )


def merge_events(matrix: DistanceMatrix, multiplicities: Optional[Sequence[int]] = None,
                 precision: int = 9) -> List[Tuple[float, int]]:
    """
    Scales at which connected components merge, with how many merges happen there.

    Kruskal's algorithm over the sorted edges. A point with multiplicity m
    contributes m - 1 merges at scale 0, so a cloud that kept its repeats and
    one that collapsed them report the same events.

    Returns:
        (scale, count) pairs in increasing scale.
    """
    parent = list(range(matrix.size))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    events: Dict[float, int] = {}
    if multiplicities is not None:
        extra = sum(m - 1 for m in multiplicities)
        if extra:
            events[0.0] = extra

    edges = sorted((matrix[i, j], i, j) for i in range(matrix.size) for j in range(i))
    for length, i, j in edges:
        root_i, root_j = find(i), find(j)
        if root_i != root_j:
            parent[root_i] = root_j
            scale = round(length, precision)
            events[scale] = events.get(scale, 0) + 1
    return sorted(events.items())


def diameter_ratio(matrix: DistanceMatrix, space_diameter: float) -> float:
    """Share of the ambient space's diameter spanned by the data."""
    if space_diameter <= 0 or math.isinf(space_diameter):
        raise DomainError("space diameter must be positive and finite")
    return matrix.max() / space_diameter
