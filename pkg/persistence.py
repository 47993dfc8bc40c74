"""
Persistent homology of Rips filtrations.

Barcodes come from the standard column reduction of the filtered boundary
matrix over GF(p), with clearing: dimensions are reduced from the top down and
every simplex that appears as a pivot of a higher column is known to be
positive, so its own column is skipped. An independent dense rank computation
at a fixed scale serves as the oracle.
"""
import itertools
import json
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import get_settings, is_prime
from errors import ConfigurationError, MatrixFormatError, SizeError
from point_cloud import DistanceMatrix
from rips import FilteredComplex, simplex_counts_at

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Interval:
    """One bar: a homology class of dimension dim alive on [birth, death)."""

    dim: int
    birth: float
    death: float = math.inf

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.death)

    def contains(self, eps: float) -> bool:
        return self.birth <= eps < self.death


@dataclass(frozen=True)
class Barcode:
    """
    Per-dimension persistence intervals computed over GF(field).

    intervals holds the exact dimensions 0..max_dim. Classes born in the
    complex's top simplex dimension have no cofaces to die against; they are
    kept apart in capped and never mixed into bars, JSON or plots.
    """

    intervals: Tuple[Interval, ...]
    field: int = 2
    eps_max: float = math.inf
    max_dim: int = 0
    capped: Tuple[Interval, ...] = dataclass_field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'intervals', tuple(sorted(self.intervals)))
        object.__setattr__(self, 'capped', tuple(sorted(self.capped)))

    @property
    def capped_dim(self) -> Optional[int]:
        return self.capped[0].dim if self.capped else None

    def in_dimension(self, dim: int) -> List[Interval]:
        return [bar for bar in self.intervals if bar.dim == dim]

    @property
    def dimensions(self) -> range:
        top = max([self.max_dim] + [bar.dim for bar in self.intervals])
        return range(top + 1)


@dataclass(frozen=True)
class BettiProfile:
    """Betti numbers at one scale, indexed by dimension."""

    eps: float
    counts: Tuple[int, ...]

    def __getitem__(self, dim: int) -> int:
        return self.counts[dim] if dim < len(self.counts) else 0


@dataclass
class PersistencePairs:
    """Raw reduction output: (birth index, death index) pairs and unpaired births."""

    pairs: List[Tuple[int, int]] = dataclass_field(default_factory=list)
    essential: List[int] = dataclass_field(default_factory=list)
    positive: List[int] = dataclass_field(default_factory=list)


def _boundary(complex_: FilteredComplex, j: int, p: int) -> Dict[int, int]:
    simplex = complex_.simplices[j]
    column: Dict[int, int] = {}
    for i, face in enumerate(simplex.faces()):
        column[complex_.index_of(face)] = (-1) ** i % p
    return column


def reduce_pairs(complex_: FilteredComplex, p: int = 2) -> PersistencePairs:
    """
    Column reduction of the filtered boundary matrix over GF(p).

    Raises:
        ConfigurationError: if p is not prime.
    """
    if not is_prime(p):
        raise ConfigurationError(f"field characteristic must be prime, got {p}")

    by_dim: Dict[int, List[int]] = {}
    for j, simplex in enumerate(complex_.simplices):
        by_dim.setdefault(simplex.dim, []).append(j)

    pivot_of: Dict[int, int] = {}
    reduced: Dict[int, Dict[int, int]] = {}
    cleared = set()
    pairs: List[Tuple[int, int]] = []
    zero_columns = set(by_dim.get(0, []))

    for dim in sorted(by_dim, reverse=True):
        if dim == 0:
            continue
        for j in by_dim[dim]:
            if j in cleared:
                zero_columns.add(j)
                continue
            column = _boundary(complex_, j, p)
            while column:
                low = max(column)
                other = pivot_of.get(low)
                if other is None:
                    break
                pivot_column = reduced[other]
                factor = column[low] * pow(pivot_column[low], -1, p) % p
                for row, value in pivot_column.items():
                    updated = (column.get(row, 0) - factor * value) % p
                    if updated:
                        column[row] = updated
                    else:
                        column.pop(row, None)
            if column:
                low = max(column)
                pivot_of[low] = j
                reduced[j] = column
                cleared.add(low)
                pairs.append((low, j))
            else:
                zero_columns.add(j)

    paired_births = {i for i, _ in pairs}
    positive = sorted(zero_columns)
    essential = [j for j in positive if j not in paired_births]
    logger.debug("Reduction over GF(%d): %d pairs, %d essential classes", p, len(pairs), len(essential))
    return PersistencePairs(sorted(pairs), essential, positive)


def reduce(complex_: FilteredComplex, p: int = 2) -> Barcode:
    """
    Barcode of a filtered complex over GF(p).

    Zero-length intervals are dropped; unpaired positive simplices give
    infinite bars. With a simplex cap D >= 1 the exact dimensions are
    0..D-1, and classes born in dimension D go to Barcode.capped.
    """
    result = reduce_pairs(complex_, p)
    simplices = complex_.simplices
    top = complex_.max_dim if complex_.max_dim >= 1 else None
    intervals, capped = [], []
    for birth_index, death_index in result.pairs:
        birth = simplices[birth_index].filtration
        death = simplices[death_index].filtration
        if death > birth:
            intervals.append(Interval(simplices[birth_index].dim, birth, death))
    for index in result.essential:
        bar = Interval(simplices[index].dim, simplices[index].filtration)
        (capped if bar.dim == top else intervals).append(bar)
    if capped:
        logger.debug("%d classes in dimension %d computed under the cap", len(capped), top)
    exact_top = top - 1 if top is not None else 0
    return Barcode(tuple(intervals), p, complex_.eps_max, exact_top, tuple(capped))


def betti_at(barcode: Barcode, eps: float, dim: int) -> int:
    """Number of dimension-dim bars with birth <= eps < death."""
    return sum(1 for bar in barcode.intervals if bar.dim == dim and bar.contains(eps))


def betti_profile(barcode: Barcode, eps: float) -> BettiProfile:
    return BettiProfile(eps, tuple(betti_at(barcode, eps, d) for d in barcode.dimensions))


def rank_mod_p(matrix: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over GF(p) by Gaussian elimination."""
    a = np.array(matrix, dtype=np.int64) % p
    if a.size == 0:
        return 0
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        candidates = np.nonzero(a[rank:, c])[0]
        if candidates.size == 0:
            continue
        pivot = rank + candidates[0]
        if pivot != rank:
            a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] = a[rank] * pow(int(a[rank, c]), -1, p) % p
        factors = a[:, c].copy()
        factors[rank] = 0
        a = (a - np.outer(factors, a[rank])) % p
        rank += 1
    return rank


def _cliques(matrix: DistanceMatrix, eps: float, size: int) -> List[Tuple[int, ...]]:
    if size < 1:
        return []
    return [
        vertices for vertices in itertools.combinations(range(matrix.size), size)
        if all(matrix[a, b] <= eps for a, b in itertools.combinations(vertices, 2))
    ]


def _boundary_matrix(faces: List[Tuple[int, ...]], cofaces: List[Tuple[int, ...]]) -> np.ndarray:
    index = {face: i for i, face in enumerate(faces)}
    boundary = np.zeros((len(faces), len(cofaces)), dtype=np.int64)
    for j, simplex in enumerate(cofaces):
        for i in range(len(simplex)):
            boundary[index[simplex[:i] + simplex[i + 1:]], j] = (-1) ** i
    return boundary


def oracle_betti(matrix: DistanceMatrix, eps: float, dim: int, p: int = 2,
                 max_points: Optional[int] = None) -> int:
    """
    Betti number of the full clique complex at a fixed scale, by dense ranks.

    Computes dim C_k - rank(d_k) - rank(d_{k+1}) over GF(p).

    Raises:
        SizeError: if the cloud exceeds max_points (default from settings).
        ConfigurationError: if p is not prime.
    """
    if not is_prime(p):
        raise ConfigurationError(f"field characteristic must be prime, got {p}")
    limit = max_points if max_points is not None else get_settings().oracle_max_points
    if matrix.size > limit:
        raise SizeError(f"oracle limited to {limit} points, cloud has {matrix.size}")
    if dim < 0:
        return 0

    below = _cliques(matrix, eps, dim)
    chains = _cliques(matrix, eps, dim + 1)
    above = _cliques(matrix, eps, dim + 2)
    rank_out = rank_mod_p(_boundary_matrix(below, chains), p) if dim > 0 and chains else 0
    rank_in = rank_mod_p(_boundary_matrix(chains, above), p) if above else 0
    return len(chains) - rank_out - rank_in


def euler_check(complex_: FilteredComplex, barcode: Barcode, eps: float) -> Optional[bool]:
    """
    Compare the alternating simplex count at eps with the alternating Betti sum.

    Returns:
        True or False when the check is conclusive; None when a class in the
        top dimension is alive at eps, so the dimension cap may hide homology.

    Raises:
        RangeError: if eps exceeds the complex's scale cap.
    """
    counts = simplex_counts_at(complex_, eps)
    profile = betti_profile(barcode, eps)
    if any(bar.contains(eps) for bar in barcode.capped):
        return None
    simplex_sum = sum((-1) ** k * c for k, c in enumerate(counts))
    betti_sum = sum((-1) ** k * profile[k] for k in range(complex_.max_dim + 1))
    return simplex_sum == betti_sum


def pairing_conservation(complex_: FilteredComplex, pairs: PersistencePairs) -> bool:
    """
    Every positive simplex either starts a finite pair or an essential class,
    and every simplex is either positive or kills exactly one class.
    """
    births = [i for i, _ in pairs.pairs]
    deaths = [j for _, j in pairs.pairs]
    if len(set(births)) != len(births) or len(set(deaths)) != len(deaths):
        return False
    if sorted(births + pairs.essential) != sorted(pairs.positive):
        return False
    return len(pairs.positive) + len(deaths) == len(complex_)


@dataclass(frozen=True)
class FieldSensitivity:
    """Bars that differ between GF(2) and GF(3) reductions."""

    only_in_gf2: Tuple[Interval, ...]
    only_in_gf3: Tuple[Interval, ...]

    @property
    def agree(self) -> bool:
        return not self.only_in_gf2 and not self.only_in_gf3


def field_sensitivity(complex_: FilteredComplex, known: Optional[Barcode] = None) -> FieldSensitivity:
    """
    Reduce over GF(2) and GF(3) and report bars that differ (torsion signal).

    Args:
        complex_: Filtration to reduce.
        known: Barcode of complex_ already computed over one of the two fields.
    """
    barcodes = {known.field: known} if known is not None and known.field in (2, 3) else {}
    gf2 = list((barcodes.get(2) or reduce(complex_, 2)).intervals)
    gf3 = list((barcodes.get(3) or reduce(complex_, 3)).intervals)
    only_2, only_3 = [], list(gf3)
    for bar in gf2:
        if bar in only_3:
            only_3.remove(bar)
        else:
            only_2.append(bar)
    report = FieldSensitivity(tuple(only_2), tuple(only_3))
    if not report.agree:
        logger.warning("Barcodes over GF(2) and GF(3) differ: %d vs %d distinct bars",
                       len(only_2), len(only_3))
    return report


def barcode_to_dict(barcode: Barcode) -> dict:
    return {
        "field": barcode.field,
        "eps_max": barcode.eps_max,
        "dimensions": [
            {
                "dim": dim,
                "bars": [
                    {"birth": bar.birth, "death": None if bar.is_infinite else bar.death}
                    for bar in barcode.in_dimension(dim)
                ],
            }
            for dim in barcode.dimensions
        ],
    }


def barcode_to_json(barcode: Barcode) -> str:
    """Serialize with the fixed schema; null deaths mean infinity."""
    return json.dumps(barcode_to_dict(barcode), indent=2) + "\n"


def barcode_from_json(text: str) -> Barcode:
    """Inverse of barcode_to_json."""
    try:
        data = json.loads(text)
        intervals = [
            Interval(entry["dim"], float(bar["birth"]),
                     math.inf if bar["death"] is None else float(bar["death"]))
            for entry in data["dimensions"]
            for bar in entry["bars"]
        ]
        max_dim = max((entry["dim"] for entry in data["dimensions"]), default=0)
        return Barcode(tuple(intervals), int(data["field"]), float(data["eps_max"]), max_dim)
    except (ValueError, KeyError, TypeError) as e:
        raise MatrixFormatError(f"invalid barcode JSON: {e}") from None
