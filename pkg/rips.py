"""
Vietoris-Rips filtrations of distance matrices.

A simplex enters the filtration at the largest distance between its vertices.
The threshold is closed: at scale eps every clique whose edges are all <= eps
is present.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from errors import DomainError, RangeError
from point_cloud import DistanceMatrix

logger = logging.getLogger(__name__)

DEFAULT_MAX_DIM = 3


@dataclass(frozen=True)
class Simplex:
    """Sorted vertex indices and the scale at which the simplex appears."""

    vertices: Tuple[int, ...]
    filtration: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def sort_key(self):
        return (self.filtration, self.dim, self.vertices)

    def faces(self) -> List[Tuple[int, ...]]:
        """Codimension-one faces; face i omits vertex i."""
        v = self.vertices
        return [v[:i] + v[i + 1:] for i in range(len(v))] if len(v) > 1 else []


@dataclass(frozen=True)
class FilteredComplex:
    """
    Rips simplices in filtration order: (filtration, dimension, vertices).

    Every face precedes its cofaces, and that order fixes all pairing ties.
    """

    simplices: Tuple[Simplex, ...]
    max_dim: int
    eps_max: float
    n_vertices: int
    _index: Dict[Tuple[int, ...], int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.simplices, key=lambda s: s.sort_key))
        object.__setattr__(self, 'simplices', ordered)
        self._index.update({s.vertices: i for i, s in enumerate(ordered)})

    def index_of(self, vertices: Tuple[int, ...]) -> int:
        return self._index[vertices]

    def __len__(self) -> int:
        return len(self.simplices)

    def of_dimension(self, dim: int) -> List[Simplex]:
        return [s for s in self.simplices if s.dim == dim]


def build_rips(matrix: DistanceMatrix, max_dim: int = DEFAULT_MAX_DIM,
               eps_max: Optional[float] = None) -> FilteredComplex:
    """
    Build the Vietoris-Rips filtration up to a dimension and scale cap.

    Vertices are inserted first, then edges no longer than eps_max, and
    higher simplices grow from each vertex by intersecting lower neighbourhoods.

    Args:
        matrix: Pairwise distances.
        max_dim: Highest simplex dimension to include.
        eps_max: Scale cap; defaults to the largest matrix entry.

    Returns:
        FilteredComplex in deterministic filtration order.
    """
    if max_dim < 0:
        raise DomainError(f"max_dim must be >= 0, got {max_dim}")
    if eps_max is None:
        eps_max = matrix.max()
    if eps_max < 0:
        raise DomainError(f"eps_max must be >= 0, got {eps_max}")

    n = matrix.size
    lower_neighbors: List[List[int]] = [
        [v for v in range(u) if matrix[u, v] <= eps_max] for u in range(n)
    ]
    simplices: List[Simplex] = []

    def add_cofaces(vertices: Tuple[int, ...], filtration: float, candidates: List[int]) -> None:
        simplices.append(Simplex(vertices, filtration))
        if len(vertices) - 1 >= max_dim:
            return
        for v in candidates:
            grown = max([filtration] + [matrix[v, w] for w in vertices])
            neighbors = set(lower_neighbors[v])
            add_cofaces(tuple(sorted(vertices + (v,))), grown,
                        [w for w in candidates if w in neighbors])

    for u in range(n):
        add_cofaces((u,), 0.0, lower_neighbors[u])

    complex_ = FilteredComplex(tuple(simplices), max_dim, float(eps_max), n)
    logger.debug("Rips complex: %s simplices per dimension", simplex_counts_at(complex_, eps_max))
    return complex_


def brute_force_rips(matrix: DistanceMatrix, max_dim: int = DEFAULT_MAX_DIM,
                     eps_max: Optional[float] = None) -> FilteredComplex:
    """Rips filtration by enumerating every vertex subset (small clouds only)."""
    if eps_max is None:
        eps_max = matrix.max()
    simplices = []
    for size in range(1, min(max_dim, matrix.size - 1) + 2):
        for vertices in itertools.combinations(range(matrix.size), size):
            lengths = [matrix[a, b] for a, b in itertools.combinations(vertices, 2)]
            filtration = max(lengths, default=0.0)
            if filtration <= eps_max:
                simplices.append(Simplex(vertices, filtration))
    return FilteredComplex(tuple(simplices), max_dim, float(eps_max), matrix.size)


def simplex_counts_at(complex_: FilteredComplex, eps: float) -> Tuple[int, ...]:
    """
    Number of simplices per dimension with filtration <= eps.

    Raises:
        RangeError: if eps exceeds the complex's scale cap.
    """
    if eps > complex_.eps_max:
        raise RangeError(f"eps={eps} exceeds the complex's eps_max={complex_.eps_max}")
    counts = [0] * (complex_.max_dim + 1)
    for s in complex_.simplices:
        if s.filtration <= eps:
            counts[s.dim] += 1
    return tuple(counts)


def dump_complex(complex_: FilteredComplex) -> str:
    """Debug dump, one simplex per line: 'dim filtration v0 v1 ...'."""
    lines = []
    for s in complex_.simplices:
        lines.append(" ".join([str(s.dim), format(s.filtration, '.17g')] + [str(v) for v in s.vertices]))
    return "\n".join(lines) + ("\n" if lines else "")


def edges_at(matrix: DistanceMatrix, eps: float) -> Sequence[Tuple[int, int]]:
    """All vertex pairs within eps (closed threshold)."""
    return [(j, i) for i in range(matrix.size) for j in range(i) if matrix[i, j] <= eps]
