"""
Distance functions on circle-valued musical data.

Every musical quantity here lives on the circle R/Z: pitch classes (one unit is
an octave) and rhythmic onsets (one unit is a cycle). The distances build on
the shortest-arc ("necklace") distance and extend it to tuples, chords,
rhythms and finite subsets.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from errors import CardinalityError, DimensionError, DomainError

TOLERANCE = 1e-9
BRUTE_FORCE_MAX_NOTES = 6

RHYTHM_ALIGNMENTS = ("anchored", "continuous", "index")


def reduce_mod_one(value: float) -> float:
    """Reduce a real number to [0, 1)."""
    reduced = float(value) % 1.0
    # -1e-20 % 1.0 == 1.0 in floating point
    if reduced >= 1.0:
        reduced = 0.0
    return reduced


@dataclass(frozen=True, eq=False)
class CirclePoint:
    """A point of R/Z, stored as its representative in [0, 1)."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, 'value', reduce_mod_one(self.value))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CirclePoint):
            return NotImplemented
        return necklace_distance(self, other) <= TOLERANCE

    def __hash__(self) -> int:
        # tolerant equality is not transitive, so no grid of buckets is consistent with it
        return hash(CirclePoint)

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"CirclePoint({self.value:.12g})"


Pointlike = Union[CirclePoint, float]


def _value(point: Pointlike) -> float:
    return point.value if isinstance(point, CirclePoint) else reduce_mod_one(point)


def _points(values: Iterable[Pointlike]) -> Tuple[CirclePoint, ...]:
    return tuple(p if isinstance(p, CirclePoint) else CirclePoint(p) for p in values)


@dataclass(frozen=True)
class PitchTuple:
    """Ordered tuple of pitch classes, one time-delay embedding coordinate."""

    entries: Tuple[CirclePoint, ...]

    def __post_init__(self):
        entries = _points(self.entries)
        if not entries:
            raise DimensionError("PitchTuple needs at least one entry")
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def of(cls, *values: Pointlike) -> "PitchTuple":
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class ChordClass:
    """
    Multiset of pitch classes. Note order is irrelevant: notes are kept sorted
    and two chords are equal when their sorted notes agree within TOLERANCE.
    """

    notes: Tuple[CirclePoint, ...]

    def __post_init__(self):
        notes = tuple(sorted(_points(self.notes), key=lambda p: p.value))
        if not notes:
            raise DimensionError("ChordClass needs at least one note")
        object.__setattr__(self, 'notes', notes)

    @classmethod
    def of(cls, *values: Pointlike) -> "ChordClass":
        return cls(tuple(values))

    @classmethod
    def from_keys(cls, keys: Iterable[int]) -> "ChordClass":
        """Chord from MIDI key numbers."""
        return cls(tuple(pitch_class_of_key(k) for k in keys))

    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.notes])

    def __len__(self) -> int:
        return len(self.notes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChordClass):
            return NotImplemented
        if len(self) != len(other):
            return False
        return chord_class_distance(self, other) <= TOLERANCE

    def __hash__(self) -> int:
        return hash(len(self.notes))


@dataclass(frozen=True)
class RhythmPattern:
    """Onset positions of one rhythmic cycle, strictly ascending in [0, 1)."""

    onsets: Tuple[CirclePoint, ...]

    def __post_init__(self):
        onsets = tuple(sorted(_points(self.onsets), key=lambda p: p.value))
        if not onsets:
            raise DimensionError("RhythmPattern needs at least one onset")
        for earlier, later in zip(onsets, onsets[1:]):
            if later.value - earlier.value <= TOLERANCE:
                raise DomainError(f"duplicate onset at {earlier.value:.12g}")
        object.__setattr__(self, 'onsets', onsets)

    @classmethod
    def of(cls, *values: Pointlike) -> "RhythmPattern":
        return cls(tuple(values))

    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.onsets])

    def __len__(self) -> int:
        return len(self.onsets)


@dataclass(frozen=True)
class FiniteSubset:
    """Nonempty set of points of the circle (no multiplicity)."""

    elements: Tuple[CirclePoint, ...]

    def __post_init__(self):
        unique = []
        for point in sorted(_points(self.elements), key=lambda p: p.value):
            if not any(point == seen for seen in unique):
                unique.append(point)
        if not unique:
            raise DomainError("FiniteSubset must be nonempty")
        object.__setattr__(self, 'elements', tuple(unique))

    @classmethod
    def of(cls, *values: Pointlike) -> "FiniteSubset":
        return cls(tuple(values))

    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.elements])

    def __len__(self) -> int:
        return len(self.elements)


ChordTuple = Tuple[ChordClass, ...]


def necklace_distance(a: Pointlike, b: Pointlike) -> float:
    """
    Shortest-arc distance between two points of R/Z.

    Args:
        a: First point (CirclePoint or any real, reduced mod 1).
        b: Second point.

    Returns:
        min(s, 1 - s) with s = |a - b| mod 1, a value in [0, 0.5].
    """
    s = abs(_value(a) - _value(b)) % 1.0
    return min(s, 1.0 - s)


def _necklace_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise necklace distances between two value arrays."""
    s = np.abs(a[:, None] - b[None, :]) % 1.0
    return np.minimum(s, 1.0 - s)


def _necklace_elementwise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = np.abs(a - b) % 1.0
    return np.minimum(s, 1.0 - s)


def pitch_class_of(frequency: float) -> CirclePoint:
    """
    Octave-reduced pitch class of a frequency: log2(frequency) mod 1.

    The mantissa from frexp is used so that f and 2f map to bit-identical points.

    Raises:
        DomainError: if frequency is not positive.
    """
    if not frequency > 0 or math.isinf(frequency):
        raise DomainError(f"frequency must be a positive finite number, got {frequency}")
    mantissa, _ = math.frexp(frequency)
    # mantissa in [0.5, 1) so log2 lies in [-1, 0)
    return CirclePoint(math.log2(mantissa) + 1.0)


def pitch_class_of_key(key: int) -> CirclePoint:
    """Pitch class of a MIDI key number, (key mod 12) / 12."""
    return CirclePoint((key % 12) / 12)


def pitch_class_distance(f: float, g: float) -> float:
    """Pitch-class distance between two frequencies in hertz (a pseudo-metric)."""
    return necklace_distance(pitch_class_of(f), pitch_class_of(g))


def tuple_distance(u: PitchTuple, v: PitchTuple) -> float:
    """Sum of element-wise necklace distances between two equal-length tuples."""
    if len(u) != len(v):
        raise DimensionError(f"tuple lengths differ: {len(u)} vs {len(v)}")
    total = 0.0
    for a, b in zip(u.entries, v.entries):
        total += necklace_distance(a, b)
    return total


def chord_class_distance(F: ChordClass, G: ChordClass) -> float:
    """
    Minimum over note permutations of the summed necklace distances.

    The objective is a sum of independent pairwise costs, so the minimum is a
    linear assignment solved exactly by scipy's shortest augmenting path solver.

    Raises:
        CardinalityError: if the chords have different numbers of notes.
    """
    if len(F) != len(G):
        raise CardinalityError(
            f"chord-class distance needs equal cardinalities ({len(F)} vs {len(G)}); "
            "use hausdorff_distance for ragged chords"
        )
    cost = _necklace_matrix(F.values(), G.values())
    rows, cols = linear_sum_assignment(cost)
    total = 0.0
    for r, c in zip(rows, cols):
        total += float(cost[r, c])
    return total


def chord_class_distance_bruteforce(F: ChordClass, G: ChordClass) -> float:
    """Chord-class distance by enumerating all n! permutations (n <= 6)."""
    if len(F) != len(G):
        raise CardinalityError(f"cardinalities differ: {len(F)} vs {len(G)}")
    if len(F) > BRUTE_FORCE_MAX_NOTES:
        raise DimensionError(f"brute force limited to {BRUTE_FORCE_MAX_NOTES} notes")
    f = F.notes
    best = math.inf
    for perm in itertools.permutations(G.notes):
        total = 0.0
        for a, b in zip(f, perm):
            total += necklace_distance(a, b)
        best = min(best, total)
    return best


def _anchored_one_sided(f: np.ndarray, g: np.ndarray) -> float:
    anchored_f = (f - f[0]) % 1.0
    best = math.inf
    for k in range(len(g)):
        shifted = np.roll(g, -k)
        anchored_g = (shifted - shifted[0]) % 1.0
        best = min(best, float(_necklace_elementwise(anchored_f, anchored_g).sum()))
    return best


def _index_shift(f: np.ndarray, g: np.ndarray) -> float:
    best = math.inf
    for k in range(len(g)):
        best = min(best, float(_necklace_elementwise(f, np.roll(g, -k)).sum()))
    return best


def _continuous_rotation(f: np.ndarray, g: np.ndarray) -> float:
    best = math.inf
    for k in range(len(g)):
        offsets = (f - np.roll(g, -k)) % 1.0
        # The sum of tent functions is minimised at one of the offsets themselves.
        for theta in offsets:
            best = min(best, float(_necklace_elementwise(offsets, theta).sum()))
    return best


def rhythm_distance(f: RhythmPattern, g: RhythmPattern, alignment: str = "anchored") -> float:
    """
    Distance between two rhythms that ignores where in the cycle they start.

    Args:
        f: First rhythm.
        g: Second rhythm, same number of onsets.
        alignment: How cyclic shifts of g are aligned with f.
            "anchored" re-anchors every shift at its leading onset (rotations of
            one timeline are at distance 0); the one-sided minimum is not
            symmetric, so the smaller of both argument orders is returned.
            "continuous" also minimises over a global time offset.
            "index" shifts indices only, without re-anchoring.

    Returns:
        Non-negative distance, at most n / 2.

    Raises:
        CardinalityError: if the rhythms have different numbers of onsets.
    """
    if len(f) != len(g):
        raise CardinalityError(f"rhythms have {len(f)} and {len(g)} onsets")
    a, b = f.values(), g.values()
    if alignment == "anchored":
        return min(_anchored_one_sided(a, b), _anchored_one_sided(b, a))
    if alignment == "continuous":
        return _continuous_rotation(a, b)
    if alignment == "index":
        return _index_shift(a, b)
    raise DomainError(f"unknown rhythm alignment {alignment!r}; expected one of {RHYTHM_ALIGNMENTS}")


def rotate_rhythm(pattern: RhythmPattern, k: int) -> RhythmPattern:
    """The same timeline started from its k-th onset."""
    values = pattern.values()
    start = values[k % len(values)]
    return RhythmPattern(tuple((values - start) % 1.0))


def rhythm_from_timeline(bits: Sequence[int]) -> RhythmPattern:
    """
    Rhythm from a 0/1 pulse vector, e.g. (1,0,0,1,...) with one entry per pulse.

    Raises:
        DomainError: if the timeline has no pulses.
    """
    n = len(bits)
    onsets = [i / n for i, bit in enumerate(bits) if bit]
    if not onsets:
        raise DomainError("timeline contains no pulses")
    return RhythmPattern(tuple(onsets))


def hausdorff_distance(A: FiniteSubset, B: FiniteSubset) -> float:
    """Hausdorff distance between two finite subsets under the necklace metric."""
    if len(A) == 0 or len(B) == 0:
        raise DomainError("Hausdorff distance needs nonempty sets")
    d = _necklace_matrix(A.values(), B.values())
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def tde_chord_distance(P: Sequence[ChordClass], Q: Sequence[ChordClass]) -> float:
    """
    Distance between time-delay embedded chord sequences.

    Chord-class distances are summed position by position: notes inside one
    chord may be permuted, positions in time never are.

    Raises:
        DimensionError: if the delay lengths or chord sizes differ.
    """
    if len(P) != len(Q):
        raise DimensionError(f"delay lengths differ: {len(P)} vs {len(Q)}")
    total = 0.0
    for position, (F, G) in enumerate(zip(P, Q)):
        if len(F) != len(G):
            raise DimensionError(f"chord sizes differ at position {position}: {len(F)} vs {len(G)}")
        total += chord_class_distance(F, G)
    return total
