"""
Built-in point clouds: the worked examples and two geometric test clouds.

Each dataset carries the metric it is analysed with and, where one is known,
the ambient space and the scale window on which its barcode should look like
that space.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from errors import DatasetNotFoundError
from metrics import (
    ChordClass,
    RhythmPattern,
    rhythm_from_timeline,
    rotate_rhythm,
)
from point_cloud import DistanceMatrix, PointCloud
from theory import Circle, SpaceDescriptor, Symm

MIDDLE_C_HZ = 261.6

EWE_ONSETS = (0, 2, 4, 5, 7, 9, 11)
# the same timeline entered at other onsets
YORUBA_START = 3
BEMBA_START = 5

MAJOR_SCALE_STEPS = (0, 2, 4, 5, 7, 9, 11)

AFRO_CUBAN_TIMELINES: Dict[str, Tuple[int, ...]] = {
    "bossa-nova": (1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0),
    "gahu":       (1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0),
    "rumba":      (1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0),
    "shiko":      (1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0, 0),
    "son":        (1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0, 0),
    "soukous":    (1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 0),
}

CLAVE_SON = AFRO_CUBAN_TIMELINES["son"]

NOTE_NAMES = ("C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B")


@dataclass(frozen=True)
class Dataset:
    """A named cloud (or a bare distance matrix) with its analysis defaults."""

    name: str
    description: str
    metric: Optional[str]
    cloud: Optional[PointCloud] = None
    matrix: Optional[DistanceMatrix] = None
    space: Optional[SpaceDescriptor] = None
    window: Optional[Tuple[float, float]] = None

    @property
    def size(self) -> int:
        return len(self.cloud) if self.cloud is not None else self.matrix.size


def ewe_rhythm() -> RhythmPattern:
    return RhythmPattern(tuple(k / 12 for k in EWE_ONSETS))


def _onset_cloud(pattern: RhythmPattern, pulses: int) -> PointCloud:
    labels = tuple(str(round(p.value * pulses)) for p in pattern.onsets)
    return PointCloud(pattern.onsets, labels)


def _ewe() -> Dataset:
    return Dataset(
        "ewe", "Ewe standard bell pattern, 7 onsets in a 12-pulse cycle",
        "necklace", cloud=_onset_cloud(ewe_rhythm(), 12),
        space=Circle(), window=(0.17, 0.40),
    )


def _yoruba() -> Dataset:
    return Dataset(
        "yoruba", "standard pattern entered at its 4th onset (rotation of ewe)",
        "necklace", cloud=_onset_cloud(rotate_rhythm(ewe_rhythm(), YORUBA_START), 12),
        space=Circle(), window=(0.17, 0.40),
    )


def _bemba() -> Dataset:
    return Dataset(
        "bemba", "standard pattern entered at its 6th onset (rotation of ewe)",
        "necklace", cloud=_onset_cloud(rotate_rhythm(ewe_rhythm(), BEMBA_START), 12),
        space=Circle(), window=(0.17, 0.40),
    )


def cmajor_frequencies() -> List[float]:
    steps = MAJOR_SCALE_STEPS + (12,)
    return [MIDDLE_C_HZ * 2 ** (s / 12) for s in steps]


def _cmajor_scale() -> Dataset:
    labels = ("C", "D", "E", "F", "G", "A", "B", "C'")
    return Dataset(
        "cmajor-scale",
        "C major scale from C=261.6 Hz up the octave, 8 frequencies (7 points once C' merges with C)",
        "pitch-class", cloud=PointCloud(tuple(cmajor_frequencies()), labels),
        space=Circle(), window=(0.17, 0.37),
    )


def major_scale(root: int) -> ChordClass:
    return ChordClass.from_keys((root + s) % 12 for s in MAJOR_SCALE_STEPS)


def _circle_of_fifths() -> Dataset:
    roots = [(7 * i) % 12 for i in range(12)]
    return Dataset(
        "circle-of-fifths", "the 12 major scales as 7-note chords, ordered by fifths",
        "chord-class",
        cloud=PointCloud(tuple(major_scale(r) for r in roots), tuple(NOTE_NAMES[r] for r in roots)),
        space=Symm(7), window=(0.09, 0.32),
    )


def afro_cuban_rhythms() -> Dict[str, RhythmPattern]:
    return {name: rhythm_from_timeline(bits) for name, bits in AFRO_CUBAN_TIMELINES.items()}


def _afro_cuban() -> Dataset:
    rhythms = afro_cuban_rhythms()
    return Dataset(
        "afro-cuban", "six 5-onset Afro-Cuban timelines in a 16-pulse cycle",
        "rhythm-index", cloud=PointCloud(tuple(rhythms.values()), tuple(rhythms)),
    )


def _clave_son() -> Dataset:
    pattern = rhythm_from_timeline(CLAVE_SON)
    return Dataset(
        "clave-son", "the 5 onsets of the clave son in a 16-pulse cycle",
        "necklace", cloud=_onset_cloud(pattern, 16), space=Circle(),
    )


def _square() -> Dataset:
    side, diagonal = 1.0, math.sqrt(2.0)
    dense = [
        [0.0, side, diagonal, side],
        [side, 0.0, side, diagonal],
        [diagonal, side, 0.0, side],
        [side, diagonal, side, 0.0],
    ]
    return Dataset(
        "square", "unit square: 4 corners, sides 1 and diagonals sqrt(2)",
        None, matrix=DistanceMatrix.from_dense(dense, ("a", "b", "c", "d")),
        space=Circle(), window=(1.0, 1.4),
    )


def _equilateral() -> Dataset:
    dense = [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]
    return Dataset(
        "equilateral", "equilateral triangle with unit sides",
        None, matrix=DistanceMatrix.from_dense(dense, ("a", "b", "c")),
    )


DATASETS: Dict[str, Callable[[], Dataset]] = {
    "ewe": _ewe,
    "yoruba": _yoruba,
    "bemba": _bemba,
    "cmajor-scale": _cmajor_scale,
    "circle-of-fifths": _circle_of_fifths,
    "afro-cuban": _afro_cuban,
    "clave-son": _clave_son,
    "square": _square,
    "equilateral": _equilateral,
}


def load_dataset(name: str) -> Dataset:
    """
    Build a built-in dataset by name.

    Raises:
        DatasetNotFoundError: if no dataset has that name.
    """
    try:
        builder = DATASETS[name]
    except KeyError:
        raise DatasetNotFoundError(
            f"unknown dataset {name!r}; available: {', '.join(DATASETS)}"
        ) from None
    return builder()


def list_datasets() -> List[Tuple[str, str]]:
    """(name, description) of every built-in dataset, in listing order."""
    return [(name, builder().description) for name, builder in DATASETS.items()]
