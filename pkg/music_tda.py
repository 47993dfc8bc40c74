#!/usr/bin/env python3
"""
Music TDA command line.

Turns a MIDI file, a plain-text distance matrix or a built-in dataset into a
point cloud, builds its Vietoris-Rips filtration, computes the persistence
barcode and reports it as text, JSON or SVG, optionally compared with the
homology of an ambient musical space.

    python music_tda.py run ewe
    python music_tda.py run song.mid --mode chords --chord-size 4 --delay 2
    python music_tda.py run circle-of-fifths --format json --threads 8
    python music_tda.py datasets
    python music_tda.py matrix afro-cuban
    python music_tda.py theory "symm-z4-4"
"""
import argparse
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ValidationError, field_validator, model_validator

from barcode_render import render_summary, render_svg
from config import get_settings, is_prime
from datasets import DATASETS, Dataset, list_datasets, load_dataset
from errors import (
    EXIT_OK,
    ConfigurationError,
    DatasetNotFoundError,
    EmptyInputError,
    MusicTDAError,
    TheoryLookupError,
)
from metrics import RHYTHM_ALIGNMENTS
from midi_ingest import Selector, extract_chords, extract_melody, extract_onsets, load_midi
from persistence import Barcode, FieldSensitivity, barcode_to_json, field_sensitivity, reduce
from point_cloud import (
    METRICS,
    RHYTHM_METRIC_BY_ALIGNMENT,
    DistanceMatrix,
    PointCloud,
    collapse_duplicates,
    delay_embed,
    diameter_ratio,
    distance_matrix,
    embed_pitches,
    merge_events,
)
from rips import FilteredComplex, build_rips
from theory import (
    BarcodeComparison,
    SpaceDescriptor,
    compare_barcode,
    parse_space,
    space_diameter,
    theory_table,
)

logger = logging.getLogger(__name__)

MODES = ("melody", "chords", "rhythm", "matrix")
FORMATS = ("text", "json", "svg")
MIDI_SUFFIXES = (".mid", ".midi", ".smf")

# metrics that each MIDI mode can feed, by whether the cloud is delay-embedded
MODE_METRICS = {
    ("melody", False): ("necklace", "pitch-class"),
    ("melody", True): ("tuple",),
    ("chords", False): ("chord-class", "hausdorff"),
    ("chords", True): ("tde-chord",),
    ("rhythm", False): ("necklace", "pitch-class"),
    ("rhythm", True): ("tuple",),
}


class AnalysisConfig(BaseModel):
    """One analysis run. Unset fields fall back to Settings, then to the dataset's defaults."""

    input: str
    mode: Optional[str] = None
    metric: Optional[str] = None
    delay: int = 1
    chord_size: Optional[int] = None
    cycle: Fraction = Fraction(4)
    tracks: Optional[Tuple[int, ...]] = None
    max_dim: Optional[int] = None
    eps_max: Optional[float] = None
    field: Optional[int] = None
    keep_duplicates: bool = False
    format: str = "text"
    compare_space: Optional[str] = None
    window: Optional[Tuple[float, float]] = None
    quantize: Optional[Fraction] = None
    threads: Optional[int] = None
    rhythm_alignment: Optional[str] = None

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    @field_validator("mode")
    @classmethod
    def _known_mode(cls, value):
        if value is not None and value not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        return value

    @field_validator("metric")
    @classmethod
    def _known_metric(cls, value):
        if value is not None and value not in METRICS:
            raise ValueError(f"unknown metric {value!r}; choose from {', '.join(sorted(METRICS))}")
        return value

    @field_validator("format")
    @classmethod
    def _known_format(cls, value):
        if value not in FORMATS:
            raise ValueError(f"format must be one of {', '.join(FORMATS)}")
        return value

    @field_validator("delay")
    @classmethod
    def _delay_positive(cls, value):
        if value < 1:
            raise ValueError("delay must be >= 1")
        return value

    @field_validator("chord_size", "threads")
    @classmethod
    def _optional_positive(cls, value):
        if value is not None and value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("max_dim")
    @classmethod
    def _max_dim(cls, value):
        if value is not None and value < 0:
            raise ValueError("max_dim must be >= 0")
        return value

    @field_validator("eps_max")
    @classmethod
    def _eps_max(cls, value):
        if value is not None and value < 0:
            raise ValueError("eps_max must be >= 0")
        return value

    @field_validator("field")
    @classmethod
    def _field_prime(cls, value):
        if value is not None and not is_prime(value):
            raise ValueError(f"field characteristic must be prime, got {value}")
        return value

    @field_validator("cycle", "quantize", mode="before")
    @classmethod
    def _fraction(cls, value):
        if value is None:
            return value
        value = Fraction(value)
        if value <= 0:
            raise ValueError("must be > 0")
        return value

    @field_validator("window")
    @classmethod
    def _window_ordered(cls, value):
        if value is not None and not value[0] < value[1]:
            raise ValueError("window must satisfy lo < hi")
        return value

    @field_validator("rhythm_alignment")
    @classmethod
    def _alignment(cls, value):
        if value is not None and value not in RHYTHM_ALIGNMENTS:
            raise ValueError(f"rhythm alignment must be one of {', '.join(RHYTHM_ALIGNMENTS)}")
        return value

    @model_validator(mode="after")
    def _mode_metric_compatible(self):
        if self.mode == "matrix" and self.metric is not None:
            raise ValueError("matrix mode reads distances directly and takes no metric")
        if self.mode in ("melody", "chords", "rhythm") and self.metric is not None:
            allowed = MODE_METRICS[(self.mode, self.delay > 1)]
            if self.metric not in allowed:
                raise ValueError(
                    f"metric {self.metric!r} does not apply to {self.mode} mode with delay {self.delay}; "
                    f"use {' or '.join(allowed)}"
                )
        return self


def make_config(**kwargs) -> AnalysisConfig:
    """Validate a config, reporting problems as ConfigurationError."""
    try:
        return AnalysisConfig(**kwargs)
    except (ValidationError, ValueError, ZeroDivisionError) as e:
        raise ConfigurationError(f"Invalid analysis options: {e}") from None


@dataclass
class AnalysisResult:
    """Everything a run produced."""

    name: str
    matrix: DistanceMatrix
    complex: FilteredComplex
    barcode: Barcode
    merges: List[Tuple[float, int]]
    metric: Optional[str] = None
    cloud: Optional[PointCloud] = None
    comparison: Optional[BarcodeComparison] = None
    fill_ratio: Optional[float] = None
    sensitivity: Optional[FieldSensitivity] = None

    @property
    def barcode_json(self) -> str:
        return barcode_to_json(self.barcode)

    def summary(self) -> str:
        return render_summary(self.barcode, self.matrix, self.name, self.merges,
                              self.comparison, self.fill_ratio, self.metric, self.sensitivity)

    def svg(self) -> str:
        return render_svg(self.barcode, title=self.name)


def _cloud_from_midi(config: AnalysisConfig, path: Path) -> Tuple[PointCloud, str]:
    settings = get_settings()
    score = load_midi(path)
    selector = Selector.of(tracks=config.tracks) if config.tracks is not None else None
    mode = config.mode or "melody"
    embedded = config.delay > 1

    if mode == "melody":
        pitches = extract_melody(score, selector).pitches
        points = tuple(embed_pitches(pitches, config.delay)) if embedded else pitches
        default = "tuple" if embedded else "necklace"
    elif mode == "chords":
        sequence = extract_chords(score, config.quantize or settings.chord_window, selector)
        if config.chord_size is not None:
            sequence = sequence.top_voices(config.chord_size)
        if embedded:
            points = tuple(delay_embed(sequence.chords, config.delay))
            default = "tde-chord"
        else:
            points = sequence.chords
            default = "hausdorff" if sequence.ragged else "chord-class"
            if sequence.ragged and config.metric is None:
                logger.info("Chord sizes vary %s; comparing chords with hausdorff", sequence.cardinalities)
    elif mode == "rhythm":
        onsets = extract_onsets(score, config.cycle, selector).onsets
        points = tuple(embed_pitches(onsets, config.delay)) if embedded else onsets
        default = "tuple" if embedded else "necklace"
    else:
        raise ConfigurationError(f"{path} is a MIDI file; use mode melody, chords or rhythm")

    if not points:
        raise EmptyInputError(f"{path}: the selection yields no {mode} points")

    logger.info("Loaded %d %s points from %s", len(points), mode, path)
    return PointCloud(tuple(points)), config.metric or default


def _resolve_metric(config: AnalysisConfig, metric: str) -> str:
    rhythm_family = set(RHYTHM_METRIC_BY_ALIGNMENT.values())
    if metric not in rhythm_family:
        if config.rhythm_alignment is not None:
            raise ConfigurationError("--rhythm-alignment only applies to rhythm metrics")
        return metric
    alignment = config.rhythm_alignment
    if alignment is None and config.metric == "rhythm":
        alignment = get_settings().rhythm_alignment
    return RHYTHM_METRIC_BY_ALIGNMENT[alignment] if alignment else metric


def load_source(config: AnalysisConfig) -> Tuple[str, Optional[PointCloud], Optional[DistanceMatrix],
                                                   Optional[str], Optional[Dataset]]:
    """
    Resolve the input to a cloud (with its metric) or a ready distance matrix.

    Returns:
        (name, cloud, matrix, metric, dataset); exactly one of cloud and matrix is set.
    """
    if config.input in DATASETS:
        dataset = load_dataset(config.input)
        if dataset.matrix is not None:
            if config.metric is not None:
                raise ConfigurationError(f"dataset {dataset.name!r} is a distance matrix and takes no metric")
            return dataset.name, None, dataset.matrix, None, dataset
        return dataset.name, dataset.cloud, None, config.metric or dataset.metric, dataset

    path = Path(config.input)
    if not path.is_file():
        raise DatasetNotFoundError(
            f"{config.input!r} is neither a built-in dataset ({', '.join(DATASETS)}) nor a file"
        )
    if path.suffix.lower() in MIDI_SUFFIXES and config.mode != "matrix":
        cloud, metric = _cloud_from_midi(config, path)
        return path.name, cloud, None, metric, None
    if config.mode not in (None, "matrix"):
        raise ConfigurationError(f"{path} is not a MIDI file; only matrix mode can read it")
    return path.name, None, DistanceMatrix.from_text(path.read_text()), None, None


def prepare_matrix(config: AnalysisConfig) -> Tuple[str, Optional[PointCloud], DistanceMatrix,
                                                     Optional[str], Optional[Dataset]]:
    """
    Load the input and compute its distance matrix.

    Returns:
        (name, cloud, matrix, metric, dataset); metric is the resolved selector,
        or None when the input already was a distance matrix.
    """
    settings = get_settings()
    name, cloud, matrix, metric, dataset = load_source(config)
    if cloud is not None:
        metric = _resolve_metric(config, metric)
        if not config.keep_duplicates:
            cloud = collapse_duplicates(cloud, settings.duplicate_tolerance, metric)
        matrix = distance_matrix(cloud, metric, config.threads or settings.threads)
        logger.info("%s: %d points under %s", name, len(cloud), metric)
    return name, cloud, matrix, metric, dataset


def _comparison_target(config: AnalysisConfig, dataset: Optional[Dataset]
                       ) -> Tuple[Optional[SpaceDescriptor], Optional[Tuple[float, float]]]:
    if config.compare_space is not None:
        space = parse_space(config.compare_space)
        window = config.window or (dataset.window if dataset and dataset.space == space else None)
        if window is None:
            raise ConfigurationError("--compare-space needs --window lo:hi")
        return space, window
    if dataset is not None and dataset.space is not None:
        return dataset.space, config.window or dataset.window
    return None, None


def run(config: AnalysisConfig) -> AnalysisResult:
    """
    Full pipeline: input, distances, Rips filtration, barcode and comparison.

    Identical configs give byte-identical barcode JSON regardless of thread count.
    """
    settings = get_settings()
    name, cloud, matrix, metric, dataset = prepare_matrix(config)

    max_dim = config.max_dim if config.max_dim is not None else settings.max_dim
    field = config.field if config.field is not None else settings.field
    complex_ = build_rips(matrix, max_dim=max_dim, eps_max=config.eps_max)
    barcode = reduce(complex_, field)
    sensitivity = field_sensitivity(complex_, barcode)

    space, window = _comparison_target(config, dataset)
    comparison = compare_barcode(barcode, space, window) if space is not None and window else None
    fill_ratio = None
    if space is not None:
        try:
            fill_ratio = diameter_ratio(matrix, space_diameter(space))
        except TheoryLookupError:
            fill_ratio = None

    merges = merge_events(matrix, cloud.multiplicities if cloud is not None else None)
    return AnalysisResult(name, matrix, complex_, barcode, merges, metric, cloud, comparison,
                          fill_ratio, sensitivity)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _parse_window(text: str) -> Tuple[float, float]:
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return float(lo), float(hi)
    except ValueError:
        raise ConfigurationError(f"window must look like lo:hi, got {text!r}") from None


def _parse_tracks(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigurationError(f"tracks must be comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Persistent homology of musical data')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    commands = parser.add_subparsers(dest='command', required=True)

    run_parser = commands.add_parser('run', help='Compute a barcode')
    matrix_parser = commands.add_parser('matrix', help='Print the distance matrix in interchange format')
    for sub in (run_parser, matrix_parser):
        sub.add_argument('input', help='MIDI file, distance matrix file or built-in dataset name')
        sub.add_argument('--mode', choices=MODES, help='How to read a MIDI file (default melody)')
        sub.add_argument('--metric', choices=sorted(METRICS), help='Distance function')
        sub.add_argument('--delay', type=int, default=1, help='Time-delay embedding length')
        sub.add_argument('--chord-size', type=int, help='Keep the k highest notes of each chord')
        sub.add_argument('--cycle', default='4', help='Rhythm cycle length in beats (default 4)')
        sub.add_argument('--tracks', help='Comma-separated track indices to read')
        sub.add_argument('--quantize', help='Chord onset window in beats, e.g. 1/32')
        sub.add_argument('--keep-duplicates', action='store_true', help='Do not merge coincident points')
        sub.add_argument('--threads', type=int, help='Worker threads for the distance matrix')
        sub.add_argument('--rhythm-alignment', choices=RHYTHM_ALIGNMENTS,
                         help='Cyclic alignment used by the rhythm metric')

    run_parser.add_argument('--max-dim', type=int, help='Highest simplex dimension (default 3)')
    run_parser.add_argument('--eps-max', type=float, help='Scale cap (default: largest distance)')
    run_parser.add_argument('--field', type=int, help='Prime field characteristic (default 2)')
    run_parser.add_argument('--format', choices=FORMATS, default='text', help='Output on stdout')
    run_parser.add_argument('--compare-space', help='Ambient space to compare with, e.g. circle or symm:3')
    run_parser.add_argument('--window', help='Scale window lo:hi for the comparison')
    run_parser.add_argument('--json', dest='json_path', help='Also write the barcode JSON here')
    run_parser.add_argument('--svg', dest='svg_path', help='Also write the SVG barcode here')

    commands.add_parser('datasets', help='List built-in datasets')

    theory_parser = commands.add_parser('theory', help='Homology of an ambient space')
    theory_parser.add_argument('space', help='Space name, e.g. circle, torus:2, symm-z4-4, exp:3')
    theory_parser.add_argument('--json', action='store_true', help='Print as JSON')
    return parser


def config_from_args(args: argparse.Namespace) -> AnalysisConfig:
    options = dict(
        input=args.input,
        mode=args.mode,
        metric=args.metric,
        delay=args.delay,
        chord_size=args.chord_size,
        cycle=args.cycle,
        tracks=_parse_tracks(args.tracks) if args.tracks else None,
        keep_duplicates=args.keep_duplicates,
        quantize=args.quantize,
        threads=args.threads,
        rhythm_alignment=args.rhythm_alignment,
    )
    if args.command == 'run':
        options.update(
            max_dim=args.max_dim,
            eps_max=args.eps_max,
            field=args.field,
            format=args.format,
            compare_space=args.compare_space,
            window=_parse_window(args.window) if args.window else None,
        )
    return make_config(**options)


def _print_run(result: AnalysisResult, config: AnalysisConfig) -> None:
    if config.format == 'json':
        sys.stdout.write(result.barcode_json)
    elif config.format == 'svg':
        sys.stdout.write(result.svg())
    else:
        print("=" * 60)
        print(f"Barcode: {result.name}")
        print("=" * 60)
        sys.stdout.write(result.summary())
        print("=" * 60)


def _print_datasets() -> None:
    print("=" * 60)
    print("Built-in datasets")
    print("=" * 60)
    for name, description in list_datasets():
        print(f"  {name:<18} {description}")


def _print_theory(space_name: str, as_json: bool) -> None:
    table = theory_table(parse_space(space_name))
    if as_json:
        print(json.dumps(table, indent=2))
        return
    print("=" * 60)
    print(f"Space: {table['space']}")
    print("=" * 60)
    print(f"Betti numbers: {table['poincare_polynomial']}")
    for k, group in enumerate(table['homology']):
        print(f"  H{k} = {group}")
    if table['diameter'] is not None:
        print(f"Diameter: {table['diameter']}")
    for note in table['notes']:
        print(f"Note: {note}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_settings()
        level = logging.DEBUG if args.verbose else getattr(logging, settings.log_level, logging.WARNING)
        logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

        if args.command == 'datasets':
            _print_datasets()
        elif args.command == 'theory':
            _print_theory(args.space, args.json)
        elif args.command == 'matrix':
            _, _, matrix, _, _ = prepare_matrix(config_from_args(args))
            sys.stdout.write(matrix.to_text())
        else:
            config = config_from_args(args)
            result = run(config)
            if args.json_path:
                Path(args.json_path).write_text(result.barcode_json)
            if args.svg_path:
                Path(args.svg_path).write_text(result.svg())
            _print_run(result, config)
    except MusicTDAError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
