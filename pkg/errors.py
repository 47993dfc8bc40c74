"""
Exception hierarchy shared by every module.

Each error class carries the process exit code the CLI uses when the error
escapes a run: 2 for configuration problems, 3 for unreadable MIDI input and
4 for data that cannot be analysed.
"""
from typing import Optional

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_DATA = 4


class MusicTDAError(ValueError):
    """Base class for all library errors."""

    exit_code = EXIT_DATA


class DomainError(MusicTDAError):
    """An argument lies outside the domain of a function (e.g. a non-positive frequency)."""


class DimensionError(MusicTDAError):
    """Operands have incompatible lengths or shapes."""


class CardinalityError(MusicTDAError):
    """Chords or rhythms with different numbers of notes were compared."""


class EmptyInputError(MusicTDAError):
    """A selection or extraction produced nothing to analyse."""


class RangeError(MusicTDAError):
    """A scale parameter lies outside the range a complex was built for."""


class SizeError(MusicTDAError):
    """Input is too large for a dense, small-scale computation."""


class ConfigurationError(MusicTDAError):
    """Invalid settings, flags or metric/payload combinations."""

    exit_code = EXIT_CONFIG


class DatasetNotFoundError(ConfigurationError):
    """An unknown built-in dataset was requested."""


class TheoryLookupError(ConfigurationError):
    """A space descriptor is outside the curated theory tables."""


class MidiParseError(MusicTDAError):
    """A Standard MIDI File could not be parsed.

    Args:
        message: What went wrong.
        offset: Byte offset in the input where the problem was detected.
    """

    exit_code = EXIT_PARSE

    def __init__(self, message: str, offset: Optional[int] = None):
        self.message = message
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class MatrixFormatError(MusicTDAError):
    """A plain-text distance matrix could not be read."""

    exit_code = EXIT_PARSE
