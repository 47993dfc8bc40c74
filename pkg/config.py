"""
Settings for the analysis pipeline, read from the environment (and .env).
"""
import os
from fractions import Fraction
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError, field_validator

from errors import ConfigurationError
from metrics import RHYTHM_ALIGNMENTS

load_dotenv()


class Settings(BaseModel):
    """Pipeline defaults. CLI flags override these per run."""

    field: int = 2
    max_dim: int = 3
    threads: int = 1
    chord_window: Fraction = Fraction(1, 32)
    duplicate_tolerance: float = 1e-9
    rhythm_alignment: str = "anchored"
    oracle_max_points: int = 15
    log_level: str = "WARNING"

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    @field_validator("field")
    @classmethod
    def _field_is_prime(cls, value: int) -> int:
        if not is_prime(value):
            raise ValueError(f"field characteristic must be prime, got {value}")
        return value

    @field_validator("max_dim")
    @classmethod
    def _max_dim_non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("max_dim must be >= 0")
        return value

    @field_validator("threads", "oracle_max_points")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("chord_window", mode="before")
    @classmethod
    def _parse_window(cls, value) -> Fraction:
        window = Fraction(value) if not isinstance(value, Fraction) else value
        if window <= 0:
            raise ValueError("chord window must be > 0")
        return window

    @field_validator("duplicate_tolerance")
    @classmethod
    def _tolerance_non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("duplicate tolerance must be >= 0")
        return value

    @field_validator("rhythm_alignment")
    @classmethod
    def _known_alignment(cls, value: str) -> str:
        value = value.lower()
        if value not in RHYTHM_ALIGNMENTS:
            raise ValueError(f"rhythm alignment must be one of {', '.join(RHYTHM_ALIGNMENTS)}")
        return value

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        return value.upper()


def is_prime(p: int) -> bool:
    """Trial-division primality test (field sizes here are tiny)."""
    if p < 2:
        return False
    factor = 2
    while factor * factor <= p:
        if p % factor == 0:
            return False
        factor += 1
    return True


def load_settings() -> Settings:
    """
    Build settings from MUSIC_TDA_* environment variables.

    Returns:
        Validated Settings instance.

    Raises:
        ConfigurationError: if any variable holds an invalid value.
    """
    env = {
        'field': os.getenv('MUSIC_TDA_FIELD', '2'),
        'max_dim': os.getenv('MUSIC_TDA_MAX_DIM', '3'),
        'threads': os.getenv('MUSIC_TDA_THREADS', '1'),
        'chord_window': os.getenv('MUSIC_TDA_CHORD_WINDOW', '1/32'),
        'duplicate_tolerance': os.getenv('MUSIC_TDA_DUPLICATE_TOLERANCE', '1e-9'),
        'rhythm_alignment': os.getenv('MUSIC_TDA_RHYTHM_ALIGNMENT', 'anchored'),
        'oracle_max_points': os.getenv('MUSIC_TDA_ORACLE_MAX_POINTS', '15'),
        'log_level': os.getenv('MUSIC_TDA_LOG_LEVEL', 'WARNING'),
    }
    try:
        return Settings(**env)
    except (ValidationError, ValueError, ZeroDivisionError) as e:
        raise ConfigurationError(f"Invalid MUSIC_TDA_* setting: {e}") from e


# Singleton instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Get or create the singleton settings instance.

    Returns:
        Settings instance.
    """
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def reset_settings() -> None:
    """Forget the cached settings so the next get_settings() re-reads the environment."""
    global _settings
    _settings = None
