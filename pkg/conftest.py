"""
Shared pytest fixtures.
"""
from pathlib import Path

import numpy as np
import pytest

from config import reset_settings

FIXTURES = Path(__file__).parent / "fixtures"

SETTINGS_VARIABLES = (
    'MUSIC_TDA_FIELD',
    'MUSIC_TDA_MAX_DIM',
    'MUSIC_TDA_THREADS',
    'MUSIC_TDA_CHORD_WINDOW',
    'MUSIC_TDA_DUPLICATE_TOLERANCE',
    'MUSIC_TDA_RHYTHM_ALIGNMENT',
    'MUSIC_TDA_ORACLE_MAX_POINTS',
    'MUSIC_TDA_LOG_LEVEL',
)


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Every test starts from default settings."""
    for name in SETTINGS_VARIABLES:
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
