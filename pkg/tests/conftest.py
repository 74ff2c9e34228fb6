"""
Shared fixtures for the cell tracker test suite.

Every test starts from a fresh settings cache and a working directory
without a ``.env`` file, so results never depend on the developer's shell.
"""

from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

from cell_tracker.config.settings import clear_settings_cache
from cell_tracker.models import AmplitudeModel, FilterParams, GridGeometry


@pytest.fixture(autouse=True)
def isolated_settings(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path
) -> Generator[None, None, None]:
    """Run each test in a scratch directory with a clean settings cache."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("ENV", "test")
    clear_settings_cache()
    yield
    clear_settings_cache()


@pytest.fixture
def grid() -> GridGeometry:
    """Reference 32 x 32 grid of unit cells."""
    return GridGeometry()


@pytest.fixture
def small_grid() -> GridGeometry:
    """4 x 4 grid of unit cells."""
    return GridGeometry(n_rows=4, n_cols=4)


@pytest.fixture
def amplitude_model() -> AmplitudeModel:
    return AmplitudeModel(sigma_n_sq=1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def light_params() -> FilterParams:
    """Filter parameters with small particle counts for fast tests."""
    return FilterParams(
        particles_per_bernoulli=300,
        phd_particle_budget=3000,
        birth_particle_count=3000,
    )
