"""Integration tests for the filter factory."""

import numpy as np
import pytest

from cell_tracker.config.experiment import MeasurementSection
from cell_tracker.core.errors import ConfigurationError
from cell_tracker.filters import PmbCmFilter, PmbPointFilter
from cell_tracker.filters.measurement import p_fa
from cell_tracker.models import FilterKind, FilterParams, GridGeometry, PositionLikelihood
from cell_tracker.services.filter_factory import create_filter


class TestCreateFilterIntegration:
    def test_cell_filter(self, grid: GridGeometry) -> None:
        filt = create_filter(
            FilterKind.PMB_CM, FilterParams(), grid, MeasurementSection(), np.random.default_rng(0)
        )

        assert isinstance(filt, PmbCmFilter)
        assert filt.name == "pmb_cm"

    @pytest.mark.parametrize(("kind", "amplitude"), [(FilterKind.PMB_AM, True), (FilterKind.PMB, False)])
    def test_point_filters(self, grid: GridGeometry, kind: FilterKind, amplitude: bool) -> None:
        """
        Test point-filter construction.

        Scenario:
            pmb_am and pmb at eta = 4 with a uniform-on-cell position likelihood

        Expected:
            Amplitude flag by kind; clutter rate p_fa(4) * 1024; options passed through
        """
        measurement = MeasurementSection(position_likelihood=PositionLikelihood.CELL_UNIFORM)

        filt = create_filter(kind, FilterParams(eta=4.0), grid, measurement, np.random.default_rng(0))

        assert isinstance(filt, PmbPointFilter)
        assert filt.name == kind.value
        assert filt.point_model.amplitude_enabled is amplitude
        assert filt.point_model.position_likelihood is PositionLikelihood.CELL_UNIFORM
        assert filt.point_model.mu_fa == pytest.approx(p_fa(measurement.amplitude_model, 4.0) * 1024)

    def test_point_filter_at_zero_threshold(self, grid: GridGeometry) -> None:
        with pytest.raises(ConfigurationError):
            create_filter(
                FilterKind.PMB, FilterParams(eta=0.0), grid, MeasurementSection(), np.random.default_rng(0)
            )
