"""Integration tests for the Rayleigh cell model and its truncated densities."""

import numpy as np
import pytest
from scipy import integrate

from cell_tracker.core.errors import MeasurementDomainError
from cell_tracker.filters.measurement import (
    cell_scale_sq,
    detection_probability,
    f0_eta,
    f1_eta,
    log_f1,
    miss_probability,
    p_d,
    p_fa,
    synthesize_frame,
    threshold_frame,
)
from cell_tracker.models import AmplitudeModel, CellFrame, GridGeometry, ObjectState


def _rayleigh_tail(scale_sq: float, eta: float) -> float:
    value, _ = integrate.quad(
        lambda z: z / scale_sq * np.exp(-z * z / (2.0 * scale_sq)), eta, np.inf
    )
    return float(value)


class TestDetectionProbabilitiesIntegration:
    """Closed-form tails checked against numerical quadrature."""

    @pytest.mark.parametrize("eta", [0.5, 2.0, 4.0, 6.0])
    def test_p_fa_matches_quadrature(self, amplitude_model: AmplitudeModel, eta: float) -> None:
        """
        Test the false-alarm probability against quadrature of the clutter density.

        Scenario:
            sigma_n^2 = 1 at several thresholds

        Expected:
            Relative agreement within 1e-6
        """
        assert p_fa(amplitude_model, eta) == pytest.approx(_rayleigh_tail(1.0, eta), rel=1e-6)

    def test_p_fa_reference_values(self, amplitude_model: AmplitudeModel) -> None:
        assert p_fa(amplitude_model, 2.0) == pytest.approx(0.1353353, rel=1e-6)
        assert p_fa(amplitude_model, 6.0) == pytest.approx(1.523e-8, rel=1e-3)
        assert p_fa(amplitude_model, 0.0) == 1.0

    @pytest.mark.parametrize(("gamma", "eta"), [(10.0, 2.0), (10.0, 4.0), (10.0, 6.0), (1.0, 2.0)])
    def test_p_d_matches_quadrature(
        self, amplitude_model: AmplitudeModel, gamma: float, eta: float
    ) -> None:
        state = ObjectState(p1=0.5, p2=0.5, gamma=gamma)

        assert p_d(state, amplitude_model, eta) == pytest.approx(
            _rayleigh_tail(1.0 + gamma, eta), rel=1e-6
        )

    def test_p_d_reference_value(self, amplitude_model: AmplitudeModel) -> None:
        """Test p_d for gamma = 10 at eta = 2 is about 0.8338."""
        state = ObjectState(p1=0.5, p2=0.5, gamma=10.0)

        assert p_d(state, amplitude_model, 2.0) == pytest.approx(0.8338, abs=1e-3)

    def test_zero_gamma_detects_like_clutter(self, amplitude_model: AmplitudeModel) -> None:
        state = ObjectState(p1=0.5, p2=0.5, gamma=0.0)

        assert p_d(state, amplitude_model, 3.0) == pytest.approx(p_fa(amplitude_model, 3.0))

    def test_miss_probability_without_cancellation(self, amplitude_model: AmplitudeModel) -> None:
        """Test that 1 - p_d stays accurate for a tiny threshold."""
        eta = 1e-6
        expected = eta * eta / (2.0 * 11.0)

        assert float(miss_probability(10.0, amplitude_model, eta)) == pytest.approx(
            expected, rel=1e-6
        )

    def test_p_d_monotone_in_gamma_and_eta(self, amplitude_model: AmplitudeModel) -> None:
        """
        Test the direction of the detection probability.

        Scenario:
            gamma from 0 to 50 at eta = 2; eta from 0.1 to 8 at gamma = 10

        Expected:
            Strictly increasing in gamma, strictly decreasing in eta
        """
        gammas = np.linspace(0.0, 50.0, 101)
        etas = np.linspace(0.1, 8.0, 80)

        by_gamma = detection_probability(gammas, amplitude_model, 2.0)
        by_eta = np.array([p_d(ObjectState(p1=0.5, p2=0.5, gamma=10.0), amplitude_model, e) for e in etas])

        assert np.all(np.diff(by_gamma) > 0)
        assert np.all(np.diff(by_eta) < 0)

    @pytest.mark.parametrize(("gamma", "eta"), [(0.0, 2.0), (10.0, 2.0), (10.0, 4.0), (3.0, 6.0)])
    def test_cell_outcomes_exhaust_probability(
        self, amplitude_model: AmplitudeModel, gamma: float, eta: float
    ) -> None:
        """
        Test that a miss plus a detection with its truncated density covers every outcome.

        Scenario:
            1 - p_d plus p_d times the integral of f1_eta over (eta, inf)

        Expected:
            1 within 1e-8
        """
        state = ObjectState(p1=0.5, p2=0.5, gamma=gamma)
        mass, _ = integrate.quad(lambda z: f1_eta(z, state, amplitude_model, eta), eta + 1e-12, np.inf)

        total = float(miss_probability(gamma, amplitude_model, eta)) + p_d(state, amplitude_model, eta) * mass

        assert total == pytest.approx(1.0, abs=1e-8)


class TestTruncatedDensitiesIntegration:
    """Truncated object and clutter densities."""

    @pytest.mark.parametrize("gamma", [0.0, 1.0, 10.0])
    def test_f1_eta_integrates_to_one(self, amplitude_model: AmplitudeModel, gamma: float) -> None:
        """
        Test that the truncated density is normalized on (eta, inf).

        Scenario:
            Integrate f1_eta over (2, inf) for several intensities

        Expected:
            1 within 1e-6
        """
        state = ObjectState(p1=0.5, p2=0.5, gamma=gamma)
        value, _ = integrate.quad(
            lambda z: f1_eta(z, state, amplitude_model, 2.0), 2.0 + 1e-12, np.inf
        )

        assert value == pytest.approx(1.0, abs=1e-6)

    def test_f0_eta_reference_value(self, amplitude_model: AmplitudeModel) -> None:
        """Test f0_eta(2.5) at eta = 2 equals 2.5 exp(-1.125)."""
        assert f0_eta(2.5, amplitude_model, 2.0) == pytest.approx(2.5 * np.exp(-1.125), rel=1e-9)
        assert f0_eta(2.5, amplitude_model, 2.0) == pytest.approx(0.8116, abs=1e-4)

    def test_p_d_times_f1_eta_is_f1(self, amplitude_model: AmplitudeModel) -> None:
        state = ObjectState(p1=0.5, p2=0.5, gamma=10.0)
        z = 3.7

        product = p_d(state, amplitude_model, 2.0) * f1_eta(z, state, amplitude_model, 2.0)

        assert product == pytest.approx(float(np.exp(log_f1(z, 10.0, amplitude_model))))

    def test_below_threshold_rejected(self, amplitude_model: AmplitudeModel) -> None:
        """Test that densities at or below the threshold raise a domain error."""
        state = ObjectState(p1=0.5, p2=0.5, gamma=10.0)

        with pytest.raises(MeasurementDomainError):
            f1_eta(2.0, state, amplitude_model, 2.0)
        with pytest.raises(MeasurementDomainError):
            f0_eta(1.5, amplitude_model, 2.0)


class TestFrameSynthesisIntegration:
    """Frame synthesis and thresholding."""

    def test_empty_frame_rayleigh_mean(self, grid: GridGeometry, amplitude_model: AmplitudeModel) -> None:
        """
        Test the mean intensity of an object-free frame.

        Scenario:
            20 frames of 1024 empty cells with sigma_n^2 = 1

        Expected:
            Sample mean close to sqrt(pi / 2)
        """
        values = np.concatenate(
            [synthesize_frame([], grid, amplitude_model, seed).intensities for seed in range(20)]
        )

        assert values.mean() == pytest.approx(np.sqrt(np.pi / 2.0), rel=0.02)

    def test_object_raises_cell_scale(self, small_grid: GridGeometry, amplitude_model: AmplitudeModel) -> None:
        """Test that a bright object lifts the mean intensity of its own cell only."""
        truth = [ObjectState(p1=1.5, p2=2.5, gamma=100.0)]
        target = small_grid.cell_index(2, 1)

        frames = np.stack(
            [synthesize_frame(truth, small_grid, amplitude_model, s).intensities for s in range(200)]
        )

        assert frames[:, target].mean() == pytest.approx(np.sqrt(np.pi / 2.0 * 101.0), rel=0.1)
        others = np.delete(frames, target, axis=1)
        assert others.mean() == pytest.approx(np.sqrt(np.pi / 2.0), rel=0.05)

    def test_cell_scales_add_object_intensities(
        self, small_grid: GridGeometry, amplitude_model: AmplitudeModel
    ) -> None:
        """
        Test the per-cell squared scale.

        Scenario:
            Two objects (gamma 3 and 4) in one cell, one object outside the grid

        Expected:
            That cell at 1 + 3 + 4, every other cell at the noise power
        """
        truth = [
            ObjectState(p1=1.2, p2=2.3, gamma=3.0),
            ObjectState(p1=1.8, p2=2.9, gamma=4.0),
            ObjectState(p1=-1.0, p2=2.5, gamma=50.0),
        ]
        target = small_grid.cell_index(2, 1)

        scale_sq = cell_scale_sq(truth, small_grid, amplitude_model)

        assert scale_sq[target] == pytest.approx(8.0)
        np.testing.assert_array_equal(np.delete(scale_sq, target), 1.0)

    def test_empty_cell_detection_frequency(self, grid: GridGeometry, amplitude_model: AmplitudeModel) -> None:
        """
        Test the empirical false-alarm frequency of empty cells.

        Scenario:
            50 object-free frames of 1024 cells thresholded at eta = 2

        Expected:
            Detection count within four binomial standard deviations of n p_fa
        """
        false_alarm = p_fa(amplitude_model, 2.0)
        n = 50 * grid.n_cells

        count = sum(
            threshold_frame(synthesize_frame([], grid, amplitude_model, seed), 2.0).n_detections
            for seed in range(50)
        )

        assert abs(count - n * false_alarm) <= 4.0 * np.sqrt(n * false_alarm * (1.0 - false_alarm))

    def test_object_cell_detection_frequency(self, amplitude_model: AmplitudeModel) -> None:
        """
        Test the empirical detection frequency of occupied cells.

        Scenario:
            One gamma = 10 object per cell of an 8 x 8 grid, 100 frames at eta = 4

        Expected:
            Detection count within four binomial standard deviations of n p_d
        """
        geometry = GridGeometry(n_rows=8, n_cols=8)
        truth = [ObjectState(p1=x, p2=y, gamma=10.0) for x, y in geometry.cell_centers()]
        detect = p_d(truth[0], amplitude_model, 4.0)
        n = 100 * geometry.n_cells

        count = sum(
            threshold_frame(synthesize_frame(truth, geometry, amplitude_model, seed), 4.0).n_detections
            for seed in range(100)
        )

        assert abs(count - n * detect) <= 4.0 * np.sqrt(n * detect * (1.0 - detect))

    def test_same_seed_same_frame(self, grid: GridGeometry, amplitude_model: AmplitudeModel) -> None:
        a = synthesize_frame([], grid, amplitude_model, 42)
        b = synthesize_frame([], grid, amplitude_model, 42)

        np.testing.assert_array_equal(a.intensities, b.intensities)

    def test_threshold_is_strict(self) -> None:
        """
        Test that thresholding keeps intensities strictly above eta.

        Scenario:
            Intensities 0.5, 2.5 and 2.0 at eta = 2

        Expected:
            One detection, cell 1 with amplitude 2.5
        """
        geometry = GridGeometry(n_rows=1, n_cols=3)
        frame = CellFrame(geometry, np.array([0.5, 2.5, 2.0]))

        detected = threshold_frame(frame, 2.0)

        assert detected.detections == [(1, 2.5)]

    def test_zero_threshold_detects_every_cell(
        self, grid: GridGeometry, amplitude_model: AmplitudeModel
    ) -> None:
        frame = synthesize_frame([], grid, amplitude_model, 0)

        assert threshold_frame(frame, 0.0).n_detections == 1024

    def test_negative_threshold_rejected(self, small_grid: GridGeometry) -> None:
        with pytest.raises(MeasurementDomainError):
            threshold_frame(CellFrame(small_grid, np.ones(16)), -1.0)
