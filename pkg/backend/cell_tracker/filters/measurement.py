"""
Rayleigh (Swerling 1) cell model, thresholding and per-cell likelihood terms.

An empty cell has Rayleigh intensity with scale^2 = sigma_n^2; a cell holding
objects has scale^2 = sigma_n^2 + sum of their gammas. Detection and false
alarm probabilities are the Rayleigh tails above ``eta``:

    p_fa = exp(-eta^2 / (2 sigma_n^2))
    p_d(x) = exp(-eta^2 / (2 (gamma + sigma_n^2)))

The truncated densities ``f1_eta = f1 / p_d`` and ``f0_eta = f0 / p_fa``
are evaluated in log-domain; note ``p_d * f1_eta == f1``, which the filters
use directly.
"""

from collections.abc import Sequence

import numpy as np

from cell_tracker.core.errors import MeasurementDomainError
from cell_tracker.models.frames import CellFrame, ThresholdedFrame
from cell_tracker.models.params import AmplitudeModel
from cell_tracker.models.state import GridGeometry, ObjectState

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def synthesize_frame(
    truth: Sequence[ObjectState],
    geometry: GridGeometry,
    model: AmplitudeModel,
    rng_seed: SeedLike,
) -> CellFrame:
    """
    Draw one Rayleigh intensity per cell.

    Objects sharing a cell add their intensities; objects outside the grid
    contribute nothing.
    """
    rng = as_generator(rng_seed)
    scale_sq = cell_scale_sq(truth, geometry, model)
    return CellFrame(geometry, rng.rayleigh(scale=np.sqrt(scale_sq)))


def cell_scale_sq(
    truth: Sequence[ObjectState], geometry: GridGeometry, model: AmplitudeModel
) -> np.ndarray:
    """Squared Rayleigh scale of every cell: noise power plus the intensities of the objects inside."""
    scale_sq = np.full(geometry.n_cells, model.sigma_n_sq)
    if truth:
        positions = np.array([[s.p1, s.p2] for s in truth])
        gammas = np.array([s.gamma for s in truth])
        cells = geometry.cells_of(positions)
        inside = cells >= 0
        scale_sq += np.bincount(cells[inside], weights=gammas[inside], minlength=geometry.n_cells)
    return scale_sq


def threshold_frame(frame: CellFrame, eta: float) -> ThresholdedFrame:
    """Keep the cells whose intensity strictly exceeds ``eta``, amplitudes copied unchanged."""
    if eta < 0:
        raise MeasurementDomainError("Threshold must be nonnegative", eta=eta)
    cells = np.flatnonzero(frame.intensities > eta)
    return ThresholdedFrame(
        geometry=frame.geometry, eta=eta, cells=cells, amplitudes=frame.intensities[cells]
    )


def _object_scale_sq(gamma: np.ndarray | float, model: AmplitudeModel) -> np.ndarray:
    return np.asarray(gamma, dtype=float) + model.sigma_n_sq


def p_fa(model: AmplitudeModel, eta: float) -> float:
    """False-alarm probability of one empty cell."""
    return float(np.exp(-(eta * eta) / (2.0 * model.sigma_n_sq)))


def detection_probability(
    gamma: np.ndarray | float, model: AmplitudeModel, eta: float
) -> np.ndarray:
    """Vectorized detection probability over an array of intensities."""
    return np.exp(-(eta * eta) / (2.0 * _object_scale_sq(gamma, model)))


def miss_probability(gamma: np.ndarray | float, model: AmplitudeModel, eta: float) -> np.ndarray:
    """``1 - p_d`` without cancellation for small ``eta``."""
    return -np.expm1(-(eta * eta) / (2.0 * _object_scale_sq(gamma, model)))


def p_d(state: ObjectState, model: AmplitudeModel, eta: float) -> float:
    """Detection probability of an object in its cell."""
    return float(detection_probability(state.gamma, model, eta))


def log_f1(z: np.ndarray | float, gamma: np.ndarray | float, model: AmplitudeModel) -> np.ndarray:
    """Untruncated object-cell Rayleigh log-density ``log f1(z | gamma)``; broadcasts."""
    z = np.asarray(z, dtype=float)
    s2 = _object_scale_sq(gamma, model)
    with np.errstate(divide="ignore"):
        return np.log(z) - np.log(s2) - (z * z) / (2.0 * s2)


def log_f0(z: np.ndarray | float, model: AmplitudeModel) -> np.ndarray:
    """Untruncated clutter Rayleigh log-density ``log f0(z)``."""
    return log_f1(z, 0.0, model)


def log_f1_eta(
    z: np.ndarray | float, gamma: np.ndarray | float, model: AmplitudeModel, eta: float
) -> np.ndarray:
    """Log of the object-cell density truncated to ``(eta, inf)`` and renormalized."""
    z = np.asarray(z, dtype=float)
    s2 = _object_scale_sq(gamma, model)
    with np.errstate(divide="ignore"):
        return np.log(z) - np.log(s2) - (z * z - eta * eta) / (2.0 * s2)


def log_f0_eta(z: np.ndarray | float, model: AmplitudeModel, eta: float) -> np.ndarray:
    return log_f1_eta(z, 0.0, model, eta)


def f1_eta(z: float, state: ObjectState, model: AmplitudeModel, eta: float) -> float:
    """Truncated object-cell density at ``z > eta``."""
    if z <= eta:
        raise MeasurementDomainError("Density defined only above the threshold", z=z, eta=eta)
    return float(np.exp(log_f1_eta(z, state.gamma, model, eta)))


def f0_eta(z: float, model: AmplitudeModel, eta: float) -> float:
    """Truncated clutter density at ``z > eta``."""
    if z <= eta:
        raise MeasurementDomainError("Density defined only above the threshold", z=z, eta=eta)
    return float(np.exp(log_f0_eta(z, model, eta)))
