"""Particle propagation, birth sampling and resampling shared by all PMB filters."""

import numpy as np

from cell_tracker.models.belief import ParticleSet
from cell_tracker.models.params import FilterParams
from cell_tracker.models.state import GAMMA, KINEMATICS, P1, P2, STATE_DIM, V1, V2, GridGeometry


def systematic_resample_indices(weights: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``n`` systematic draws from normalized ``weights``."""
    cumulative = np.cumsum(weights)
    cumulative /= cumulative[-1]
    cumulative[-1] = 1.0  # avoid round-off error
    positions = (rng.random() + np.arange(n)) / n
    return np.searchsorted(cumulative, positions, side="right").clip(0, weights.size - 1)


def resample(particles: ParticleSet, n: int, rng: np.random.Generator) -> ParticleSet:
    """
    Systematic resampling to ``n`` equally weighted particles; total mass is preserved.

    An empty or massless set is returned unchanged.
    """
    mass = particles.mass
    if len(particles) == 0 or mass <= 0:
        return particles
    idx = systematic_resample_indices(particles.weights, n, rng)
    return ParticleSet(particles.states[idx], np.full(n, mass / n))


def resample_if_degenerate(
    particles: ParticleSet, n: int, ess_fraction: float, rng: np.random.Generator
) -> ParticleSet:
    """Resample when the effective sample size falls below ``ess_fraction * n``."""
    if len(particles) != n or particles.effective_sample_size() < ess_fraction * n:
        return resample(particles, n, rng)
    return particles


def propagate(
    states: np.ndarray, params: FilterParams, rng: np.random.Generator
) -> np.ndarray:
    """
    Nearly-constant-velocity transition of ``(N, 5)`` particle states.

    Position advances by ``velocity * dt``; zero-mean Gaussian noise with
    variance ``process_noise_var`` is added to all four kinematic entries.
    The intensity stays constant unless ``gamma_jitter_var`` is positive, in
    which case it is multiplied by a log-normal factor.
    """
    out = states.copy()
    out[:, P1] += params.dt * states[:, V1]
    out[:, P2] += params.dt * states[:, V2]
    n = out.shape[0]
    if params.process_noise_var > 0 and n:
        out[:, KINEMATICS] += rng.normal(0.0, np.sqrt(params.process_noise_var), size=(n, 4))
    if params.gamma_jitter_var > 0 and n:
        out[:, GAMMA] *= np.exp(rng.normal(0.0, np.sqrt(params.gamma_jitter_var), size=n))
    return out


def sample_birth(
    geometry: GridGeometry, params: FilterParams, rng: np.random.Generator
) -> ParticleSet:
    """
    Birth PHD particles: uniform position over the grid, Gaussian velocity, uniform gamma.

    The total weight is ``birth_mass_per_cell * n_cells``.
    """
    n = params.birth_particle_count
    low1, high1, low2, high2 = geometry.bounds
    states = np.empty((n, STATE_DIM))
    states[:, P1] = rng.uniform(low1, high1, size=n)
    states[:, P2] = rng.uniform(low2, high2, size=n)
    states[:, [V1, V2]] = rng.normal(0.0, np.sqrt(params.birth_velocity_var), size=(n, 2))
    states[:, GAMMA] = rng.uniform(0.0, params.birth_gamma_max, size=n)
    mass = params.birth_mass_per_cell * geometry.n_cells
    return ParticleSet(states, np.full(n, mass / n))
