"""
Ground-truth scenario generation and per-step frame synthesis.

Objects are born uniformly on ``[1, birth_window_end]`` and die uniformly on
``[death_window_start + 1, n_steps]`` (or live through the last step when
that window is empty); an object is alive on
``[birth, death)``. Motion is nearly constant velocity with Gaussian noise
added directly to the four kinematic entries; an object leaving the grid
dies at that step. Intensities are constant.

Random streams are split from one master seed by ``(replicate, purpose,
...)`` spawn keys, so every filter and threshold of a replicate sees the
same truth and the same unthresholded cell intensities.
"""

from collections.abc import Iterator
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from cell_tracker.core.errors import ScenarioError
from cell_tracker.core.logging import get_logger
from cell_tracker.filters.measurement import (
    SeedLike,
    as_generator,
    synthesize_frame,
    threshold_frame,
)
from cell_tracker.models.frames import CellFrame, ThresholdedFrame
from cell_tracker.models.params import AmplitudeModel, ScenarioConfig
from cell_tracker.models.state import (
    GAMMA,
    KINEMATICS,
    P1,
    P2,
    POSITION,
    STATE_DIM,
    V1,
    V2,
    GridGeometry,
    ObjectState,
)

logger = get_logger(__name__)


class StreamPurpose(IntEnum):
    SCENARIO = 0
    MEASUREMENT = 1
    FILTER = 2


def derive_seed(
    master_seed: int, replicate: int, purpose: StreamPurpose, *extra: int
) -> np.random.SeedSequence:
    """Child seed for one ``(replicate, purpose, *extra)`` stream of ``master_seed``."""
    return np.random.SeedSequence(master_seed, spawn_key=(replicate, int(purpose), *extra))


@dataclass(frozen=True)
class Trajectory:
    """One object's states for steps ``birth .. death - 1`` (``states`` is ``(death - birth, 5)``)."""

    object_id: int
    birth: int
    death: int
    states: np.ndarray

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=float).reshape(-1, STATE_DIM)
        if states.shape[0] != self.death - self.birth:
            raise ScenarioError(
                "Trajectory length does not match its lifetime",
                object_id=self.object_id,
                birth=self.birth,
                death=self.death,
            )
        object.__setattr__(self, "states", states)

    def alive(self, k: int) -> bool:
        return self.birth <= k < self.death

    def state_at(self, k: int) -> ObjectState:
        if not self.alive(k):
            raise ScenarioError("Object not alive at step", object_id=self.object_id, k=k)
        return ObjectState.from_array(self.states[k - self.birth])


@dataclass(frozen=True)
class GroundTruth:
    geometry: GridGeometry
    n_steps: int
    trajectories: tuple[Trajectory, ...]

    def alive_at(self, k: int) -> list[ObjectState]:
        return [t.state_at(k) for t in self.trajectories if t.alive(k)]

    def positions_at(self, k: int) -> np.ndarray:
        rows = [t.states[k - t.birth, POSITION] for t in self.trajectories if t.alive(k)]
        return np.array(rows, dtype=float).reshape(-1, 2)

    def cardinality(self, k: int) -> int:
        return sum(1 for t in self.trajectories if t.alive(k))

    def rows(self) -> Iterator[tuple[int, int, ObjectState]]:
        """``(object_id, step, state)`` in object then step order."""
        for t in self.trajectories:
            for k in range(t.birth, t.death):
                yield t.object_id, k, t.state_at(k)


def generate(config: ScenarioConfig, seed: SeedLike = None, replicate: int = 0) -> GroundTruth:
    """
    Draw one ground truth.

    Without an explicit ``seed`` the scenario stream of ``replicate`` under
    ``config.master_seed`` is used.
    """
    if seed is None:
        seed = derive_seed(config.master_seed, replicate, StreamPurpose.SCENARIO)
    rng = as_generator(seed)
    geometry = config.roi
    low1, high1, low2, high2 = geometry.bounds
    n = config.n_objects
    births = rng.integers(1, config.birth_window_end + 1, size=n)
    if config.death_window_start < config.n_steps:
        deaths = rng.integers(config.death_window_start + 1, config.n_steps + 1, size=n)
    else:
        # empty death window: alive through the last step
        deaths = np.full(n, config.n_steps + 1)
    noise_std = np.sqrt(config.process_noise_var)

    trajectories = []
    exits = 0
    for i in range(n):
        birth, death = int(births[i]), int(deaths[i])
        x = np.empty(STATE_DIM)
        x[P1] = rng.uniform(low1, high1)
        x[P2] = rng.uniform(low2, high2)
        x[[V1, V2]] = rng.normal(0.0, np.sqrt(config.sigma_v_sq), size=2)
        x[GAMMA] = config.initial_gamma
        states = [x.copy()]
        for k in range(birth + 1, death):
            x[P1] += config.dt * x[V1]
            x[P2] += config.dt * x[V2]
            if noise_std > 0:
                x[KINEMATICS] += rng.normal(0.0, noise_std, size=4)
            if geometry.cells_of(x[None, POSITION])[0] < 0:
                death = k
                exits += 1
                break
            states.append(x.copy())
        trajectories.append(Trajectory(i, birth, death, np.array(states)))

    logger.debug("Generated ground truth", n_objects=n, roi_exits=exits, replicate=replicate)
    return GroundTruth(geometry=geometry, n_steps=config.n_steps, trajectories=tuple(trajectories))


def cell_frame_at(
    truth: GroundTruth, k: int, model: AmplitudeModel, seed: SeedLike
) -> CellFrame:
    """Unthresholded intensities of every cell at step ``k``."""
    if not 1 <= k <= truth.n_steps:
        raise ScenarioError("Step outside the scenario", k=k, n_steps=truth.n_steps)
    return synthesize_frame(truth.alive_at(k), truth.geometry, model, seed)


def frame_at(
    truth: GroundTruth, k: int, model: AmplitudeModel, eta: float, seed: SeedLike
) -> ThresholdedFrame:
    return threshold_frame(cell_frame_at(truth, k, model, seed), eta)
