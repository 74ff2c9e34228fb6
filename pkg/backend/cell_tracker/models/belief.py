"""
Particle sets, Bernoulli components and PMB beliefs.

A ``ParticleSet`` is used both for normalized Bernoulli spatial pdfs and
for the unnormalized PHD of undetected objects, whose total weight is the
expected number of undetected objects.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from cell_tracker.core.errors import InvariantViolationError
from cell_tracker.models.state import STATE_DIM, ObjectState

NORMALIZATION_TOL = 1e-9
WEIGHT_FLOOR = 1e-300
EXISTENCE_TOL = 1e-12


def _empty_states() -> np.ndarray:
    return np.zeros((0, STATE_DIM))


@dataclass(frozen=True)
class ParticleSet:
    """Weighted particles: ``states`` is ``(N, 5)``, ``weights`` is ``(N,)``."""

    states: np.ndarray = field(default_factory=_empty_states)
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=float).reshape(-1, STATE_DIM)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if states.shape[0] != weights.shape[0]:
            raise InvariantViolationError(
                "Particle states and weights differ in length",
                n_states=states.shape[0],
                n_weights=weights.shape[0],
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvariantViolationError("Particle weights must be finite and nonnegative")
        # denormals slow everything down and carry no probability mass
        weights = np.where(weights < WEIGHT_FLOOR, 0.0, weights)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return int(self.weights.size)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> "ParticleSet":
        total = self.mass
        if total <= 0:
            raise InvariantViolationError("Cannot normalize a particle set with zero mass")
        return ParticleSet(self.states, self.weights / total)

    def scaled(self, factor: float) -> "ParticleSet":
        return ParticleSet(self.states, self.weights * factor)

    def reweighted(self, factors: np.ndarray) -> "ParticleSet":
        return ParticleSet(self.states, self.weights * factors)

    def subset(self, mask: np.ndarray) -> "ParticleSet":
        return ParticleSet(self.states[mask], self.weights[mask])

    def mean(self) -> np.ndarray:
        total = self.mass
        if total <= 0:
            raise InvariantViolationError("Mean of a particle set with zero mass")
        return np.asarray(self.weights @ self.states / total)

    def effective_sample_size(self) -> float:
        total = self.mass
        if total <= 0:
            return 0.0
        w = self.weights / total
        return float(1.0 / np.sum(w * w))

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return abs(self.mass - 1.0) <= tol

    @staticmethod
    def concatenate(parts: Sequence["ParticleSet"]) -> "ParticleSet":
        if not parts:
            return ParticleSet()
        return ParticleSet(
            np.concatenate([p.states for p in parts]),
            np.concatenate([p.weights for p in parts]),
        )

    @classmethod
    def point_mass(cls, state: ObjectState, n: int = 1) -> "ParticleSet":
        return cls(np.tile(state.as_array(), (n, 1)), np.full(n, 1.0 / n))


@dataclass(frozen=True)
class BernoulliComponent:
    """
    Object hypothesis with existence probability ``r`` and spatial pdf ``pdf``.

    ``label`` is reporting plumbing (``"<frame>:<cell>"`` at birth) and never
    influences inference.
    """

    r: float
    pdf: ParticleSet
    label: str

    def __post_init__(self) -> None:
        if not (-EXISTENCE_TOL <= self.r <= 1.0 + EXISTENCE_TOL) or not np.isfinite(self.r):
            raise InvariantViolationError(
                "Existence probability outside [0, 1]", r=self.r, label=self.label
            )
        object.__setattr__(self, "r", float(min(max(self.r, 0.0), 1.0)))
        if self.r > 0 and not self.pdf.is_normalized():
            raise InvariantViolationError(
                "Bernoulli pdf not normalized", label=self.label, mass=self.pdf.mass
            )


@dataclass(frozen=True)
class PmbBelief:
    """Poisson (PHD particles) plus multi-Bernoulli belief."""

    phd: ParticleSet = field(default_factory=ParticleSet)
    bernoullis: tuple[BernoulliComponent, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "bernoullis", tuple(self.bernoullis))
        labels = [b.label for b in self.bernoullis]
        if len(set(labels)) != len(labels):
            raise InvariantViolationError("Bernoulli labels must be unique")

    @property
    def expected_cardinality(self) -> float:
        """PHD mass plus the sum of existence probabilities."""
        return self.phd.mass + sum(b.r for b in self.bernoullis)

    @property
    def existence(self) -> np.ndarray:
        return np.array([b.r for b in self.bernoullis], dtype=float)
