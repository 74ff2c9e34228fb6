"""
Shared Poisson multi-Bernoulli machinery.

The cell-measurement and point-measurement filters differ only in their
update step; prediction, recycling, estimate extraction, PHD reduction and
the per-step invariant checks live here.
"""

from abc import ABC, abstractmethod
from typing import NamedTuple

import numpy as np

from cell_tracker.core.errors import ConfigurationError, InvariantViolationError
from cell_tracker.core.logging import get_logger
from cell_tracker.filters.association import (
    AssociationProblem,
    MarginalTable,
    bp_marginals,
    exact_marginals,
)
from cell_tracker.filters.particles import propagate, resample, sample_birth
from cell_tracker.models.belief import BernoulliComponent, ParticleSet, PmbBelief
from cell_tracker.models.frames import ThresholdedFrame
from cell_tracker.models.params import AmplitudeModel, AssociationMethod, FilterParams
from cell_tracker.models.state import GridGeometry, ObjectState

logger = get_logger(__name__)

CONSERVATION_TOL = 1e-9


class Estimate(NamedTuple):
    """A reported object: Bernoulli label and posterior mean state."""

    label: str
    state: ObjectState


def predict(
    belief: PmbBelief,
    params: FilterParams,
    geometry: GridGeometry,
    rng: np.random.Generator,
) -> PmbBelief:
    """
    PMB prediction.

    Bernoulli components keep their labels; ``r`` is scaled by ``p_s`` and
    particles move through the motion model. The PHD moves likewise, its
    mass is scaled by ``p_s`` and birth particles of total mass
    ``birth_mass_per_cell * n_cells`` are appended.
    """
    bernoullis = tuple(
        BernoulliComponent(
            r=params.p_s * b.r,
            pdf=ParticleSet(propagate(b.pdf.states, params, rng), b.pdf.weights),
            label=b.label,
        )
        for b in belief.bernoullis
    )
    survived = ParticleSet(
        propagate(belief.phd.states, params, rng), params.p_s * belief.phd.weights
    )
    parts = [survived]
    if params.birth_mass_per_cell > 0:
        parts.append(sample_birth(geometry, params, rng))
    return PmbBelief(phd=ParticleSet.concatenate(parts), bernoullis=bernoullis)


def recycle(belief: PmbBelief, params: FilterParams) -> PmbBelief:
    """Move every Bernoulli with ``r`` below the recycling threshold into the PHD with mass ``r``."""
    kept: list[BernoulliComponent] = []
    moved: list[ParticleSet] = []
    for b in belief.bernoullis:
        if b.r < params.recycle_threshold:
            if b.r > 0:
                moved.append(b.pdf.scaled(b.r))
        else:
            kept.append(b)
    if len(kept) == len(belief.bernoullis):
        return belief
    logger.debug("Recycled Bernoulli components", recycled=len(belief.bernoullis) - len(kept))
    return PmbBelief(phd=ParticleSet.concatenate([belief.phd, *moved]), bernoullis=tuple(kept))


def extract_estimates(belief: PmbBelief, params: FilterParams) -> list[Estimate]:
    """Posterior mean of every Bernoulli whose existence exceeds ``existence_threshold``."""
    return [
        Estimate(b.label, ObjectState.from_array(b.pdf.mean()))
        for b in belief.bernoullis
        if b.r > params.existence_threshold
    ]


def reduce_phd(belief: PmbBelief, params: FilterParams, rng: np.random.Generator) -> PmbBelief:
    """Systematically resample the PHD back to the particle budget, preserving its mass."""
    phd = belief.phd.subset(belief.phd.weights > 0)
    if len(phd) > params.phd_particle_budget:
        phd = resample(phd, params.phd_particle_budget, rng)
    return PmbBelief(phd=phd, bernoullis=belief.bernoullis)


class SnapshotRow(NamedTuple):
    """One Bernoulli component at one time step, for belief snapshot export."""

    k: int
    label: str
    r: float
    state: ObjectState


def snapshot_rows(belief: PmbBelief, k: int) -> list[SnapshotRow]:
    return [
        SnapshotRow(k, b.label, b.r, ObjectState.from_array(b.pdf.mean()))
        for b in belief.bernoullis
        if b.r > 0
    ]


def solve_association(problem: AssociationProblem, params: FilterParams) -> MarginalTable:
    """
    Marginals with the configured method.

    Problems without legacy components or without detections are solved
    in closed form by the message-passing path, which is exact there.
    """
    if (
        params.association is AssociationMethod.EXACT
        and problem.n_legacy > 0
        and problem.n_detections > 0
    ):
        return exact_marginals(problem)
    return bp_marginals(
        problem, tol=params.bp_tol, max_iter=params.bp_max_iter, damping=params.bp_damping
    )


def check_recycling_conservation(before: PmbBelief, after: PmbBelief) -> None:
    expected, got = before.expected_cardinality, after.expected_cardinality
    if abs(expected - got) > CONSERVATION_TOL * max(1.0, expected):
        raise InvariantViolationError(
            "Recycling changed the expected cardinality", before=expected, after=got
        )


def check_belief(belief: PmbBelief) -> None:
    """Existence in [0, 1], normalized pdfs and a finite nonnegative PHD mass."""
    r = belief.existence
    if r.size and (np.any(r < 0) or np.any(r > 1)):
        raise InvariantViolationError("Existence probability outside [0, 1]")
    for b in belief.bernoullis:
        if b.r > 0 and not b.pdf.is_normalized():
            raise InvariantViolationError("Bernoulli pdf not normalized", label=b.label)
    if not np.isfinite(belief.phd.mass) or belief.phd.mass < 0:
        raise InvariantViolationError("Invalid PHD mass", mass=belief.phd.mass)


class PmbFilter(ABC):
    """
    One filter instance owns its belief and its random generator.

    ``step`` runs predict, update, recycling and PHD reduction for one
    thresholded frame and returns the extracted estimates.
    """

    name: str

    def __init__(
        self,
        params: FilterParams,
        geometry: GridGeometry,
        amplitude_model: AmplitudeModel,
        rng: np.random.Generator,
        check_invariants: bool = True,
    ) -> None:
        self.params = params
        self.geometry = geometry
        self.amplitude_model = amplitude_model
        self.rng = rng
        self.check_invariants = check_invariants
        self.belief = PmbBelief()
        self.k = 0

    @abstractmethod
    def update(self, belief: PmbBelief, frame: ThresholdedFrame) -> PmbBelief:
        """Measurement update of a predicted belief (without recycling)."""

    def marginals(self, problem: AssociationProblem) -> MarginalTable:
        marginals = solve_association(problem, self.params)
        if self.check_invariants:
            marginals.check_normalized()
        return marginals

    def step(self, frame: ThresholdedFrame) -> list[Estimate]:
        if frame.eta != self.params.eta:
            raise ConfigurationError(
                "Frame threshold differs from the filter threshold",
                frame_eta=frame.eta,
                filter_eta=self.params.eta,
            )
        self.k += 1
        predicted = predict(self.belief, self.params, self.geometry, self.rng)
        updated = self.update(predicted, frame)
        recycled = recycle(updated, self.params)
        if self.check_invariants:
            check_recycling_conservation(updated, recycled)
        self.belief = reduce_phd(recycled, self.params, self.rng)
        if self.check_invariants:
            check_belief(self.belief)
        logger.debug(
            "Filter step",
            filter=self.name,
            k=self.k,
            detections=frame.n_detections,
            bernoullis=len(self.belief.bernoullis),
            phd_mass=round(self.belief.phd.mass, 6),
        )
        return extract_estimates(self.belief, self.params)
