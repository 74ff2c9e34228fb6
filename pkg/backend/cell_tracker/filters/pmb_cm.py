"""
PMB filter for thresholded cell measurements (PMB-CM).

Every cell is observed in every frame: a detected cell carries its
amplitude, a missed cell carries the event ``z <= eta``. Legacy Bernoulli
components are associated with detected cells only; all missed-cell
hypotheses of a component are aggregated into one miss weight.

Per legacy component j with existence r and particles (x_i, w_i):
    nonexist = 1 - r
    miss     = r * sum over particles in missed cells of w (1 - p_d(x)) / (1 - p_fa)
    detect_d = r * sum over particles in detected cell d of w f1(z_d | x)

Per detected cell with PHD particles in it:
    d      = sum w f1(z_d | x)
    active = f0(z_d) + d,  r_new = d / (f0(z_d) + d)

``f1 = p_d f1_eta`` and ``f0 = p_fa f0_eta``, so the untruncated densities
are used directly.
"""

from dataclasses import dataclass

import numpy as np

from cell_tracker.core.errors import AssociationError
from cell_tracker.filters.association import AssociationProblem, MarginalTable
from cell_tracker.filters.measurement import log_f0, log_f1, miss_probability, p_fa
from cell_tracker.filters.particles import resample, resample_if_degenerate
from cell_tracker.filters.pmb import PmbFilter
from cell_tracker.models.belief import BernoulliComponent, ParticleSet, PmbBelief
from cell_tracker.models.frames import ThresholdedFrame
from cell_tracker.models.params import AmplitudeModel, FilterParams
from cell_tracker.models.state import GAMMA, POSITION


@dataclass(frozen=True)
class _CellTerms:
    """
    Per-particle hypothesis weights of one particle set.

    Attributes:
        cells: cell of each particle, ``-1`` outside the grid
        miss: ``w (1 - p_d) / (1 - p_fa)`` in missed cells, else 0
        detection: index into the frame's detections, ``-1`` if not in a detected cell
        detect: ``w f1(z | x)`` in detected cells, else 0
    """

    cells: np.ndarray
    miss: np.ndarray
    detection: np.ndarray
    detect: np.ndarray

    def detect_sums(self, n_detections: int) -> np.ndarray:
        hit = self.detection >= 0
        return np.bincount(
            self.detection[hit], weights=self.detect[hit], minlength=n_detections
        )


def _cell_terms(
    particles: ParticleSet, frame: ThresholdedFrame, model: AmplitudeModel
) -> _CellTerms:
    geometry = frame.geometry
    n = len(particles)
    cells = geometry.cells_of(particles.states[:, POSITION])
    inside = cells >= 0
    lookup = frame.detection_lookup()
    detection = np.full(n, -1, dtype=np.int64)
    detection[inside] = lookup[cells[inside]]
    missed = inside & (detection < 0)
    hit = detection >= 0
    gamma = particles.states[:, GAMMA]

    false_alarm = p_fa(model, frame.eta)
    miss = np.zeros(n)
    if false_alarm < 1.0:
        miss[missed] = (
            particles.weights[missed]
            * miss_probability(gamma[missed], model, frame.eta)
            / (1.0 - false_alarm)
        )
    detect = np.zeros(n)
    if np.any(hit):
        z = frame.amplitudes[detection[hit]]
        detect[hit] = particles.weights[hit] * np.exp(log_f1(z, gamma[hit], model))
    return _CellTerms(cells=cells, miss=miss, detection=detection, detect=detect)


def phd_miss_update(
    phd: ParticleSet, frame: ThresholdedFrame, model: AmplitudeModel, params: FilterParams
) -> ParticleSet:
    """
    Undetected-object PHD update.

    Weights in missed cells are multiplied by ``(1 - p_d) / (1 - p_fa)``,
    weights in detected cells become 0 and weights outside the grid are kept.
    """
    terms = _cell_terms(phd, frame, model)
    weights = np.where(terms.cells < 0, phd.weights, terms.miss)
    return ParticleSet(phd.states, weights)


def build_association_problem(
    belief: PmbBelief, frame: ThresholdedFrame, model: AmplitudeModel, params: FilterParams
) -> AssociationProblem:
    n_det = frame.n_detections
    n_legacy = len(belief.bernoullis)
    nonexist = np.empty(n_legacy)
    miss = np.empty(n_legacy)
    detect = np.zeros((n_legacy, n_det))
    for j, b in enumerate(belief.bernoullis):
        terms = _cell_terms(b.pdf, frame, model)
        nonexist[j] = 1.0 - b.r
        miss[j] = b.r * terms.miss.sum()
        detect[j] = b.r * terms.detect_sums(n_det)
        if nonexist[j] + miss[j] + detect[j].sum() <= 0.0:
            # certain object whose particles all left the grid
            nonexist[j] = 1.0

    phd_terms = _cell_terms(belief.phd, frame, model)
    clutter = np.exp(log_f0(frame.amplitudes, model))
    new_active = clutter + phd_terms.detect_sums(n_det)
    return AssociationProblem(nonexist=nonexist, miss=miss, detect=detect, new_active=new_active)


def missed_cell_weights(
    belief: PmbBelief, frame: ThresholdedFrame, model: AmplitudeModel
) -> list[dict[int, float]]:
    """Per legacy component, the miss weight of every occupied missed cell; they sum to ``miss``."""
    out: list[dict[int, float]] = []
    for b in belief.bernoullis:
        terms = _cell_terms(b.pdf, frame, model)
        occupied = terms.miss > 0
        sums = np.bincount(
            terms.cells[occupied],
            weights=terms.miss[occupied],
            minlength=frame.geometry.n_cells,
        )
        out.append({int(m): float(b.r * sums[m]) for m in np.flatnonzero(sums)})
    return out


def _legacy_posterior(
    b: BernoulliComponent,
    j: int,
    terms: _CellTerms,
    marginals: MarginalTable,
    n_det: int,
) -> np.ndarray:
    """Marginal-weighted mixture of the miss and per-detection reweightings."""
    weights = np.zeros(len(b.pdf))
    miss_total = terms.miss.sum()
    if miss_total > 0:
        weights += marginals.miss[j] * terms.miss / miss_total
    sums = terms.detect_sums(n_det)
    hit = (terms.detection >= 0) & (terms.detect > 0)
    if np.any(hit):
        d = terms.detection[hit]
        weights[hit] += marginals.detect[j, d] * terms.detect[hit] / sums[d]
    return weights


def mb_update(
    belief: PmbBelief,
    frame: ThresholdedFrame,
    marginals: MarginalTable,
    problem: AssociationProblem,
    *,
    model: AmplitudeModel,
    params: FilterParams,
    rng: np.random.Generator,
    k: int,
) -> PmbBelief:
    """
    Multi-Bernoulli approximation of the posterior.

    Legacy components keep their labels with existence equal to their
    marginal existence; one new component labeled ``"<k>:<cell>"`` is
    created for every detected cell with PHD support.

    Raises:
        AssociationError: if ``marginals`` does not match ``problem``
    """
    if not marginals.matches(problem) or problem.n_legacy != len(belief.bernoullis):
        raise AssociationError(
            "Marginals do not match the association problem",
            n_legacy=problem.n_legacy,
            n_detections=problem.n_detections,
        )
    n_det = frame.n_detections
    existence = marginals.existence()
    bernoullis: list[BernoulliComponent] = []
    for j, b in enumerate(belief.bernoullis):
        terms = _cell_terms(b.pdf, frame, model)
        weights = _legacy_posterior(b, j, terms, marginals, n_det)
        total = weights.sum()
        if existence[j] <= 0 or total <= 0:
            continue
        pdf = resample_if_degenerate(
            ParticleSet(b.pdf.states, weights / total),
            params.particles_per_bernoulli,
            params.resample_ess_fraction,
            rng,
        )
        bernoullis.append(BernoulliComponent(r=float(existence[j]), pdf=pdf, label=b.label))

    phd_terms = _cell_terms(belief.phd, frame, model)
    d_sums = phd_terms.detect_sums(n_det)
    clutter = np.exp(log_f0(frame.amplitudes, model))
    for d in np.flatnonzero(d_sums > 0):
        r = float(marginals.new_active[d] * d_sums[d] / (clutter[d] + d_sums[d]))
        if r <= 0:
            continue
        in_cell = phd_terms.detection == d
        pdf = ParticleSet(belief.phd.states[in_cell], phd_terms.detect[in_cell]).normalized()
        bernoullis.append(
            BernoulliComponent(
                r=r,
                pdf=resample(pdf, params.particles_per_bernoulli, rng),
                label=f"{k}:{int(frame.cells[d])}",
            )
        )

    phd = phd_miss_update(belief.phd, frame, model, params)
    return PmbBelief(phd=phd, bernoullis=tuple(bernoullis))


class PmbCmFilter(PmbFilter):
    """PMB filter on thresholded cell measurements."""

    name = "pmb_cm"

    def update(self, belief: PmbBelief, frame: ThresholdedFrame) -> PmbBelief:
        problem = build_association_problem(belief, frame, self.amplitude_model, self.params)
        marginals = self.marginals(problem)
        return mb_update(
            belief,
            frame,
            marginals,
            problem,
            model=self.amplitude_model,
            params=self.params,
            rng=self.rng,
            k=self.k,
        )
