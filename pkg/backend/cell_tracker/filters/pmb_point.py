"""
PMB filters on point measurements (PMB-AM with amplitude information, PMB without).

Detections are converted to ``(z, z1, z2)`` with the position at the cell
center; the cell structure is otherwise discarded. Association weights are
kept in unnormalized form, which gives the same marginals as dividing every
detection column by its clutter intensity and also covers ``mu_fa = 0``:

    nonexist = 1 - r
    miss     = r (1 - mean p_d)
    detect_d = r * sum w p_d g(z1, z2 | x) [f1_eta(z | x)]
    active_d = lambda_FA(y_d) + sum over PHD of w p_d g(z1, z2 | x) [f1_eta(z | x)]

where ``lambda_FA(y) = mu_fa / area [f0_eta(z)]``; bracketed factors are
present only with amplitude information.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom, poisson

from cell_tracker.core.errors import (
    AssociationError,
    ConfigurationError,
    MeasurementDomainError,
)
from cell_tracker.filters.association import AssociationProblem, MarginalTable
from cell_tracker.filters.measurement import detection_probability, log_f0_eta, log_f1_eta
from cell_tracker.filters.particles import resample, resample_if_degenerate
from cell_tracker.filters.pmb import PmbFilter, solve_association
from cell_tracker.models.belief import BernoulliComponent, ParticleSet, PmbBelief
from cell_tracker.models.frames import ThresholdedFrame
from cell_tracker.models.params import (
    AmplitudeModel,
    FilterParams,
    PointMeasurementModel,
    PositionLikelihood,
)
from cell_tracker.models.state import GAMMA, POSITION, GridGeometry, ObjectState, PointMeasurement

PARTICLE_CHUNK = 8192


@dataclass(frozen=True)
class _PointBatch:
    """Measurements as arrays: amplitudes ``(D,)``, positions ``(D, 2)``, cells ``(D,)``."""

    z: np.ndarray
    xy: np.ndarray
    cells: np.ndarray

    @classmethod
    def from_measurements(
        cls, measurements: list[PointMeasurement], geometry: GridGeometry
    ) -> "_PointBatch":
        z = np.array([y.z for y in measurements], dtype=float)
        xy = np.array([[y.z1, y.z2] for y in measurements], dtype=float).reshape(-1, 2)
        return cls(z=z, xy=xy, cells=geometry.cells_of(xy))

    def __len__(self) -> int:
        return int(self.z.size)

    def take(self, d: int) -> "_PointBatch":
        return _PointBatch(self.z[d : d + 1], self.xy[d : d + 1], self.cells[d : d + 1])


def to_point_measurements(frame: ThresholdedFrame) -> list[PointMeasurement]:
    """One measurement per detection at the center of its cell, in detection order."""
    centers = frame.geometry.cell_centers()
    return [
        PointMeasurement(z=float(z), z1=float(centers[m, 0]), z2=float(centers[m, 1]))
        for m, z in zip(frame.cells, frame.amplitudes, strict=True)
    ]


def _log_position_likelihood(
    states: np.ndarray,
    batch: _PointBatch,
    model: PointMeasurementModel,
    geometry: GridGeometry | None,
) -> np.ndarray:
    """``(N, D)`` log position likelihood of every measurement under every particle."""
    if model.position_likelihood is PositionLikelihood.CELL_UNIFORM:
        if geometry is None:
            raise ConfigurationError("Uniform-on-cell position likelihood needs the grid geometry")
        same = geometry.cells_of(states[:, POSITION])[:, None] == batch.cells[None, :]
        return np.where(same, -math.log(geometry.cell_area), -np.inf)
    diff = states[:, None, POSITION] - batch.xy[None, :, :]
    sq = np.einsum("ndk,ndk->nd", diff, diff)
    return -math.log(2.0 * math.pi * model.sigma_p_sq) - sq / (2.0 * model.sigma_p_sq)


def _log_detection_probability(
    states: np.ndarray, amplitude_model: AmplitudeModel, eta: float, geometry: GridGeometry
) -> np.ndarray:
    inside = geometry.cells_of(states[:, POSITION]) >= 0
    pd = detection_probability(states[:, GAMMA], amplitude_model, eta)
    with np.errstate(divide="ignore"):
        return np.where(inside, np.log(pd), -np.inf)


def _detection_point_probability(
    states: np.ndarray, amplitude_model: AmplitudeModel, eta: float, geometry: GridGeometry
) -> np.ndarray:
    """Per-particle detection probability; 0 outside the grid."""
    inside = geometry.cells_of(states[:, POSITION]) >= 0
    return np.where(inside, detection_probability(states[:, GAMMA], amplitude_model, eta), 0.0)


def _log_detection_likelihood(
    states: np.ndarray,
    batch: _PointBatch,
    model: PointMeasurementModel,
    amplitude_model: AmplitudeModel,
    eta: float,
    geometry: GridGeometry,
) -> np.ndarray:
    """``(N, D)`` log of ``p_d(x) g(z1, z2 | x) [f1_eta(z | x)]``."""
    out = _log_position_likelihood(states, batch, model, geometry)
    out += _log_detection_probability(states, amplitude_model, eta, geometry)[:, None]
    if model.amplitude_enabled:
        out += log_f1_eta(batch.z[None, :], states[:, GAMMA][:, None], amplitude_model, eta)
    return out


def _weighted_detection_sums(
    particles: ParticleSet,
    batch: _PointBatch,
    model: PointMeasurementModel,
    amplitude_model: AmplitudeModel,
    eta: float,
    geometry: GridGeometry,
) -> np.ndarray:
    """``(D,)`` sums of ``w p_d g [f1_eta]`` over particles, computed in particle chunks."""
    sums = np.zeros(len(batch))
    for start in range(0, len(particles), PARTICLE_CHUNK):
        stop = start + PARTICLE_CHUNK
        loglik = _log_detection_likelihood(
            particles.states[start:stop], batch, model, amplitude_model, eta, geometry
        )
        sums += particles.weights[start:stop] @ np.exp(loglik)
    return sums


def _log_clutter_intensity(
    batch: _PointBatch, model: PointMeasurementModel, amplitude_model: AmplitudeModel, eta: float
) -> np.ndarray:
    rate = model.mu_fa * model.clutter_spatial_density
    out = np.full(len(batch), math.log(rate) if rate > 0 else -np.inf)
    if model.amplitude_enabled:
        out += log_f0_eta(batch.z, amplitude_model, eta)
    return out


def _check_above_threshold(y: PointMeasurement, eta: float) -> None:
    if y.z <= eta:
        raise MeasurementDomainError("Point measurement amplitude must exceed eta", z=y.z, eta=eta)


def object_likelihood(
    y: PointMeasurement,
    x: ObjectState,
    model: PointMeasurementModel,
    amplitude_model: AmplitudeModel,
    eta: float,
    geometry: GridGeometry | None = None,
) -> float:
    """
    Point-measurement likelihood given a detected object.

    Gaussian position factor (or uniform on the object's cell) times
    ``f1_eta(z | x)`` when amplitude information is enabled.
    """
    _check_above_threshold(y, eta)
    batch = _PointBatch(np.array([y.z]), np.array([[y.z1, y.z2]]), np.array([-1]))
    if geometry is not None:
        batch = _PointBatch.from_measurements([y], geometry)
    states = x.as_array()[None, :]
    loglik = _log_position_likelihood(states, batch, model, geometry)[0, 0]
    if model.amplitude_enabled:
        loglik += float(log_f1_eta(y.z, x.gamma, amplitude_model, eta))
    return float(np.exp(loglik))


def clutter_intensity(
    y: PointMeasurement,
    model: PointMeasurementModel,
    amplitude_model: AmplitudeModel,
    eta: float,
) -> float:
    """``mu_fa`` times the uniform ROI density, times ``f0_eta(z)`` with amplitude information."""
    _check_above_threshold(y, eta)
    batch = _PointBatch(np.array([y.z]), np.array([[y.z1, y.z2]]), np.array([-1]))
    return float(np.exp(_log_clutter_intensity(batch, model, amplitude_model, eta)[0]))


def clutter_cardinality_pmf(n: int, model: PointMeasurementModel) -> float:
    """Poisson clutter-count pmf with rate ``mu_fa``."""
    if n < 0:
        raise MeasurementDomainError("Clutter count must be nonnegative", n=n)
    return float(poisson.pmf(n, model.mu_fa))


def binomial_clutter_cardinality_pmf(n: int, n_cells: int, false_alarm: float) -> float:
    """Exact clutter-count pmf: every one of ``n_cells`` empty cells fires independently."""
    if n < 0:
        raise MeasurementDomainError("Clutter count must be nonnegative", n=n)
    return float(binom.pmf(n, n_cells, false_alarm))


def poisson_approximation_tv(n_cells: int, false_alarm: float) -> float:
    """Total-variation distance between the binomial clutter count and its Poisson approximation."""
    support = np.arange(0, int(10 * n_cells * false_alarm) + n_cells + 50)
    exact = binom.pmf(support, n_cells, false_alarm)
    approx = poisson.pmf(support, n_cells * false_alarm)
    tail = max(0.0, 1.0 - approx.sum())
    return float(0.5 * (np.abs(exact - approx).sum() + tail))


def association_prior_count(n_objects: int, n_detected: int) -> int:
    """Number of ordered ways to draw ``n_detected`` of ``n_objects``: ``M! / (M - D)!``."""
    if not 0 <= n_detected <= n_objects:
        raise MeasurementDomainError(
            "Need 0 <= detected <= objects", n_objects=n_objects, n_detected=n_detected
        )
    return math.perm(n_objects, n_detected)


def point_update(
    belief: PmbBelief,
    measurements: list[PointMeasurement],
    model: PointMeasurementModel,
    amplitude_model: AmplitudeModel,
    params: FilterParams,
    *,
    geometry: GridGeometry,
    rng: np.random.Generator,
    k: int,
    solve: Callable[[AssociationProblem], MarginalTable] | None = None,
) -> PmbBelief:
    """
    Point-measurement PMB update followed by the multi-Bernoulli approximation.

    ``solve`` maps an ``AssociationProblem`` to its marginals; it defaults to
    the method configured in ``params``.
    """
    eta = params.eta
    for y in measurements:
        _check_above_threshold(y, eta)
    batch = _PointBatch.from_measurements(measurements, geometry)
    n_det = len(batch)

    n_legacy = len(belief.bernoullis)
    nonexist = np.empty(n_legacy)
    miss = np.empty(n_legacy)
    detect = np.zeros((n_legacy, n_det))
    legacy_terms: list[tuple[np.ndarray, np.ndarray]] = []
    for j, b in enumerate(belief.bernoullis):
        pd = _detection_point_probability(b.pdf.states, amplitude_model, eta, geometry)
        lik = b.pdf.weights[:, None] * np.exp(
            _log_detection_likelihood(b.pdf.states, batch, model, amplitude_model, eta, geometry)
        )
        legacy_terms.append((b.pdf.weights * (1.0 - pd), lik))
        nonexist[j] = 1.0 - b.r
        miss[j] = b.r * float(b.pdf.weights @ (1.0 - pd))
        detect[j] = b.r * lik.sum(axis=0)

    d_sums = _weighted_detection_sums(belief.phd, batch, model, amplitude_model, eta, geometry)
    clutter = np.exp(_log_clutter_intensity(batch, model, amplitude_model, eta))
    problem = AssociationProblem(
        nonexist=nonexist, miss=miss, detect=detect, new_active=clutter + d_sums
    )
    marginals = solve(problem) if solve is not None else solve_association(problem, params)
    if not marginals.matches(problem):
        raise AssociationError("Marginals do not match the association problem")

    existence = marginals.existence()
    bernoullis: list[BernoulliComponent] = []
    for j, b in enumerate(belief.bernoullis):
        miss_w, lik = legacy_terms[j]
        weights = np.zeros(len(b.pdf))
        if miss_w.sum() > 0:
            weights += marginals.miss[j] * miss_w / miss_w.sum()
        col = lik.sum(axis=0)
        nz = col > 0
        if np.any(nz):
            weights += lik[:, nz] @ (marginals.detect[j, nz] / col[nz])
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

    for d in np.flatnonzero(d_sums > 0):
        r = float(marginals.new_active[d] * d_sums[d] / (clutter[d] + d_sums[d]))
        if r <= 0:
            continue
        loglik = _log_detection_likelihood(
            belief.phd.states, batch.take(int(d)), model, amplitude_model, eta, geometry
        )[:, 0]
        pdf = ParticleSet(belief.phd.states, belief.phd.weights * np.exp(loglik))
        if pdf.mass <= 0:
            continue
        label_cell = int(batch.cells[d]) if batch.cells[d] >= 0 else int(d)
        bernoullis.append(
            BernoulliComponent(
                r=r,
                pdf=resample(pdf.normalized(), params.particles_per_bernoulli, rng),
                label=f"{k}:{label_cell}",
            )
        )

    pd_phd = _detection_point_probability(belief.phd.states, amplitude_model, eta, geometry)
    phd = belief.phd.reweighted(1.0 - pd_phd)
    return PmbBelief(phd=phd, bernoullis=tuple(bernoullis))


class PmbPointFilter(PmbFilter):
    """
    PMB filter on point measurements.

    With ``amplitude_enabled`` the measurement carries its amplitude (PMB-AM);
    otherwise only the cell-center position is used (PMB).
    """

    name = "pmb_point"

    def __init__(
        self,
        params: FilterParams,
        geometry: GridGeometry,
        amplitude_model: AmplitudeModel,
        rng: np.random.Generator,
        point_model: PointMeasurementModel,
        check_invariants: bool = True,
    ) -> None:
        if params.eta <= 0:
            raise ConfigurationError(
                "Point-measurement filters need a positive threshold "
                "(their eta = 0 cells of the detection-count and runtime table are blank)",
                eta=params.eta,
            )
        super().__init__(params, geometry, amplitude_model, rng, check_invariants)
        self.point_model = point_model
        self.name = "pmb_am" if point_model.amplitude_enabled else "pmb"

    def update(self, belief: PmbBelief, frame: ThresholdedFrame) -> PmbBelief:
        return point_update(
            belief,
            to_point_measurements(frame),
            self.point_model,
            self.amplitude_model,
            self.params,
            geometry=self.geometry,
            rng=self.rng,
            k=self.k,
            solve=self.marginals,
        )
