"""
Monte-Carlo experiment harness.

Runs every (filter, threshold) cell of an experiment over ``n_runs``
replicates and reduces per-step GOSPA, cardinality, detection counts and
filter runtimes into ``curves.csv`` and ``summary.csv``.

Within a replicate every filter and threshold sees the same ground truth
and the same unthresholded cell intensities. Replicates run on a thread
pool; results are reduced in replicate order, so the report does not
depend on the number of workers.
"""

import time
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from cell_tracker.config.experiment import CliConfig, MeasurementSection
from cell_tracker.config.settings import Settings, get_settings
from cell_tracker.core.errors import ConfigurationError
from cell_tracker.core.logging import get_logger
from cell_tracker.core.serialization import CURVE_COLUMNS, SUMMARY_COLUMNS, write_rows
from cell_tracker.evaluation.gospa import gospa
from cell_tracker.filters.measurement import threshold_frame
from cell_tracker.filters.pmb import Estimate
from cell_tracker.models.belief import PmbBelief
from cell_tracker.models.frames import CellFrame, ThresholdedFrame
from cell_tracker.models.params import FilterKind, FilterParams, ScenarioConfig
from cell_tracker.services.filter_factory import create_filter
from cell_tracker.simulation.scenario import (
    GroundTruth,
    StreamPurpose,
    cell_frame_at,
    derive_seed,
    generate,
)

logger = get_logger(__name__)

GOSPA_TERMS = 4  # total, localization, missed, false


class ExperimentSpec(BaseModel):
    """One experiment: filters x thresholds x replicates on one scenario."""

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    measurement: MeasurementSection = Field(default_factory=MeasurementSection)
    filters: list[FilterKind] = Field(default_factory=lambda: [FilterKind.PMB_CM], min_length=1)
    etas: list[float] = Field(default_factory=lambda: [2.0], min_length=1)
    filter_params: dict[FilterKind, FilterParams] = Field(default_factory=dict)
    n_runs: int = Field(default=1, ge=1)
    master_seed: int = Field(default=0, ge=0)
    out_dir: str | None = None
    gospa_p: float = Field(default=1.0, ge=1.0)
    gospa_c: float = Field(default=20.0, gt=0.0)
    gospa_beta: float = Field(default=2.0, gt=0.0)
    record_timing: bool = True

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _validate_grid(self) -> "ExperimentSpec":
        if any(eta < 0 for eta in self.etas):
            raise ValueError("thresholds must be nonnegative")
        point = [k.value for k in self.filters if k.uses_point_measurements]
        if point and 0.0 in self.etas:
            raise ValueError(
                f"point-measurement filters {point} are undefined at eta = 0: "
                "every cell exceeds the threshold, so no detection carries information "
                "(their eta = 0 cells of the detection-count and runtime table are blank)"
            )
        return self

    @classmethod
    def from_config(
        cls,
        config: CliConfig,
        *,
        filters: list[FilterKind] | None = None,
        etas: list[float] | None = None,
        n_runs: int | None = None,
        master_seed: int | None = None,
        out_dir: str | None = None,
        full_scale: bool = False,
        record_timing: bool = True,
    ) -> "ExperimentSpec":
        """
        Build an experiment from a configuration file plus command-line overrides.

        Raises:
            ConfigurationError: if the resulting experiment is invalid
        """
        harness = config.harness
        if full_scale:
            harness = harness.model_copy(update={"full_scale": True})
        try:
            return cls(
                scenario=config.scenario,
                measurement=config.measurement,
                filters=filters if filters is not None else harness.filters,
                etas=etas if etas is not None else harness.etas,
                filter_params=dict(config.filters),
                n_runs=n_runs if n_runs is not None else harness.effective_runs,
                master_seed=master_seed if master_seed is not None else harness.master_seed,
                out_dir=out_dir if out_dir is not None else harness.out_dir,
                gospa_p=harness.gospa_p,
                gospa_c=harness.gospa_c,
                gospa_beta=harness.gospa_beta,
                record_timing=record_timing,
            )
        except ValidationError as exc:
            messages = "; ".join(err["msg"] for err in exc.errors())
            raise ConfigurationError(f"Invalid experiment: {messages}") from exc

    @property
    def cells(self) -> list[tuple[FilterKind, float]]:
        return [(kind, eta) for kind in self.filters for eta in self.etas]

    def params_for(self, kind: FilterKind, eta: float) -> FilterParams:
        base = self.filter_params.get(kind, FilterParams())
        return base.model_copy(update={"eta": eta, "dt": self.scenario.dt})

    def filter_seed(self, replicate: int, kind: FilterKind, eta: float) -> np.random.SeedSequence:
        """Filter stream keyed by replicate, filter kind and threshold position."""
        kind_index = list(FilterKind).index(kind)
        return derive_seed(
            self.master_seed, replicate, StreamPurpose.FILTER, kind_index, self.etas.index(eta)
        )


@dataclass(frozen=True)
class StepResult:
    """Output of one filter step."""

    k: int
    frame: ThresholdedFrame
    estimates: list[Estimate]
    belief: PmbBelief
    runtime_s: float


@dataclass
class CellTrace:
    """Per-step results of one filter at one threshold in one replicate."""

    gospa: np.ndarray
    card_est: np.ndarray
    detections: np.ndarray
    runtime_s: float = 0.0


@dataclass
class ReplicateResult:
    replicate: int
    card_true: np.ndarray
    traces: dict[tuple[FilterKind, float], CellTrace] = field(default_factory=dict)


def replicate_truth(spec: ExperimentSpec, replicate: int) -> GroundTruth:
    return generate(
        spec.scenario,
        seed=derive_seed(spec.master_seed, replicate, StreamPurpose.SCENARIO),
        replicate=replicate,
    )


def cell_frames(spec: ExperimentSpec, truth: GroundTruth, replicate: int) -> list[CellFrame]:
    """Unthresholded frames for steps ``1 .. n_steps``, shared by every filter."""
    model = spec.measurement.amplitude_model
    return [
        cell_frame_at(
            truth, k, model, derive_seed(spec.master_seed, replicate, StreamPurpose.MEASUREMENT, k)
        )
        for k in range(1, spec.scenario.n_steps + 1)
    ]


def filter_steps(
    spec: ExperimentSpec,
    kind: FilterKind,
    eta: float,
    replicate: int,
    frames: list[CellFrame],
    settings: Settings | None = None,
) -> Iterator[StepResult]:
    """Run one filter over a replicate's frames, yielding after every step."""
    settings = settings if settings is not None else get_settings()
    params = spec.params_for(kind, eta)
    filt = create_filter(
        kind,
        params,
        spec.scenario.roi,
        spec.measurement,
        np.random.default_rng(spec.filter_seed(replicate, kind, eta)),
        check_invariants=settings.CHECK_INVARIANTS,
    )
    for k, cell_frame in enumerate(frames, start=1):
        frame = threshold_frame(cell_frame, eta)
        start = time.perf_counter()
        estimates = filt.step(frame)
        elapsed = time.perf_counter() - start
        yield StepResult(
            k=k,
            frame=frame,
            estimates=estimates,
            belief=filt.belief,
            runtime_s=elapsed if spec.record_timing else 0.0,
        )


def run_replicate(
    spec: ExperimentSpec, replicate: int, settings: Settings | None = None
) -> ReplicateResult:
    """Every (filter, threshold) cell on one replicate's truth and frames."""
    truth = replicate_truth(spec, replicate)
    frames = cell_frames(spec, truth, replicate)
    n_steps = spec.scenario.n_steps
    result = ReplicateResult(
        replicate=replicate,
        card_true=np.array([truth.cardinality(k) for k in range(1, n_steps + 1)], dtype=float),
    )
    for kind, eta in spec.cells:
        trace = CellTrace(
            gospa=np.zeros((n_steps, GOSPA_TERMS)),
            card_est=np.zeros(n_steps),
            detections=np.zeros(n_steps),
        )
        for step in filter_steps(spec, kind, eta, replicate, frames, settings):
            estimated = [(e.state.p1, e.state.p2) for e in step.estimates]
            score = gospa(
                truth.positions_at(step.k),
                estimated,
                p=spec.gospa_p,
                c=spec.gospa_c,
                beta=spec.gospa_beta,
            )
            trace.gospa[step.k - 1] = (score.total, score.localization, score.missed, score.false_)
            trace.card_est[step.k - 1] = len(step.estimates)
            trace.detections[step.k - 1] = step.frame.n_detections
            trace.runtime_s += step.runtime_s
        result.traces[(kind, eta)] = trace
    logger.info(
        "Replicate finished",
        replicate=replicate,
        runtime_s={f"{k.value}@{e}": round(t.runtime_s, 3) for (k, e), t in result.traces.items()},
    )
    return result


@dataclass(frozen=True)
class CellSummary:
    """Replicate means for one (filter, threshold) cell."""

    kind: FilterKind
    eta: float
    gospa: np.ndarray
    card_est_mean: np.ndarray
    detections_per_step: np.ndarray
    mean_runtime_s: float

    @property
    def mean_detections(self) -> float:
        return float(self.detections_per_step.mean())

    @property
    def mean_total_gospa(self) -> float:
        """Time-averaged mean GOSPA."""
        return float(self.gospa[:, 0].mean())


@dataclass(frozen=True)
class ExperimentReport:
    spec: ExperimentSpec
    card_true: np.ndarray
    cells: dict[tuple[FilterKind, float], CellSummary]

    def curve_rows(self) -> list[tuple[object, ...]]:
        rows: list[tuple[object, ...]] = []
        for (kind, eta), cell in self.cells.items():
            for i in range(cell.gospa.shape[0]):
                rows.append(
                    (
                        kind.value,
                        eta,
                        i + 1,
                        *(float(v) for v in cell.gospa[i]),
                        float(self.card_true[i]),
                        float(cell.card_est_mean[i]),
                    )
                )
        return rows

    def summary_rows(self) -> list[tuple[object, ...]]:
        return [
            (kind.value, eta, cell.mean_detections, cell.mean_runtime_s, cell.mean_total_gospa)
            for (kind, eta), cell in self.cells.items()
        ]

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        """Write ``curves.csv`` and ``summary.csv`` into ``out_dir``."""
        out = Path(out_dir)
        curves = write_rows(out / "curves.csv", CURVE_COLUMNS, self.curve_rows())
        summary = write_rows(out / "summary.csv", SUMMARY_COLUMNS, self.summary_rows())
        return curves, summary


def _reduce(spec: ExperimentSpec, results: list[ReplicateResult]) -> ExperimentReport:
    n = len(results)
    card_true = np.zeros(spec.scenario.n_steps)
    for res in results:
        card_true += res.card_true
    cells: dict[tuple[FilterKind, float], CellSummary] = {}
    for key in spec.cells:
        traces = [res.traces[key] for res in results]
        gospa_sum = np.zeros_like(traces[0].gospa)
        card_sum = np.zeros_like(traces[0].card_est)
        det_sum = np.zeros_like(traces[0].detections)
        runtime = 0.0
        for t in traces:
            gospa_sum += t.gospa
            card_sum += t.card_est
            det_sum += t.detections
            runtime += t.runtime_s
        cells[key] = CellSummary(
            kind=key[0],
            eta=key[1],
            gospa=gospa_sum / n,
            card_est_mean=card_sum / n,
            detections_per_step=det_sum / n,
            mean_runtime_s=runtime / n,
        )
    return ExperimentReport(spec=spec, card_true=card_true / n, cells=cells)


def run_replicates(spec: ExperimentSpec, settings: Settings | None = None) -> list[ReplicateResult]:
    """Every replicate of ``spec`` on a thread pool, returned in replicate order."""
    settings = settings if settings is not None else get_settings()
    workers = min(settings.MAX_WORKERS, spec.n_runs)
    logger.debug("Running replicates", n_runs=spec.n_runs, workers=workers)
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="replicate") as pool:
        return list(pool.map(lambda r: run_replicate(spec, r, settings), range(spec.n_runs)))


def run(spec: ExperimentSpec, settings: Settings | None = None) -> ExperimentReport:
    """
    Execute every replicate and reduce them in replicate order.

    Writes ``curves.csv`` and ``summary.csv`` when ``spec.out_dir`` is set.
    """
    settings = settings if settings is not None else get_settings()
    logger.info(
        "Experiment started",
        filters=[k.value for k in spec.filters],
        etas=spec.etas,
        n_runs=spec.n_runs,
        master_seed=spec.master_seed,
    )
    start = time.perf_counter()
    report = _reduce(spec, run_replicates(spec, settings))
    if spec.out_dir is not None:
        report.write(spec.out_dir)
    logger.info(
        "Experiment finished",
        n_runs=spec.n_runs,
        elapsed_s=round(time.perf_counter() - start, 3),
        out_dir=spec.out_dir,
    )
    return report
