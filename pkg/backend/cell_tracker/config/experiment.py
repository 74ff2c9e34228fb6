"""Sectioned experiment configuration file.

Everything that influences results is kept in one versionable INI file::

    [scenario]          grid and ground-truth generation
    [measurement]       Rayleigh noise power and point-measurement options
    [filter.pmb_cm]     per-filter parameters (all FilterParams except eta, dt)
    [filter.pmb_am]
    [filter.pmb]
    [harness]           filters, thresholds, runs, seed and GOSPA parameters

Unknown sections and keys are rejected; missing ones take the documented
defaults. ``dump_config`` writes the same format back, and
``parse_config(dump_config(c)) == c``.

Example:
    >>> from cell_tracker.config.experiment import parse_config
    >>> config = parse_config("[harness]\\netas = 2, 4\\nn_runs = 5\\n")
    >>> config.harness.etas
    [2.0, 4.0]
"""

import configparser
import io
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, ValidationError, field_validator

from cell_tracker.core.errors import ConfigurationError, ParseError
from cell_tracker.models.params import (
    AmplitudeModel,
    FilterKind,
    FilterParams,
    PointMeasurementModel,
    PositionLikelihood,
    ScenarioConfig,
)
from cell_tracker.models.state import GridGeometry

FILTER_SECTION_PREFIX = "filter."
GRID_KEYS = ("n_rows", "n_cols", "cell_side")
# set per experiment cell, not per filter
RESERVED_FILTER_KEYS = frozenset({"eta", "dt"})
DESK_SCALE_RUNS = 100
FULL_SCALE_RUNS = 1000


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class MeasurementSection(BaseModel):
    """Cell noise power and the point filters' position likelihood."""

    sigma_n_sq: float = Field(default=1.0, gt=0.0)
    sigma_p_sq: float = Field(default=1.0 / 12.0, gt=0.0)
    position_likelihood: PositionLikelihood = PositionLikelihood.GAUSSIAN

    model_config = {"frozen": True, "extra": "forbid"}

    @property
    def amplitude_model(self) -> AmplitudeModel:
        return AmplitudeModel(sigma_n_sq=self.sigma_n_sq)

    def point_model(
        self, kind: FilterKind, geometry: GridGeometry, eta: float
    ) -> PointMeasurementModel:
        return PointMeasurementModel.for_threshold(
            geometry,
            self.amplitude_model,
            eta,
            sigma_p_sq=self.sigma_p_sq,
            position_likelihood=self.position_likelihood,
            amplitude_enabled=kind is FilterKind.PMB_AM,
        )


class HarnessSection(BaseModel):
    """What to run: filters x thresholds x replicates, plus GOSPA parameters."""

    filters: list[FilterKind] = Field(
        default_factory=lambda: [FilterKind.PMB_CM, FilterKind.PMB_AM, FilterKind.PMB]
    )
    etas: list[float] = Field(default_factory=lambda: [2.0, 4.0, 6.0])
    n_runs: int = Field(default=DESK_SCALE_RUNS, ge=1)
    full_scale: bool = False
    master_seed: int = Field(default=0, ge=0)
    out_dir: str | None = None
    gospa_p: float = Field(default=1.0, ge=1.0)
    gospa_c: float = Field(default=20.0, gt=0.0)
    gospa_beta: float = Field(default=2.0, gt=0.0)

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("filters", mode="before")
    @classmethod
    def _parse_filters(cls, value: Any) -> Any:
        value = _split_list(value)
        if isinstance(value, list):
            return [FilterKind.parse(v) if isinstance(v, str) else v for v in value]
        return value

    @field_validator("etas", mode="before")
    @classmethod
    def _parse_etas(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("etas")
    @classmethod
    def _nonnegative_etas(cls, value: list[float]) -> list[float]:
        if not value or any(eta < 0 for eta in value):
            raise ValueError("etas must be a non-empty list of nonnegative thresholds")
        return value

    @property
    def effective_runs(self) -> int:
        return FULL_SCALE_RUNS if self.full_scale else self.n_runs


class CliConfig(BaseModel):
    """Validated experiment configuration."""

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    measurement: MeasurementSection = Field(default_factory=MeasurementSection)
    filters: dict[FilterKind, FilterParams] = Field(
        default_factory=lambda: {kind: FilterParams() for kind in FilterKind}
    )
    harness: HarnessSection = Field(default_factory=HarnessSection)

    model_config = {"frozen": True, "extra": "forbid"}


def _validation_error(section: str, exc: ValidationError) -> ConfigurationError:
    problems = [
        f"{'.'.join(str(p) for p in err['loc']) or section}: {err['msg']}" for err in exc.errors()
    ]
    return ConfigurationError(
        f"Invalid [{section}] section: " + "; ".join(problems), section=section
    )


def _scenario_from(section: dict[str, str], master_seed: int) -> ScenarioConfig:
    if "master_seed" in section:
        raise ConfigurationError("master_seed belongs to the [harness] section", section="scenario")
    grid = {k: section.pop(k) for k in GRID_KEYS if k in section}
    try:
        return ScenarioConfig(
            roi=GridGeometry.model_validate(grid), master_seed=master_seed, **section
        )
    except ValidationError as exc:
        raise _validation_error("scenario", exc) from exc


def _filter_from(name: str, section: dict[str, str]) -> tuple[FilterKind, FilterParams]:
    try:
        kind = FilterKind.parse(name)
    except ValueError as exc:
        raise ConfigurationError(f"Unknown filter section [filter.{name}]") from exc
    reserved = RESERVED_FILTER_KEYS.intersection(section)
    if reserved:
        raise ConfigurationError(
            f"Keys {sorted(reserved)} are set per experiment and not allowed in [filter.{name}]",
            section=f"filter.{name}",
        )
    try:
        return kind, FilterParams.model_validate(section)
    except ValidationError as exc:
        raise _validation_error(f"filter.{name}", exc) from exc


def _error_line(exc: configparser.Error) -> int | None:
    lineno = getattr(exc, "lineno", None)
    if lineno is None and isinstance(exc, configparser.ParsingError) and exc.errors:
        lineno = exc.errors[0][0]
    return lineno


def parse_config(text: str) -> CliConfig:
    """Parse and validate configuration text.

    Raises:
        ParseError: malformed INI text, with the offending line when known
        ConfigurationError: unknown sections or keys, or invalid values
    """
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"Malformed configuration: {exc.message}", line=_error_line(exc)) from exc

    sections = {name: dict(parser.items(name)) for name in parser.sections()}
    try:
        harness = HarnessSection.model_validate(sections.pop("harness", {}))
    except ValidationError as exc:
        raise _validation_error("harness", exc) from exc
    try:
        measurement = MeasurementSection.model_validate(sections.pop("measurement", {}))
    except ValidationError as exc:
        raise _validation_error("measurement", exc) from exc

    scenario = _scenario_from(sections.pop("scenario", {}), harness.master_seed)
    filters = {kind: FilterParams() for kind in FilterKind}
    for name in list(sections):
        if name.startswith(FILTER_SECTION_PREFIX):
            kind, params = _filter_from(name[len(FILTER_SECTION_PREFIX) :], sections.pop(name))
            filters[kind] = params
    if sections:
        raise ConfigurationError(f"Unknown configuration sections: {sorted(sections)}")
    return CliConfig(scenario=scenario, measurement=measurement, filters=filters, harness=harness)


def load_config(path: str | Path) -> CliConfig:
    """Read and validate a configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"Cannot read configuration file {path}: {exc}") from exc
    return parse_config(text)


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list | tuple):
        return ", ".join(_format(v) for v in value)
    return str(value)


def dump_config(config: CliConfig) -> str:
    """Serialize a configuration to INI text that parses back to an equal object."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    scenario = config.scenario
    parser["scenario"] = {
        "n_rows": _format(scenario.roi.n_rows),
        "n_cols": _format(scenario.roi.n_cols),
        "cell_side": _format(scenario.roi.cell_side),
        **{
            key: _format(value)
            for key, value in scenario.model_dump(exclude={"roi", "master_seed"}).items()
        },
    }
    parser["measurement"] = {
        key: _format(getattr(config.measurement, key))
        for key in MeasurementSection.model_fields
    }
    for kind, params in config.filters.items():
        parser[f"{FILTER_SECTION_PREFIX}{kind.value}"] = {
            key: _format(getattr(params, key))
            for key in FilterParams.model_fields
            if key not in RESERVED_FILTER_KEYS
        }
    parser["harness"] = {
        key: _format(getattr(config.harness, key))
        for key in HarnessSection.model_fields
        if getattr(config.harness, key) is not None
    }
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()
