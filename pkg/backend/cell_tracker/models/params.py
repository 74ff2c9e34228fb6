"""
Parameter models for the measurement model, filters and scenario.

Defaults reproduce the reference simulation: 32 x 32 unit cells, noise
power 1, ten objects of intensity 10 over 200 steps, survival 0.999,
recycling below 0.1 and a birth PHD of mass 5 spread over the grid.

Models:
    AmplitudeModel: Rayleigh (Swerling 1) noise power
    AssociationMethod: exact enumeration or loopy belief propagation
    FilterKind: pmb_cm, pmb_am or pmb
    FilterParams: prediction, birth, recycling and particle budgets
    PositionLikelihood: Gaussian or uniform-on-cell position likelihood
    PointMeasurementModel: point-measurement likelihood options
    ScenarioConfig: ground-truth generation
"""

from enum import Enum

from pydantic import BaseModel, Field, model_validator

from cell_tracker.models.state import GridGeometry


class AmplitudeModel(BaseModel):
    """Rayleigh clutter with noise power ``sigma_n_sq``; objects add their ``gamma``."""

    sigma_n_sq: float = Field(default=1.0, gt=0.0)

    model_config = {"frozen": True, "extra": "forbid"}


class FilterKind(str, Enum):
    """Filters the experiment harness can run."""

    PMB_CM = "pmb_cm"
    PMB_AM = "pmb_am"
    PMB = "pmb"

    @property
    def uses_point_measurements(self) -> bool:
        return self is not FilterKind.PMB_CM

    @classmethod
    def parse(cls, name: str) -> "FilterKind":
        """Accept ``pmb-cm`` as well as ``pmb_cm``."""
        return cls(name.strip().lower().replace("-", "_"))


class AssociationMethod(str, Enum):
    """How marginal association probabilities are computed."""

    BP = "bp"
    EXACT = "exact"


class FilterParams(BaseModel):
    """
    Shared PMB filter parameters.

    ``birth_mass_per_cell`` is the birth PHD mass per unit cell, so the
    total birth mass is ``birth_mass_per_cell * n_cells``.
    """

    eta: float = Field(default=2.0, ge=0.0, description="Detection threshold")
    p_s: float = Field(default=0.999, gt=0.0, le=1.0)
    birth_mass_per_cell: float = Field(default=5.0 / 32**2, ge=0.0)
    birth_velocity_var: float = Field(default=1e-2, ge=0.0)
    birth_gamma_max: float = Field(default=30.0, gt=0.0)
    recycle_threshold: float = Field(default=0.1, ge=0.0, lt=1.0)
    existence_threshold: float = Field(
        default=0.5, ge=0.0, lt=1.0, description="Estimates are reported above this r"
    )
    particles_per_bernoulli: int = Field(default=3000, gt=0)
    phd_particle_budget: int = Field(default=50_000, gt=0)
    birth_particle_count: int = Field(default=50_000, gt=0)
    process_noise_var: float = Field(default=1e-3, ge=0.0)
    gamma_jitter_var: float = Field(
        default=0.0, ge=0.0, description="Variance of the log-normal intensity jitter"
    )
    dt: float = Field(default=1.0, gt=0.0)
    resample_ess_fraction: float = Field(default=0.5, ge=0.0, le=1.0)
    association: AssociationMethod = AssociationMethod.BP
    bp_tol: float = Field(default=1e-6, gt=0.0)
    bp_max_iter: int = Field(default=200, gt=0)
    bp_damping: float = Field(default=0.5, ge=0.0, lt=1.0)

    model_config = {"frozen": True, "extra": "forbid"}


class PositionLikelihood(str, Enum):
    """In-cell position likelihood of the point filters."""

    GAUSSIAN = "gaussian"
    CELL_UNIFORM = "cell_uniform"


class PointMeasurementModel(BaseModel):
    """
    Point-measurement likelihood options.

    ``mu_fa`` is the Poisson clutter rate; use ``for_threshold`` to derive it
    from the true false-alarm probability and the number of cells.
    """

    sigma_p_sq: float = Field(default=1.0 / 12.0, gt=0.0)
    position_likelihood: PositionLikelihood = PositionLikelihood.GAUSSIAN
    amplitude_enabled: bool = True
    mu_fa: float = Field(default=0.0, ge=0.0)
    roi_area: float = Field(default=1024.0, gt=0.0)

    model_config = {"frozen": True, "extra": "forbid"}

    @property
    def clutter_spatial_density(self) -> float:
        """Uniform-over-ROI clutter position density."""
        return 1.0 / self.roi_area

    @classmethod
    def for_threshold(
        cls,
        geometry: GridGeometry,
        amplitude_model: AmplitudeModel,
        eta: float,
        **overrides: object,
    ) -> "PointMeasurementModel":
        from cell_tracker.filters.measurement import p_fa

        return cls(
            mu_fa=p_fa(amplitude_model, eta) * geometry.n_cells,
            roi_area=geometry.area,
            **overrides,  # type: ignore[arg-type]
        )


class ScenarioConfig(BaseModel):
    """Ground-truth generation parameters."""

    roi: GridGeometry = Field(default_factory=GridGeometry)
    n_objects: int = Field(default=10, ge=0)
    n_steps: int = Field(default=200, gt=0)
    birth_window_end: int = Field(default=30, ge=1)
    death_window_start: int = Field(default=170, ge=1)
    sigma_v_sq: float = Field(default=1e-2, ge=0.0)
    process_noise_var: float = Field(default=1e-3, ge=0.0)
    initial_gamma: float = Field(default=10.0, ge=0.0)
    dt: float = Field(default=1.0, gt=0.0)
    master_seed: int = Field(default=0, ge=0)

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _windows(self) -> "ScenarioConfig":
        if not self.birth_window_end < self.death_window_start <= self.n_steps:
            raise ValueError(
                "Birth window must end before the death window starts, "
                "and deaths must start no later than the last step"
            )
        return self
