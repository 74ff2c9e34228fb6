"""
Domain models: states, grids, frames, particle sets, beliefs and parameters.

Array-carrying types (frames, particle sets, beliefs) are frozen dataclasses
over numpy arrays; scalar value types and parameter sets are frozen
pydantic models.
"""

from cell_tracker.models.belief import BernoulliComponent, ParticleSet, PmbBelief
from cell_tracker.models.frames import CellFrame, ThresholdedFrame
from cell_tracker.models.params import (
    AmplitudeModel,
    AssociationMethod,
    FilterKind,
    FilterParams,
    PointMeasurementModel,
    PositionLikelihood,
    ScenarioConfig,
)
from cell_tracker.models.state import (
    GridGeometry,
    ObjectState,
    PointMeasurement,
    cell_center,
    cell_of,
)

__all__ = [
    "AmplitudeModel",
    "AssociationMethod",
    "BernoulliComponent",
    "CellFrame",
    "FilterKind",
    "FilterParams",
    "GridGeometry",
    "ObjectState",
    "ParticleSet",
    "PmbBelief",
    "PointMeasurement",
    "PointMeasurementModel",
    "PositionLikelihood",
    "ScenarioConfig",
    "ThresholdedFrame",
    "cell_center",
    "cell_of",
]
