"""
GOSPA metric (alpha = 2) on 2D positions with its decomposition.

    d = min over partial assignments of
        sum_assigned min(|x - y|, c)^p + c^p / alpha * (|X| + |Y| - 2 |assigned|)

``total`` is ``d ** (1 / p)``. The components are the three terms of the
sum, so ``total == localization + missed + false_`` holds for ``p = 1``;
for ``p > 1`` they decompose ``total ** p``.
"""

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from cell_tracker.core.errors import ConfigurationError

SUPPORTED_ALPHA = 2.0

PositionsLike = np.ndarray | Sequence[tuple[float, float]]


class GospaResult(BaseModel):
    """GOSPA value and its localization, missed-object and false-object terms."""

    total: float = Field(ge=0.0)
    localization: float = Field(ge=0.0)
    missed: float = Field(ge=0.0)
    false_: float = Field(ge=0.0)

    model_config = {"frozen": True}


def _as_positions(points: PositionsLike) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    return arr.reshape(-1, 2)


def gospa(
    truth: PositionsLike,
    estimates: PositionsLike,
    p: float = 1.0,
    c: float = 20.0,
    beta: float = SUPPORTED_ALPHA,
) -> GospaResult:
    """
    GOSPA between true and estimated positions.

    Pairwise costs are clamped at ``c^p`` before the optimal assignment;
    pairs at the cutoff count as one missed plus one false object.

    Raises:
        ConfigurationError: if ``p < 1``, ``c <= 0`` or ``beta != 2``
    """
    if p < 1:
        raise ConfigurationError("GOSPA order must be at least 1", p=p)
    if c <= 0:
        raise ConfigurationError("GOSPA cutoff must be positive", c=c)
    if beta != SUPPORTED_ALPHA:
        raise ConfigurationError("Only alpha = 2 is supported", beta=beta)

    x = _as_positions(truth)
    y = _as_positions(estimates)
    unassigned_cost = c**p / beta

    localization = 0.0
    n_assigned = 0
    if len(x) and len(y):
        costs = np.minimum(cdist(x, y), c) ** p
        rows, cols = linear_sum_assignment(costs)
        assigned = costs[rows, cols]
        kept = assigned < c**p
        localization = float(assigned[kept].sum())
        n_assigned = int(kept.sum())

    missed = unassigned_cost * (len(x) - n_assigned)
    false_ = unassigned_cost * (len(y) - n_assigned)
    value = localization + missed + false_
    return GospaResult(
        total=value ** (1.0 / p),
        localization=localization,
        missed=missed,
        false_=false_,
    )


def time_averaged_gospa(results: Sequence[GospaResult]) -> float:
    """Mean total GOSPA over a sequence of time steps (0 for an empty sequence)."""
    if not results:
        return 0.0
    return float(np.mean([r.total for r in results]))
