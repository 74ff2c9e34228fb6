"""Factory for PMB filter instances.

Maps a ``FilterKind`` plus its parameters onto a configured filter:
    - pmb_cm: thresholded cell measurements
    - pmb_am: point measurements with amplitude information
    - pmb: point measurements, position only
"""

import numpy as np

from cell_tracker.config.experiment import MeasurementSection
from cell_tracker.core.logging import get_logger
from cell_tracker.filters.pmb import PmbFilter
from cell_tracker.filters.pmb_cm import PmbCmFilter
from cell_tracker.filters.pmb_point import PmbPointFilter
from cell_tracker.models.params import FilterKind, FilterParams
from cell_tracker.models.state import GridGeometry

logger = get_logger(__name__)


def create_filter(
    kind: FilterKind,
    params: FilterParams,
    geometry: GridGeometry,
    measurement: MeasurementSection,
    rng: np.random.Generator,
    check_invariants: bool = True,
) -> PmbFilter:
    """
    Create a filter of the given kind.

    Point filters derive their clutter rate from the true false-alarm
    probability at ``params.eta`` and the number of cells.

    Raises:
        ConfigurationError: for a point filter at ``eta = 0``
    """
    if kind is FilterKind.PMB_CM:
        filt: PmbFilter = PmbCmFilter(
            params, geometry, measurement.amplitude_model, rng, check_invariants
        )
    else:
        filt = PmbPointFilter(
            params,
            geometry,
            measurement.amplitude_model,
            rng,
            point_model=measurement.point_model(kind, geometry, params.eta),
            check_invariants=check_invariants,
        )
    logger.debug("Created filter", kind=kind.value, eta=params.eta)
    return filt
