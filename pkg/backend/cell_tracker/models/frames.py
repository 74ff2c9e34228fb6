"""Raw and thresholded cell frames plus their CSV-facing helpers."""

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from cell_tracker.core.errors import GridError, MeasurementDomainError
from cell_tracker.models.state import GridGeometry


@dataclass(frozen=True)
class CellFrame:
    """Unthresholded cell intensities ``c^(m)`` for every cell of the grid."""

    geometry: GridGeometry
    intensities: np.ndarray

    def __post_init__(self) -> None:
        intensities = np.asarray(self.intensities, dtype=float)
        if intensities.shape != (self.geometry.n_cells,):
            raise GridError(
                "Intensity array does not match grid",
                expected=self.geometry.n_cells,
                got=intensities.shape,
            )
        if np.any(intensities < 0) or not np.all(np.isfinite(intensities)):
            raise MeasurementDomainError("Cell intensities must be finite and nonnegative")
        object.__setattr__(self, "intensities", intensities)


@dataclass(frozen=True)
class ThresholdedFrame:
    """
    Cells whose intensity strictly exceeds ``eta``.

    Missed cells are implicit: a cell absent from ``cells`` observed the
    event ``z = eta``. Detections are kept sorted by cell index, so two
    frames holding the same detections in a different order compare equal
    and feed the filters identically.
    """

    geometry: GridGeometry
    eta: float
    cells: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        if self.eta < 0:
            raise MeasurementDomainError("Threshold must be nonnegative", eta=self.eta)
        cells = np.asarray(self.cells, dtype=np.int64).reshape(-1)
        amplitudes = np.asarray(self.amplitudes, dtype=float).reshape(-1)
        if cells.shape != amplitudes.shape:
            raise GridError("Detection cells and amplitudes differ in length")
        if cells.size:
            if cells.min() < 0 or cells.max() >= self.geometry.n_cells:
                raise GridError("Detection cell index out of range")
            if np.unique(cells).size != cells.size:
                raise GridError("Detection cell indices must be unique")
            if np.any(amplitudes <= self.eta):
                raise MeasurementDomainError(
                    "Stored amplitudes must strictly exceed eta", eta=self.eta
                )
        order = np.argsort(cells, kind="stable")
        object.__setattr__(self, "cells", cells[order])
        object.__setattr__(self, "amplitudes", amplitudes[order])

    @classmethod
    def from_detections(
        cls, geometry: GridGeometry, eta: float, detections: Iterable[tuple[int, float]]
    ) -> "ThresholdedFrame":
        pairs = list(detections)
        return cls(
            geometry=geometry,
            eta=eta,
            cells=np.array([m for m, _ in pairs], dtype=np.int64),
            amplitudes=np.array([z for _, z in pairs], dtype=float),
        )

    @property
    def n_detections(self) -> int:
        return int(self.cells.size)

    @property
    def detections(self) -> list[tuple[int, float]]:
        return [(int(m), float(z)) for m, z in zip(self.cells, self.amplitudes, strict=True)]

    def detected_mask(self) -> np.ndarray:
        mask = np.zeros(self.geometry.n_cells, dtype=bool)
        mask[self.cells] = True
        return mask

    def detection_lookup(self) -> np.ndarray:
        """Map cell index -> detection position in ``cells`` (``-1`` for missed cells)."""
        lookup = np.full(self.geometry.n_cells, -1, dtype=np.int64)
        lookup[self.cells] = np.arange(self.cells.size)
        return lookup
