"""
Object states, grid geometry and point measurements.

Models:
    ObjectState: kinematic position/velocity plus scalar intensity gamma
    GridGeometry: square-cell grid covering the region of interest
    PointMeasurement: (amplitude, z1, z2) triple derived from a detected cell

Grid convention:
    Cells are half-open squares ``[low, high)`` on both axes. The column
    index runs along axis 1 (``p1``), the row index along axis 2 (``p2``),
    and cell indices are linearized row-major: ``m = row * n_cols + col``.
    Hence cell ``(row=0, col=1)`` has center ``(1.5, 0.5)`` on a unit grid.

Particle arrays:
    Particle states are stored as ``(N, 5)`` float arrays whose columns are
    ``P1, P2, V1, V2, GAMMA`` (see the index constants below).
"""

import math

import numpy as np
from pydantic import BaseModel, Field, field_validator

from cell_tracker.core.errors import GridError

P1, P2, V1, V2, GAMMA = range(5)
STATE_DIM = 5
POSITION = slice(P1, P2 + 1)
KINEMATICS = slice(P1, V2 + 1)


class ObjectState(BaseModel):
    """
    Single-object state ``[p1, p2, v1, v2, gamma]``.

    Example:
        >>> ObjectState(p1=0.5, p2=0.5, v1=0.0, v2=0.0, gamma=10.0).as_array()
        array([ 0.5,  0.5,  0. ,  0. , 10. ])
    """

    p1: float = Field(description="Position along axis 1, meters")
    p2: float = Field(description="Position along axis 2, meters")
    v1: float = Field(default=0.0, description="Velocity along axis 1, m/step")
    v2: float = Field(default=0.0, description="Velocity along axis 2, m/step")
    gamma: float = Field(default=0.0, ge=0.0, description="Object intensity")

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("p1", "p2", "v1", "v2", "gamma")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("State fields must be finite")
        return v

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.v1, self.v2, self.gamma], dtype=float)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "ObjectState":
        p1, p2, v1, v2, gamma = (float(v) for v in values[:STATE_DIM])
        return cls(p1=p1, p2=p2, v1=v1, v2=v2, gamma=max(gamma, 0.0))


class GridGeometry(BaseModel):
    """
    Square-cell grid over the region of interest.

    Attributes:
        n_rows: Number of cell rows (along axis 2)
        n_cols: Number of cell columns (along axis 1)
        cell_side: Cell side length in meters
        origin: Lower-left corner ``(axis1, axis2)`` of the grid

    Example:
        >>> grid = GridGeometry(n_rows=32, n_cols=32, cell_side=1.0)
        >>> grid.n_cells, grid.area
        (1024, 1024.0)
    """

    n_rows: int = Field(default=32, gt=0)
    n_cols: int = Field(default=32, gt=0)
    cell_side: float = Field(default=1.0, gt=0.0)
    origin: tuple[float, float] = (0.0, 0.0)

    model_config = {"frozen": True, "extra": "forbid"}

    @property
    def n_cells(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def cell_area(self) -> float:
        return self.cell_side * self.cell_side

    @property
    def area(self) -> float:
        return self.n_cells * self.cell_area

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """``(low1, high1, low2, high2)`` of the region of interest."""
        x0, y0 = self.origin
        return (
            x0,
            x0 + self.n_cols * self.cell_side,
            y0,
            y0 + self.n_rows * self.cell_side,
        )

    def cell_index(self, row: int, col: int) -> int:
        if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
            raise GridError("Cell (row, col) out of range", row=row, col=col)
        return row * self.n_cols + col

    def row_col(self, m: int) -> tuple[int, int]:
        self._check_index(m)
        return divmod(m, self.n_cols)

    def cells_of(self, positions: np.ndarray) -> np.ndarray:
        """
        Vectorized ``cell_of`` for an ``(N, 2)`` array of positions.

        Returns:
            Integer array of cell indices, ``-1`` for positions outside the grid.
        """
        positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        x0, y0 = self.origin
        col = np.floor((positions[:, 0] - x0) / self.cell_side)
        row = np.floor((positions[:, 1] - y0) / self.cell_side)
        inside = (col >= 0) & (col < self.n_cols) & (row >= 0) & (row < self.n_rows)
        cells = np.full(positions.shape[0], -1, dtype=np.int64)
        cells[inside] = row[inside].astype(np.int64) * self.n_cols + col[inside].astype(np.int64)
        return cells

    def cell_centers(self) -> np.ndarray:
        """``(M, 2)`` array of all cell centers in index order."""
        rows, cols = np.divmod(np.arange(self.n_cells), self.n_cols)
        x0, y0 = self.origin
        return np.column_stack(
            [x0 + (cols + 0.5) * self.cell_side, y0 + (rows + 0.5) * self.cell_side]
        )

    def _check_index(self, m: int) -> None:
        if not 0 <= m < self.n_cells:
            raise GridError("Cell index out of range", cell_index=m, n_cells=self.n_cells)


def cell_of(state: ObjectState, geometry: GridGeometry) -> int | None:
    """
    Cell containing the state's position, or ``None`` outside the grid.

    Example:
        >>> grid = GridGeometry()
        >>> cell_of(ObjectState(p1=1.0, p2=0.5), grid)  # (row 0, col 1)
        1
    """
    m = int(geometry.cells_of(np.array([[state.p1, state.p2]]))[0])
    return None if m < 0 else m


def cell_center(m: int, geometry: GridGeometry) -> tuple[float, float]:
    """Geometric center ``(axis1, axis2)`` of cell ``m``; raises GridError when out of range."""
    row, col = geometry.row_col(m)
    x0, y0 = geometry.origin
    return (x0 + (col + 0.5) * geometry.cell_side, y0 + (row + 0.5) * geometry.cell_side)


class PointMeasurement(BaseModel):
    """Amplitude ``z`` and position ``(z1, z2)`` of one detection."""

    z: float = Field(gt=0.0)
    z1: float
    z2: float

    model_config = {"frozen": True, "extra": "forbid"}
