"""Ground-truth scenarios and frame synthesis."""

from cell_tracker.simulation.scenario import (
    GroundTruth,
    StreamPurpose,
    Trajectory,
    derive_seed,
    frame_at,
    generate,
)

__all__ = ["GroundTruth", "StreamPurpose", "Trajectory", "derive_seed", "frame_at", "generate"]
