#!/usr/bin/env python3
"""
Configuration validation script for the PMB cell tracker.

Validates the environment settings and, optionally, an experiment
configuration file. Run this before long experiments or in CI.

Exit codes:
  0 - All checks passed
  1 - Critical errors found

Usage:
  python scripts/validate_config.py
  python scripts/validate_config.py experiments/default.ini
"""

import sys
from pathlib import Path

# Add backend to Python path
backend_path = Path(__file__).parent.parent / "backend"
sys.path.insert(0, str(backend_path))

try:
    from cell_tracker.config import get_settings, load_config
    from cell_tracker.core.errors import CellTrackerError
    from cell_tracker.services.harness import ExperimentSpec
except ImportError as e:
    print(f"ERROR: Failed to import cell_tracker: {e}")
    print("   Make sure you're running from the project root directory.")
    sys.exit(1)

# particle-steps above which an experiment is flagged as very long
WORK_WARNING_THRESHOLD = 10**10


def validate_config(config_path: str | None = None) -> bool:
    """
    Validate settings and an optional experiment file.

    Returns:
        bool: True if all checks pass, False if critical errors found
    """
    settings = get_settings()
    errors: list[str] = []
    warnings: list[str] = []

    print("Validating cell tracker configuration...\n")

    # =========================================================================
    # CHECK 1: Environment settings
    # =========================================================================
    print("- Checking environment settings...")

    if settings.ENV == "ci" and not settings.CHECK_INVARIANTS:
        errors.append("CHECK_INVARIANTS=false in ci (invariant checks must run in CI)")

    if settings.LOG_LEVEL == "DEBUG" and settings.MAX_WORKERS > 1:
        warnings.append(
            f"LOG_LEVEL=DEBUG with MAX_WORKERS={settings.MAX_WORKERS} "
            "(per-step logs of concurrent replicates interleave)"
        )

    output_dir = Path(settings.OUTPUT_DIR)
    if output_dir.exists() and not output_dir.is_dir():
        errors.append(f"OUTPUT_DIR={settings.OUTPUT_DIR} exists and is not a directory")

    # =========================================================================
    # CHECK 2: Experiment file
    # =========================================================================
    if config_path is not None:
        print(f"- Checking experiment file {config_path}...")
        try:
            config = load_config(config_path)
            spec = ExperimentSpec.from_config(config)
        except CellTrackerError as exc:
            errors.append(f"{config_path}: {exc.message}")
        else:
            work = (
                spec.n_runs
                * len(spec.cells)
                * spec.scenario.n_steps
                * max(p.phd_particle_budget for p in config.filters.values())
            )
            if work > WORK_WARNING_THRESHOLD:
                warnings.append(
                    f"{config_path}: {spec.n_runs} runs x {len(spec.cells)} cells "
                    f"x {spec.scenario.n_steps} steps is a very long experiment"
                )

    # =========================================================================
    # RESULTS
    # =========================================================================
    print()
    if warnings:
        print(f"WARNINGS ({len(warnings)}):")
        for warning in warnings:
            print(f"   - {warning}")
        print()

    if errors:
        print(f"CRITICAL ERRORS ({len(errors)}):")
        for error in errors:
            print(f"   - {error}")
        print()
        return False

    print("All configuration checks passed.")
    return True


if __name__ == "__main__":
    sys.exit(0 if validate_config(sys.argv[1] if len(sys.argv) > 1 else None) else 1)
