#!/usr/bin/env python3
"""
Acceptance checks for the reference experiment.

This script checks:
1. Mean detections per step at eta 0, 2, 4 and 6 against the reference counts,
   and against the amplitude model's prediction for the same ground truth
2. Clutter-only detection rate against n_cells * p_fa within 3 standard errors
3. Windowed GOSPA ordering PMB-CM < PMB-AM < PMB at eta 2 and 4
4. Runtime scaling from eta 6 to eta 2 (point filters >= 5x, PMB-CM below both)

Checks 3 and 4 run every filter on the full reference setup and take hours;
--skip-filters runs checks 1 and 2 only.

Exit codes:
  0 - All checks passed
  1 - At least one check failed

Usage:
  python scripts/check_acceptance.py
  python scripts/check_acceptance.py --config experiments/default.ini --filter-runs 50
  python scripts/check_acceptance.py --skip-filters
"""

import argparse
import sys
from pathlib import Path

# Add backend to Python path
backend_path = Path(__file__).parent.parent / "backend"
sys.path.insert(0, str(backend_path))

try:
    from cell_tracker.config import get_settings, load_config
    from cell_tracker.core.logging import LogLevel, setup_logging
    from cell_tracker.models.params import FilterKind
    from cell_tracker.services.acceptance import (
        CheckResult,
        check_clutter_rate,
        check_detection_counts,
        check_detection_model,
        check_filter_ordering,
        check_runtime_scaling,
        detection_statistics,
        runtime_ratios,
    )
    from cell_tracker.services.harness import ExperimentSpec, run_replicates
except ImportError as e:
    print(f"ERROR: Failed to import cell_tracker: {e}")
    print("   Make sure you're running from the project root directory.")
    sys.exit(1)

DEFAULT_CONFIG = Path(__file__).parent.parent / "experiments" / "default.ini"


def report(title: str, results: list[CheckResult]) -> bool:
    print(f"\n{title}")
    for result in results:
        mark = "✅ PASS" if result.passed else "❌ FAIL"
        print(f"{mark}: {result.name}: {result.detail}")
    return all(r.passed for r in results)


def main() -> int:
    parser = argparse.ArgumentParser(description="Acceptance checks for the reference experiment")
    parser.add_argument("--config", default=str(DEFAULT_CONFIG))
    parser.add_argument("--detection-runs", type=int, default=100)
    parser.add_argument("--clutter-frames", type=int, default=10_000)
    parser.add_argument("--filter-runs", type=int, default=50)
    parser.add_argument("--skip-filters", action="store_true")
    args = parser.parse_args()

    settings = get_settings()
    setup_logging(LogLevel(settings.LOG_LEVEL), settings.LOG_FORMAT)
    config = load_config(args.config)
    seed = config.harness.master_seed
    outcomes = []

    stats = detection_statistics(
        ExperimentSpec.from_config(
            config,
            filters=[FilterKind.PMB_CM],
            etas=[0.0, 2.0, 4.0, 6.0],
            n_runs=args.detection_runs,
        )
    )
    counts = {eta: s.observed for eta, s in stats.items()}
    outcomes.append(report("Detection counts per step", check_detection_counts(counts)))
    outcomes.append(report("Detection counts against the amplitude model", check_detection_model(stats)))

    outcomes.append(
        report(
            "Clutter-only detection rate",
            check_clutter_rate(
                config.scenario.roi,
                config.measurement.amplitude_model,
                [2.0, 4.0, 6.0],
                args.clutter_frames,
                seed,
            ),
        )
    )

    if not args.skip_filters:
        spec = ExperimentSpec.from_config(
            config,
            filters=list(FilterKind),
            etas=[2.0, 4.0, 6.0],
            n_runs=args.filter_runs,
        )
        results = run_replicates(spec, settings)
        outcomes.append(report("Filter ordering", check_filter_ordering(results)))
        outcomes.append(report("Runtime scaling", check_runtime_scaling(runtime_ratios(results))))

    print()
    if all(outcomes):
        print("All acceptance checks passed.")
        return 0
    print("Some acceptance checks failed.")
    return 1


if __name__ == "__main__":
    sys.exit(main())
