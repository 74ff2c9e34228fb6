"""
``cell-tracker`` command-line front end.

Subcommands:
    run       execute an experiment and write curves.csv / summary.csv
    score     per-step GOSPA between a truth CSV and an estimates CSV
    validate  check an experiment configuration file
    dump      print the effective configuration, or export a scenario or
              one filter's trace for inspection

Exit codes: 0 success, 1 runtime failure, 2 configuration or input error.
Errors are printed to stderr as a JSON object with a machine-readable code.
"""

import argparse
import csv
import json
import sys
from collections.abc import Sequence
from pathlib import Path

from cell_tracker.config.experiment import CliConfig, dump_config, load_config
from cell_tracker.config.settings import get_settings
from cell_tracker.core.errors import (
    CellTrackerError,
    ConfigurationError,
    ErrorCode,
    ExitCode,
    ParseError,
    build_structured_error,
)
from cell_tracker.core.logging import LogLevel, get_logger, setup_logging
from cell_tracker.core.serialization import (
    SCORE_COLUMNS,
    read_positions_by_step,
    write_estimates,
    write_frame,
    write_rows,
    write_snapshots,
    write_truth,
)
from cell_tracker.evaluation.gospa import gospa
from cell_tracker.filters.measurement import threshold_frame
from cell_tracker.filters.pmb import snapshot_rows
from cell_tracker.models.params import FilterKind
from cell_tracker.services.harness import (
    ExperimentSpec,
    cell_frames,
    filter_steps,
    run,
)
from cell_tracker.simulation.scenario import StreamPurpose, derive_seed, generate
from cell_tracker.version import get_version

logger = get_logger(__name__)

ALL_FILTERS = "all"


def _parse_filters(value: str) -> list[FilterKind]:
    if value.strip().lower() == ALL_FILTERS:
        return list(FilterKind)
    try:
        return [FilterKind.parse(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"Unknown filter in {value!r}", choices="pmb-cm, pmb-am, pmb, all") from exc


def _parse_etas(value: str) -> list[float]:
    try:
        etas = [float(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"Invalid threshold list {value!r}") from exc
    if not etas:
        raise ConfigurationError("Threshold list is empty")
    return etas


def _load(path: str | None) -> CliConfig:
    return load_config(path) if path else CliConfig()


def _spec_from_args(args: argparse.Namespace, config: CliConfig) -> ExperimentSpec:
    return ExperimentSpec.from_config(
        config,
        filters=_parse_filters(args.filter) if args.filter else None,
        etas=_parse_etas(args.eta) if args.eta else None,
        n_runs=args.runs,
        master_seed=args.seed,
        out_dir=getattr(args, "out", None),
        full_scale=getattr(args, "full_scale", False),
        record_timing=not getattr(args, "no_timing", False),
    )


def cmd_run(args: argparse.Namespace) -> int:
    config = _load(args.config)
    spec = _spec_from_args(args, config)
    if spec.out_dir is None:
        spec = spec.model_copy(update={"out_dir": get_settings().OUTPUT_DIR})
    report = run(spec)
    for kind, eta, detections, runtime, total in report.summary_rows():
        print(
            f"{kind:7s} eta={eta:<5g} detections={detections:9.2f} "
            f"runtime_s={runtime:9.3f} gospa={total:8.3f}"
        )
    print(f"Wrote {Path(spec.out_dir or '.') / 'curves.csv'} and summary.csv")
    return ExitCode.OK


def cmd_score(args: argparse.Namespace) -> int:
    truth = read_positions_by_step(args.truth)
    estimates = read_positions_by_step(args.estimates)
    rows = []
    for k in sorted(set(truth) | set(estimates)):
        result = gospa(
            truth.get(k, []), estimates.get(k, []), p=args.p, c=args.c, beta=args.beta
        )
        rows.append((k, result.total, result.localization, result.missed, result.false_))
    if args.out:
        write_rows(args.out, SCORE_COLUMNS, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(SCORE_COLUMNS)
        writer.writerows(rows)
    return ExitCode.OK


def cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    ExperimentSpec.from_config(config)
    print(f"{args.config}: OK")
    return ExitCode.OK


def cmd_dump(args: argparse.Namespace) -> int:
    config = _load(args.config)
    if args.artifact == "config":
        sys.stdout.write(dump_config(config))
        return ExitCode.OK

    spec = _spec_from_args(args, config)
    out = Path(args.out)
    replicate = args.replicate
    kind, eta = spec.filters[0], spec.etas[0]
    truth = generate(
        spec.scenario,
        seed=derive_seed(spec.master_seed, replicate, StreamPurpose.SCENARIO),
        replicate=replicate,
    )
    write_truth(out / "truth.csv", truth.rows())
    frames = cell_frames(spec, truth, replicate)
    if args.artifact == "scenario":
        for k, frame in enumerate(frames, start=1):
            write_frame(out / "frames" / f"frame_{k:04d}.csv", threshold_frame(frame, eta))
        print(f"Wrote truth and {len(frames)} frames to {out}")
        return ExitCode.OK

    estimates = []
    snapshots = []
    for step in filter_steps(spec, kind, eta, replicate, frames):
        estimates.extend((step.k, e.label, e.state) for e in step.estimates)
        snapshots.extend(snapshot_rows(step.belief, step.k))
    write_estimates(out / "estimates.csv", estimates)
    write_snapshots(out / "snapshots.csv", snapshots)
    print(f"Wrote {kind.value} trace at eta={eta:g} to {out}")
    return ExitCode.OK


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Experiment configuration file (INI)")
    parser.add_argument(
        "--filter", help="Filter(s): pmb-cm, pmb-am, pmb, a comma list, or 'all'"
    )
    parser.add_argument("--eta", help="Comma-separated detection thresholds, e.g. 2,4,6")
    parser.add_argument("--runs", type=int, help="Number of Monte-Carlo replicates")
    parser.add_argument("--seed", type=int, help="Master seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cell-tracker",
        description="PMB tracking on thresholded cell measurements with point-measurement baselines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_version()}")
    parser.add_argument(
        "--log-level", choices=[level.value for level in LogLevel], help="Override LOG_LEVEL"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Run an experiment")
    _add_experiment_flags(run_parser)
    run_parser.add_argument("--out", help="Output directory for curves.csv and summary.csv")
    run_parser.add_argument(
        "--full-scale", action="store_true", help="Use the full replicate count (1000)"
    )
    run_parser.add_argument(
        "--no-timing", action="store_true", help="Report zero runtimes for byte-identical output"
    )
    run_parser.set_defaults(handler=cmd_run)

    score_parser = sub.add_parser("score", help="Per-step GOSPA of an estimates file")
    score_parser.add_argument("truth", help="CSV with step,p1,p2 columns")
    score_parser.add_argument("estimates", help="CSV with step,p1,p2 columns")
    score_parser.add_argument("--p", type=float, default=1.0, help="GOSPA order")
    score_parser.add_argument("--c", type=float, default=20.0, help="GOSPA cutoff")
    score_parser.add_argument("--beta", type=float, default=2.0, help="GOSPA alpha (only 2)")
    score_parser.add_argument("--out", help="Write CSV here instead of stdout")
    score_parser.set_defaults(handler=cmd_score)

    validate_parser = sub.add_parser("validate", help="Validate a configuration file")
    validate_parser.add_argument("--config", required=True, help="Configuration file")
    validate_parser.set_defaults(handler=cmd_validate)

    dump_parser = sub.add_parser("dump", help="Print the configuration or export artifacts")
    dump_parser.add_argument("artifact", choices=["config", "scenario", "trace"])
    _add_experiment_flags(dump_parser)
    dump_parser.add_argument("--out", default="out/dump", help="Output directory")
    dump_parser.add_argument("--replicate", type=int, default=0, help="Replicate index")
    dump_parser.set_defaults(handler=cmd_dump)
    return parser


def _report(exc: CellTrackerError | Exception, code: str) -> None:
    if isinstance(exc, CellTrackerError):
        payload = build_structured_error(exc.code, exc.message, exc.context or None)
    else:
        payload = build_structured_error(code, f"{type(exc).__name__}: {exc}")
    print(json.dumps(payload, default=str), file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    level = LogLevel(args.log_level) if args.log_level else LogLevel(settings.LOG_LEVEL)
    setup_logging(level, settings.LOG_FORMAT)

    try:
        return int(args.handler(args))
    except (ConfigurationError, ParseError) as exc:
        logger.error("Invalid input", error=exc.message, code=exc.code)
        _report(exc, exc.code)
        return ExitCode.CONFIG_ERROR
    except CellTrackerError as exc:
        logger.error("Command failed", error=exc.message, code=exc.code)
        _report(exc, exc.code)
        return ExitCode.RUNTIME_FAILURE
    except Exception as exc:
        logger.exception("Unexpected failure")
        _report(exc, ErrorCode.INTERNAL_ERROR)
        return ExitCode.RUNTIME_FAILURE


if __name__ == "__main__":
    sys.exit(main())
