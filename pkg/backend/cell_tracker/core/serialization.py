"""
CSV readers and writers.

Fixed column layouts:
    frames:     ``# eta=<eta> rows=<n_rows> cols=<n_cols> side=<cell_side>``
                then ``cell_index,amplitude``
    truth:      object_id,step,p1,p2,v1,v2,gamma
    estimates:  step,label,p1,p2,v1,v2,gamma
    snapshots:  step,label,r,p1,p2,v1,v2,gamma
    scores:     step,gospa_total,gospa_loc,gospa_missed,gospa_false
    curves:     filter,eta,k,gospa_total,gospa_loc,gospa_missed,gospa_false,card_true,card_est_mean
    summary:    filter,eta,mean_detections,mean_runtime_s,mean_total_gospa

Writes are retried on ``OSError`` and then surface as ``HarnessError``;
malformed input raises ``ParseError`` with the 1-based line number.
"""

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from tenacity import (
    RetryError,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from cell_tracker.config.settings import get_settings
from cell_tracker.core.errors import HarnessError, ParseError
from cell_tracker.core.logging import get_logger
from cell_tracker.models.frames import ThresholdedFrame
from cell_tracker.models.state import GridGeometry, ObjectState

logger = get_logger(__name__)

STATE_COLUMNS = ("p1", "p2", "v1", "v2", "gamma")
FRAME_COLUMNS = ("cell_index", "amplitude")
TRUTH_COLUMNS = ("object_id", "step", *STATE_COLUMNS)
ESTIMATE_COLUMNS = ("step", "label", *STATE_COLUMNS)
SNAPSHOT_COLUMNS = ("step", "label", "r", *STATE_COLUMNS)
SCORE_COLUMNS = ("step", "gospa_total", "gospa_loc", "gospa_missed", "gospa_false")
CURVE_COLUMNS = (
    "filter",
    "eta",
    "k",
    "gospa_total",
    "gospa_loc",
    "gospa_missed",
    "gospa_false",
    "card_true",
    "card_est_mean",
)
SUMMARY_COLUMNS = ("filter", "eta", "mean_detections", "mean_runtime_s", "mean_total_gospa")


def _write_once(path: Path, header: Sequence[str], rows: list[Sequence[Any]], preamble: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        if preamble:
            fh.write(preamble + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_rows(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    preamble: str = "",
) -> Path:
    """
    Write a CSV file with a header row, retrying transient I/O failures.

    Raises:
        HarnessError: if every attempt fails
    """
    target = Path(path)
    materialized = [list(r) for r in rows]
    attempts = get_settings().IO_RETRY_ATTEMPTS
    try:
        for attempt in Retrying(
            stop=stop_after_attempt(attempts),
            wait=wait_exponential(multiplier=0.1, max=2),
            retry=retry_if_exception_type(OSError),
            reraise=False,
        ):
            with attempt:
                _write_once(target, header, materialized, preamble)
    except RetryError as exc:
        cause = exc.last_attempt.exception()
        logger.error("CSV write failed", path=str(target), attempts=attempts, error=str(cause))
        raise HarnessError(f"Cannot write {target}: {cause}", path=str(target)) from cause
    logger.debug("Wrote CSV", path=str(target), rows=len(materialized))
    return target


def _read_lines(path: str | Path) -> list[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"Cannot read {path}: {exc}") from exc


def _records(
    lines: list[str], required: Sequence[str], first_line: int = 1
) -> Iterable[tuple[int, dict[str, str]]]:
    """
    Yield ``(line_number, row)`` for a CSV body whose header contains ``required``.

    A body without any nonblank line (an empty file) yields no rows.
    """
    if not any(line.strip() for line in lines):
        return
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(f"Header lacks columns {missing}", line=first_line)
    for row in reader:
        line = first_line + reader.line_num - 1
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"Expected {len(header)} fields, found {len(row)}", line=line
            )
        yield line, dict(zip(header, (cell.strip() for cell in row), strict=True))


def _number(value: str, line: int, column: str, kind: type = float) -> Any:
    try:
        out = kind(value)
    except ValueError:
        raise ParseError(f"Column {column!r} is not a valid {kind.__name__}: {value!r}", line=line) from None
    if kind is float and not np.isfinite(out):
        raise ParseError(f"Column {column!r} is not finite", line=line)
    return out


def write_frame(path: str | Path, frame: ThresholdedFrame) -> Path:
    g = frame.geometry
    preamble = f"# eta={frame.eta!r} rows={g.n_rows} cols={g.n_cols} side={g.cell_side!r}"
    return write_rows(path, FRAME_COLUMNS, frame.detections, preamble=preamble)


def read_frame(path: str | Path) -> ThresholdedFrame:
    lines = _read_lines(path)
    if not lines or not lines[0].startswith("#"):
        raise ParseError("Missing '# eta=... rows=... cols=... side=...' line", line=1)
    meta: dict[str, str] = {}
    for token in lines[0].lstrip("#").split():
        key, sep, value = token.partition("=")
        if not sep:
            raise ParseError(f"Malformed metadata token {token!r}", line=1)
        meta[key] = value
    try:
        geometry = GridGeometry(
            n_rows=int(meta["rows"]), n_cols=int(meta["cols"]), cell_side=float(meta["side"])
        )
        eta = float(meta["eta"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"Invalid frame metadata: {exc}", line=1) from exc
    detections = [
        (_number(r["cell_index"], line, "cell_index", int), _number(r["amplitude"], line, "amplitude"))
        for line, r in _records(lines[1:], FRAME_COLUMNS, first_line=2)
    ]
    return ThresholdedFrame.from_detections(geometry, eta, detections)


def read_positions_by_step(path: str | Path) -> dict[int, np.ndarray]:
    """
    Positions grouped by step from any CSV with ``step``, ``p1`` and ``p2`` columns.

    Works for truth, estimate and snapshot files alike.
    """
    grouped: dict[int, list[tuple[float, float]]] = {}
    for line, r in _records(_read_lines(path), ("step", "p1", "p2")):
        step = _number(r["step"], line, "step", int)
        if step < 0:
            raise ParseError("Step must be nonnegative", line=line)
        grouped.setdefault(step, []).append(
            (_number(r["p1"], line, "p1"), _number(r["p2"], line, "p2"))
        )
    return {k: np.array(v, dtype=float).reshape(-1, 2) for k, v in grouped.items()}


def _state_fields(state: ObjectState) -> tuple[float, ...]:
    return (state.p1, state.p2, state.v1, state.v2, state.gamma)


def write_truth(path: str | Path, rows: Iterable[tuple[int, int, ObjectState]]) -> Path:
    """Rows are ``(object_id, step, state)``."""
    return write_rows(
        path, TRUTH_COLUMNS, ((oid, k, *_state_fields(s)) for oid, k, s in rows)
    )


def write_estimates(path: str | Path, rows: Iterable[tuple[int, str, ObjectState]]) -> Path:
    """Rows are ``(step, label, state)``."""
    return write_rows(
        path, ESTIMATE_COLUMNS, ((k, label, *_state_fields(s)) for k, label, s in rows)
    )


def write_snapshots(
    path: str | Path, rows: Iterable[tuple[int, str, float, ObjectState]]
) -> Path:
    """Rows are ``(step, label, r, mean state)``."""
    return write_rows(
        path,
        SNAPSHOT_COLUMNS,
        ((k, label, r, *_state_fields(s)) for k, label, r, s in rows),
    )
