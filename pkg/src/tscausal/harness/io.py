"""CSV / JSON ingestion and persistence.

Trajectory files use the header ``time,<name1>,<name2>,...`` with decimal
floats and LF line endings; the time column must be uniformly spaced
(relative tolerance 1e-6) and is used to infer dt. Floats are written with
``repr`` so that write/read round-trips are exact.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from ..errors import EmptyFile, NonUniformSampling, ParseError
from ..timeseries import TimeSeries

TIME_COLUMN = "time"
_REL_TOL = 1e-6


def _parse_float(text: str, line_no: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise ParseError(f"line {line_no}: {column}={text!r} is not a number") from exc
    if not math.isfinite(value):
        raise ParseError(f"line {line_no}: {column}={text!r} is not finite")
    return value


def parse_timeseries_csv(text: str) -> dict[str, TimeSeries]:
    """Parse trajectory CSV text into named series (see module docstring)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile("no header row") from None
    header = [h.strip() for h in header]
    if len(header) < 2 or header[0] != TIME_COLUMN:
        raise ParseError(
            f"expected header '{TIME_COLUMN},<name>,...', got {','.join(header)!r}"
        )
    names = header[1:]
    if len(set(names)) != len(names):
        raise ParseError(f"duplicate column names in {names}")
    times: list[float] = []
    columns: list[list[float]] = [[] for _ in names]
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(
                f"line {line_no}: expected {len(header)} cells, got {len(row)}"
            )
        times.append(_parse_float(row[0], line_no, TIME_COLUMN))
        for col, cell in zip(columns, row[1:], strict=True):
            col.append(_parse_float(cell, line_no, "value"))
    if len(times) < 2:
        raise EmptyFile(f"need at least 2 data rows, got {len(times)}")

    dt = times[1] - times[0]
    if dt <= 0:
        raise NonUniformSampling(f"time must increase, got step {dt}")
    for i in range(1, len(times)):
        step = times[i] - times[i - 1]
        if abs(step - dt) > _REL_TOL * max(abs(dt), abs(step)):
            raise NonUniformSampling(
                f"row {i + 1}: time step {step} differs from {dt} beyond tolerance"
            )
    return {
        name: TimeSeries(col, dt, name=name) for name, col in zip(names, columns)
    }


def read_csv(path: str | Path) -> dict[str, TimeSeries]:
    """Read a trajectory CSV file into named series."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    return parse_timeseries_csv(path.read_text())


def format_timeseries_csv(series: dict[str, TimeSeries]) -> str:
    """Render named series as trajectory CSV text."""
    if not series:
        raise EmptyFile("nothing to write")
    lengths = {len(s) for s in series.values()}
    dts = {s.dt for s in series.values()}
    if len(lengths) != 1 or len(dts) != 1:
        raise ParseError("all series must share length and dt")
    n = lengths.pop()
    dt = dts.pop()
    names = list(series)
    lines = [",".join([TIME_COLUMN, *names])]
    cols = [series[name].values for name in names]
    for i in range(n):
        cells = [repr(i * dt)] + [repr(float(col[i])) for col in cols]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_timeseries_csv(path: str | Path, series: dict[str, TimeSeries]) -> None:
    Path(path).write_text(format_timeseries_csv(series))


RESULT_COLUMNS = ("sweep_value", "method", "direction", "median", "p5", "p95", "trials")


def _row_cells(row) -> list:
    return [
        repr(float(row.sweep_value)),
        row.method,
        row.direction,
        repr(float(row.median)),
        repr(float(row.p5)),
        repr(float(row.p95)),
        str(row.trials),
    ]


def format_results_csv(rows) -> str:
    lines = [",".join(RESULT_COLUMNS)]
    lines.extend(",".join(_row_cells(r)) for r in rows)
    return "\n".join(lines) + "\n"


def format_results_json(rows) -> str:
    payload = [
        {
            "sweep_value": float(r.sweep_value),
            "method": r.method,
            "direction": r.direction,
            "median": float(r.median),
            "p5": float(r.p5),
            "p95": float(r.p95),
            "trials": int(r.trials),
        }
        for r in rows
    ]
    return json.dumps(payload, indent=2) + "\n"


def write_results_csv(path: str | Path, rows) -> None:
    Path(path).write_text(format_results_csv(rows))


def write_results_json(path: str | Path, rows) -> None:
    Path(path).write_text(format_results_json(rows))
