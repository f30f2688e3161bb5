"""Readers and writers for the CSV files exchanged by the command line tool.

All files use a period as decimal separator, UTF-8 and LF line endings.
Floats are written with ``repr`` so that re-reading them is lossless.
"""
from __future__ import annotations

import csv
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .charts import ControlChart
from .errors import InvalidInputError

FIXTURES = {"table1": "Raw-flour protein content, 50 simulated AR(1) observations"}


class CsvFormatError(InvalidInputError):
    """A CSV file could not be parsed; the message names the offending row."""


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def fixture_path(name: str):
    if name not in FIXTURES:
        raise InvalidInputError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return resources.files("blendloop").joinpath("data", f"{name}.csv")


def read_series_csv(path, column: str = "value") -> np.ndarray:
    """Read one numeric column (default ``value``) from a CSV with a header row."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        if column not in header:
            raise CsvFormatError(f"{path}: header has no column {column!r} (found {header})")
        col = header.index(column)
        values = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvFormatError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
            cell = row[col].strip()
            try:
                v = float(cell)
            except ValueError:
                raise CsvFormatError(f"{path}: row {lineno}: non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise CsvFormatError(f"{path}: row {lineno}: non-finite value {cell!r}")
            values.append(v)
    if not values:
        raise CsvFormatError(f"{path}: no data rows")
    return np.array(values)


def write_series_csv(path, values, first_index: int = 1) -> None:
    _write(path, ["i", "value"], ((first_index + k, v) for k, v in enumerate(values)))


def write_chart_csv(path, chart: ControlChart) -> None:
    flagged = set(chart.signals)
    _write(
        path,
        ["idx", "point", "center", "ucl", "lcl", "signal"],
        ((chart.first_index + k, p, chart.center, chart.ucl, chart.lcl, k in flagged)
         for k, p in enumerate(chart.points)),
    )


def write_trace_csv(path, trace) -> None:
    """Row ``i`` holds ``x_i, u_i, y_i, z_i``, where ``u_i`` is the feed chosen
    after measuring ``z_i``."""
    clamped = set(trace.clamp_events)
    _write(
        path,
        ["i", "x", "u", "y", "z", "clamped"],
        ((i, trace.x[i - 1], trace.u[i], trace.y[i - 1], trace.z[i - 1], i in clamped)
         for i in range(1, trace.horizon + 1)),
    )


SUMMARY_HEADER = ["rule", "n_reps", "horizon", "mean_z", "var_z", "abs_offset"]


def summary_row(label: str, summary, tau: float) -> list:
    return [label, summary.n_reps, summary.horizon, summary.mean_z, summary.var_z,
            abs(summary.mean_z - tau)]


def write_summary_csv(path, rows) -> None:
    _write(path, SUMMARY_HEADER, rows)


def write_per_step_csv(path, per_step_mean_z) -> None:
    _write(path, ["i", "mean_z"], ((k + 1, v) for k, v in enumerate(per_step_mean_z)))


def write_surface_csv(path, surface) -> None:
    _write(path, ["lambda1", "lambda2", "objective"], surface)
