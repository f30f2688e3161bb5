"""Individuals and moving-range (X, Rm) control charts."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError
from .timeseries import as_series

# Shewhart factors for moving ranges of span 2 (d2 = 1.128).
E2 = 2.66
D4 = 3.267

INDIVIDUALS = "individuals"
MOVING_RANGE = "moving_range"


@dataclass(frozen=True)
class ControlChart:
    """A charted statistic with its center line and limits.

    ``signals`` holds positions into ``points`` that fall strictly outside
    ``[lcl, ucl]``.  ``first_index`` is the observation index of
    ``points[0]`` and is only used for labelling exports.
    """

    kind: str
    center: float
    ucl: float
    lcl: float
    points: np.ndarray = field(repr=False)
    signals: tuple[int, ...] = ()
    first_index: int = 1

    @property
    def degenerate(self) -> bool:
        return self.ucl == self.lcl


def detect_signals(chart: ControlChart) -> list[int]:
    pts = np.asarray(chart.points)
    return np.flatnonzero((pts > chart.ucl) | (pts < chart.lcl)).tolist()


def moving_ranges(series) -> np.ndarray:
    xs = as_series(series)
    if xs.size < 2:
        raise InsufficientDataError("moving ranges need at least 2 observations")
    return np.abs(np.diff(xs))


def _chart(kind, center, ucl, lcl, points, first_index) -> ControlChart:
    chart = ControlChart(kind, center, ucl, lcl, points, (), first_index)
    return ControlChart(kind, center, ucl, lcl, points, tuple(detect_signals(chart)), first_index)


def build_charts(series, first_index: int = 1) -> tuple[ControlChart, ControlChart]:
    """Individuals chart and moving-range chart for ``series``.

    Limits are ``mean +/- 2.66 MRbar`` for individuals and ``[0, 3.267 MRbar]``
    for moving ranges.  A constant series yields degenerate charts with
    ``lcl == center == ucl`` and no signals.
    """
    xs = as_series(series)
    mr = moving_ranges(xs)
    mr_bar = float(mr.mean())
    if mr_bar == 0:
        center = float(xs[0])  # avoid rounding drift from np.mean on constants
    else:
        center = float(xs.mean())
    spread = E2 * mr_bar
    individuals = _chart(INDIVIDUALS, center, center + spread, center - spread, xs, first_index)
    mr_chart = _chart(MOVING_RANGE, mr_bar, D4 * mr_bar, 0.0, mr, first_index + 1)
    return individuals, mr_chart
