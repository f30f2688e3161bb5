"""Exhaustive grid search over the first-order rule gains (lambda1, lambda2)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .process import FirstOrder
from .simulator import (
    SimConfig,
    close_loop,
    disturbance_paths,
    draw_noise,
    replication_seed,
    summarize,
)

OBJECTIVES = ("mse", "variance", "abs_offset")


@dataclass(frozen=True)
class TuneSpec:
    lambda1_grid: tuple[float, float, float] = (0.0, 1.0, 0.1)
    lambda2_grid: tuple[float, float, float] = (0.0, 1.0, 0.1)
    objective: str = "mse"
    n_reps: int = 20
    base_seed: int = 0

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise InvalidInputError(f"objective must be one of {OBJECTIVES}")
        if self.n_reps < 1:
            raise InvalidInputError("n_reps must be >= 1")
        if self.base_seed < 0:
            raise InvalidInputError("base_seed must be non-negative")
        lo1, hi1, _ = self.lambda1_grid
        lo2, _, _ = self.lambda2_grid
        if lo1 < 0 or hi1 > 1:
            raise InvalidInputError("lambda1 grid must lie within [0, 1]")
        if lo2 < 0:
            raise InvalidInputError("lambda2 grid must be non-negative")
        grid_values(self.lambda1_grid)
        grid_values(self.lambda2_grid)


@dataclass(frozen=True)
class TuneResult:
    best: tuple[float, float]
    best_objective: float
    surface: list[tuple[float, float, float]]

    def objective_at(self, lambda1: float, lambda2: float) -> float:
        for l1, l2, obj in self.surface:
            if l1 == lambda1 and l2 == lambda2:
                return obj
        raise KeyError((lambda1, lambda2))


def grid_values(grid: tuple[float, float, float]) -> list[float]:
    """Points ``lo, lo+step, ...`` up to ``hi`` inclusive, rounded to 12
    decimals so that ``0.1`` steps land on ``0.3`` rather than ``0.30000000000000004``."""
    lo, hi, step = grid
    if not step > 0:
        raise InvalidInputError(f"grid step must be > 0, got {step}")
    if lo > hi:
        raise InvalidInputError(f"grid min {lo} exceeds max {hi}")
    n = int(np.floor((hi - lo) / step + 1e-9))
    return [round(lo + k * step, 12) for k in range(n + 1)]


def _objective(summary, tau: float, kind: str) -> float:
    if kind == "mse":
        return summary.mse_z
    if kind == "variance":
        return summary.var_z
    return abs(summary.mean_z - tau)


def grid_search(config_base: SimConfig, spec: TuneSpec) -> TuneResult:
    """Evaluate every grid point on the same noise paths and return the argmin.

    ``config_base.rule`` is ignored.  Ties go to the smaller lambda1, then
    the smaller lambda2.
    """
    l1s, l2s = grid_values(spec.lambda1_grid), grid_values(spec.lambda2_grid)
    seeds = [replication_seed(spec.base_seed, r) for r in range(spec.n_reps)]
    v, e = draw_noise(config_base.horizon, seeds)
    x = disturbance_paths(config_base.disturbance, v)
    eps = config_base.sensor.sigma_eps * e
    tau = config_base.process.tau

    surface = []
    best, best_obj = None, np.inf
    for l1 in l1s:
        for l2 in l2s:
            paths = close_loop(config_base, x, eps, FirstOrder(l1, l2))
            obj = _objective(summarize(paths.z, tau), tau, spec.objective)
            surface.append((l1, l2, obj))
            if obj < best_obj:
                best, best_obj = (l1, l2), obj
    if best is None:
        # every objective was NaN/inf
        l1, l2, best_obj = surface[0]
        best = (l1, l2)
    return TuneResult(best, float(best_obj), surface)
