"""
Closed-loop Monte-Carlo simulation of the blending process.

Each step ``i = 1..horizon`` runs disturbance -> plant -> sensor -> rule::

    x_i = mu + phi (x_{i-1} - mu) + v_i          (x_0 = mu)
    y_i = u_{i-1} + x_i
    z_i = y_i + eps_i
    u_i = rule(u_{i-1}, u0, z_i, tau)

Replications are run side by side as rows of 2-d arrays.  Replication ``r``
draws its noise from ``replication_seed(base_seed, r)``; disturbance and
sensor noise come from two independent child streams of that seed, so the
noise paths never depend on the rule being simulated (common random numbers).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .process import (
    Ar1Model,
    BlendProcess,
    ControlRule,
    Integral,
    SensorModel,
    rescale_factor,
)


@dataclass(frozen=True)
class SimConfig:
    process: BlendProcess = field(default_factory=BlendProcess)
    disturbance: Ar1Model = field(default_factory=Ar1Model)
    sensor: SensorModel = field(default_factory=SensorModel)
    rule: ControlRule = field(default_factory=Integral)
    horizon: int = 50
    clamp_u: bool = False

    def __post_init__(self):
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise InvalidInputError(f"horizon must be a positive integer, got {self.horizon}")

    def with_rule(self, rule: ControlRule) -> "SimConfig":
        return replace(self, rule=rule)


@dataclass(frozen=True)
class SimTrace:
    """One simulated run.  ``x``, ``y``, ``z`` and ``eps`` have ``horizon``
    entries (steps 1..horizon); ``u`` has ``horizon + 1`` with ``u[0] = u0``."""

    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    z: np.ndarray
    eps: np.ndarray
    clamp_events: list[int]

    @property
    def horizon(self) -> int:
        return len(self.z)


@dataclass(frozen=True)
class ReplicationSummary:
    """Cross-replication statistics of the measured output.

    ``mean_z``, ``var_z`` and ``mse_z`` pool every replication over steps
    ``i >= 2`` (step 1 is excluded as burn-in when ``horizon > 1``).
    ``per_step_mean_z`` keeps all steps.
    """

    n_reps: int
    horizon: int
    mean_z: float
    var_z: float
    mse_z: float
    per_step_mean_z: np.ndarray = field(repr=False)
    per_rep_stats: list[tuple[float, float]] = field(repr=False)


@dataclass(frozen=True)
class Paths:
    """Simulated arrays for several replications, shape ``(n_reps, horizon)``
    (``u`` has one extra leading column holding u0)."""

    x: np.ndarray
    u: np.ndarray
    y: np.ndarray
    z: np.ndarray
    eps: np.ndarray
    clamped: np.ndarray

    def trace(self, r: int) -> SimTrace:
        return SimTrace(
            x=self.x[r], u=self.u[r], y=self.y[r], z=self.z[r], eps=self.eps[r],
            clamp_events=(np.flatnonzero(self.clamped[r]) + 1).tolist(),
        )


def replication_seed(base_seed: int, r: int) -> int:
    """64-bit seed for replication ``r``, mixed from ``(base_seed, r)`` by
    numpy's SeedSequence hash."""
    if base_seed < 0 or r < 0:
        raise InvalidInputError("seeds and replication indices must be non-negative")
    ss = np.random.SeedSequence(base_seed, spawn_key=(r,))
    return int(ss.generate_state(1, np.uint64)[0])


def draw_noise(horizon: int, seeds: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Standard-normal innovation and sensor draws, one row per seed."""
    v = np.empty((len(seeds), horizon))
    e = np.empty((len(seeds), horizon))
    for row, seed in enumerate(seeds):
        if seed < 0:
            raise InvalidInputError("seed must be non-negative")
        ss_v, ss_e = np.random.SeedSequence(seed).spawn(2)
        v[row] = np.random.default_rng(ss_v).standard_normal(horizon)
        e[row] = np.random.default_rng(ss_e).standard_normal(horizon)
    return v, e


def disturbance_paths(model: Ar1Model, v_std: np.ndarray) -> np.ndarray:
    v = model.sigma_v * v_std
    x = np.empty_like(v)
    prev = np.full(v.shape[0], model.mu)
    for i in range(v.shape[1]):
        prev = model.mu + model.phi * (prev - model.mu) + v[:, i]
        x[:, i] = prev
    return x


def close_loop(config: SimConfig, x: np.ndarray, eps: np.ndarray,
               rule: ControlRule | None = None) -> Paths:
    """Run the feedback loop over given disturbance and sensor-noise paths."""
    rule = config.rule if rule is None else rule
    proc = config.process
    u0, tau = proc.u0, proc.tau
    n_reps, horizon = x.shape
    u = np.empty((n_reps, horizon + 1))
    y = np.empty_like(x)
    z = np.empty_like(x)
    clamped = np.zeros(x.shape, dtype=bool)
    u[:, 0] = u0
    d, scale = proc.flow_rate_d, rescale_factor(proc)
    u_prev = u[:, 0]
    for i in range(horizon):
        if proc.exact_balance:
            yi = (u_prev + x[:, i] * d / 100.0) * 100.0 / (d + u_prev) * scale
        else:
            yi = u_prev + x[:, i]
        zi = yi + eps[:, i]
        ui = rule.update(u_prev, u0, zi, tau)
        if config.clamp_u:
            neg = ui < 0
            if neg.any():
                ui = np.where(neg, 0.0, ui)
                clamped[:, i] = neg
        y[:, i] = yi
        z[:, i] = zi
        u[:, i + 1] = ui
        u_prev = ui
    return Paths(x, u, y, z, eps, clamped)


def simulate_paths(config: SimConfig, n_reps: int, base_seed: int) -> Paths:
    if n_reps < 1:
        raise InvalidInputError("n_reps must be >= 1")
    seeds = [replication_seed(base_seed, r) for r in range(n_reps)]
    v, e = draw_noise(config.horizon, seeds)
    x = disturbance_paths(config.disturbance, v)
    return close_loop(config, x, config.sensor.sigma_eps * e)


def run_trace(config: SimConfig, seed: int) -> SimTrace:
    v, e = draw_noise(config.horizon, [seed])
    x = disturbance_paths(config.disturbance, v)
    return close_loop(config, x, config.sensor.sigma_eps * e).trace(0)


def summarize(z: np.ndarray, tau: float) -> ReplicationSummary:
    z = np.atleast_2d(z)
    n_reps, horizon = z.shape
    pooled = z[:, 1:] if horizon > 1 else z
    ddof = 1 if pooled.size > 1 else 0
    per_rep = [
        (float(row.mean()), float(row.var(ddof=1)) if row.size > 1 else 0.0)
        for row in pooled
    ]
    return ReplicationSummary(
        n_reps=n_reps,
        horizon=horizon,
        mean_z=float(pooled.mean()),
        var_z=float(pooled.var(ddof=ddof)),
        mse_z=float(np.mean((pooled - tau) ** 2)),
        per_step_mean_z=z.mean(axis=0),
        per_rep_stats=per_rep,
    )


def run_replications(config: SimConfig, n_reps: int, base_seed: int) -> ReplicationSummary:
    paths = simulate_paths(config, n_reps, base_seed)
    return summarize(paths.z, config.process.tau)


@dataclass(frozen=True)
class ComparisonRow:
    rule: ControlRule
    summary: ReplicationSummary
    abs_offset: float


def compare_rules(config_base: SimConfig, rules: Sequence[ControlRule], n_reps: int,
                  base_seed: int) -> list[ComparisonRow]:
    """Summaries for each rule, all driven by the same noise paths."""
    if len(rules) < 2:
        raise InvalidInputError("compare_rules needs at least two rules")
    if n_reps < 1:
        raise InvalidInputError("n_reps must be >= 1")
    seeds = [replication_seed(base_seed, r) for r in range(n_reps)]
    v, e = draw_noise(config_base.horizon, seeds)
    x = disturbance_paths(config_base.disturbance, v)
    eps = config_base.sensor.sigma_eps * e
    tau = config_base.process.tau
    rows = []
    for rule in rules:
        s = summarize(close_loop(config_base, x, eps, rule).z, tau)
        rows.append(ComparisonRow(rule, s, abs(s.mean_z - tau)))
    return rows


def analytic_integral_error_variance(disturbance: Ar1Model, sensor: SensorModel) -> float:
    """Stationary variance of ``z_i - tau`` under the integral rule.

    The error telescopes to ``(x_i - x_{i-1}) + (eps_i - eps_{i-1})``, so its
    variance is ``2 sigma_v^2 / (1 + phi) + 2 sigma_eps^2``.
    """
    return 2.0 * disturbance.sigma_v**2 / (1.0 + disturbance.phi) + 2.0 * sensor.sigma_eps**2
