"""
Plant, disturbance and sensor models for the gluten blending loop, the two
feedback rules, and the first-order transfer function helpers.

Raw flour with protein content ``x`` (percent) arrives at a fixed rate ``D``
and gluten is dosed at rate ``u``.  In the rescaled units used throughout the
simulator, the output protein quantity is simply ``y = u_prev + x`` and the
analyser reports ``z = y + eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

from .errors import InvalidInputError, NoFixedPointError


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise InvalidInputError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class BlendProcess:
    """Plant constants.

    Parameters
    ----------
    flow_rate_d : float
        Raw flour feed rate D (g/s).
    u0 : float
        Initial gluten feed rate (g/s).
    tau : float
        Target output protein, in rescaled units.
    exact_balance : bool
        Use the full mass balance instead of the additive approximation.
    """

    flow_rate_d: float = 100.0
    u0: float = 6.0
    tau: float = 16.0
    exact_balance: bool = False

    def __post_init__(self):
        _check_finite(flow_rate_d=self.flow_rate_d, u0=self.u0, tau=self.tau)
        if self.flow_rate_d <= 0:
            raise InvalidInputError("flow_rate_d must be > 0")
        if self.u0 < 0:
            raise InvalidInputError("u0 must be >= 0")
        if self.tau <= 0:
            raise InvalidInputError("tau must be > 0")


@dataclass(frozen=True)
class Ar1Model:
    """Raw-flour protein disturbance ``x_i - mu = phi (x_{i-1} - mu) + v_i``.

    ``sigma_v`` is the innovation standard deviation.  A unit root is
    rejected because the simulator relies on stationarity.
    """

    mu: float = 10.0
    phi: float = 0.7
    sigma_v: float = math.sqrt(0.5)

    def __post_init__(self):
        _check_finite(mu=self.mu, phi=self.phi, sigma_v=self.sigma_v)
        if not 0.0 <= self.phi < 1.0:
            raise InvalidInputError(f"phi must satisfy 0 <= phi < 1, got {self.phi}")
        if self.sigma_v < 0:
            raise InvalidInputError("sigma_v must be >= 0")

    @property
    def stationary_variance(self) -> float:
        return self.sigma_v**2 / (1.0 - self.phi**2)


@dataclass(frozen=True)
class SensorModel:
    """Additive Gaussian measurement error; ``sigma_eps`` is a standard deviation."""

    sigma_eps: float = math.sqrt(0.5)

    def __post_init__(self):
        _check_finite(sigma_eps=self.sigma_eps)
        if self.sigma_eps < 0:
            raise InvalidInputError("sigma_eps must be >= 0")


# -- control rules -----------------------------------------------------------


@dataclass(frozen=True)
class Integral:
    """Integral rule: move the feed by the full observed deviation."""

    def update(self, u_prev, u0, z, tau):
        # Works elementwise on numpy arrays as well as floats.
        return u_prev - (z - tau)

    def label(self) -> str:
        return "integral"


@dataclass(frozen=True)
class FirstOrder:
    """First-order rule ``u_i - u0 = lambda1 (u_{i-1} - u0) - lambda2 (z_i - tau)``.

    ``FirstOrder(1, 1)`` reproduces :class:`Integral` bit for bit: the update
    is evaluated as ``(lambda1*u_prev + (1-lambda1)*u0) - lambda2*(z - tau)``,
    which with unit gains collapses to ``(u_prev + 0.0) - (z - tau)``.
    """

    lambda1: float
    lambda2: float

    def __post_init__(self):
        _check_finite(lambda1=self.lambda1, lambda2=self.lambda2)
        if not 0.0 <= self.lambda1 <= 1.0:
            raise InvalidInputError(f"lambda1 must lie in [0, 1], got {self.lambda1}")
        if self.lambda2 < 0:
            raise InvalidInputError(f"lambda2 must be >= 0, got {self.lambda2}")

    def update(self, u_prev, u0, z, tau):
        return (self.lambda1 * u_prev + (1.0 - self.lambda1) * u0) - self.lambda2 * (z - tau)

    def label(self) -> str:
        return f"first-order({self.lambda1:g},{self.lambda2:g})"


ControlRule = Union[Integral, FirstOrder]


class RuleUpdate(NamedTuple):
    u: float
    clamped: bool


# -- plant -------------------------------------------------------------------


def mass_balance_exact(u_prev: float, x: float, d: float = 100.0) -> float:
    """Protein percentage of the blend from the full mass balance.

    ``(u_prev + x*d/100) * 100 / (d + u_prev)``; for ``d = 100`` this is
    ``(u_prev + x) * 100 / (100 + u_prev)``.
    """
    _check_finite(u_prev=u_prev, x=x, d=d)
    if d <= 0:
        raise InvalidInputError("d must be > 0")
    if u_prev < 0:
        raise InvalidInputError("u_prev must be >= 0")
    if not 0.0 <= x <= 100.0:
        raise InvalidInputError("x must be a percentage in [0, 100]")
    return (u_prev + x * d / 100.0) * 100.0 / (d + u_prev)


def rescale_factor(process: BlendProcess) -> float:
    """Ratio ``(D + u0) / D`` converting percentages to rescaled quantities."""
    return (process.flow_rate_d + process.u0) / process.flow_rate_d


def process_output(u_prev: float, x: float, process: BlendProcess | None = None) -> float:
    """Output protein in rescaled units.

    With the additive approximation (default) this is ``u_prev + x``.  When
    ``process.exact_balance`` is set the exact mass balance is used and
    multiplied by :func:`rescale_factor`, so both forms agree at ``u_prev == u0``.
    """
    _check_finite(u_prev=u_prev, x=x)
    if process is not None and process.exact_balance:
        return mass_balance_exact(u_prev, x, process.flow_rate_d) * rescale_factor(process)
    return u_prev + x


def disturbance_step(model: Ar1Model, x_prev: float, v: float) -> float:
    return model.mu + model.phi * (x_prev - model.mu) + v


def measure(y: float, eps: float) -> float:
    return y + eps


def rule_update(rule: ControlRule, u_prev: float, u0: float, z: float, tau: float,
                clamp: bool = False) -> RuleUpdate:
    """Next gluten feed rate.

    If ``clamp`` is set a negative result is replaced by 0 and reported via
    ``RuleUpdate.clamped``.
    """
    u = rule.update(u_prev, u0, z, tau)
    if clamp and u < 0:
        return RuleUpdate(0.0, True)
    return RuleUpdate(u, False)


def noise_free_fixed_point(rule: ControlRule, mu: float, u0: float, tau: float) -> tuple[float, float]:
    """Equilibrium ``(u*, z*)`` of the loop with ``x == mu`` and no sensor noise.

    Raises
    ------
    NoFixedPointError
        For ``FirstOrder(1, 0)``, where the feed never moves.
    """
    if isinstance(rule, Integral):
        u_star = tau - mu
    else:
        denom = (1.0 - rule.lambda1) + rule.lambda2
        if denom == 0:
            raise NoFixedPointError("(1 - lambda1) + lambda2 = 0: every feed rate is stationary")
        u_star = u0 + rule.lambda2 * (tau - mu - u0) / denom
    return u_star, u_star + mu


# -- transfer functions ------------------------------------------------------


class DiscreteFirstOrder(NamedTuple):
    """Coefficients of ``u_i = a u_{i-1} + b d_i``."""

    a: float
    b: float
    stable: bool


@dataclass(frozen=True)
class FirstOrderTf:
    """First-order lag ``1 / (1 + k s)`` with time constant ``k``."""

    k: float

    def __post_init__(self):
        _check_finite(k=self.k)
        if self.k <= 0:
            raise InvalidInputError(f"time constant k must be > 0, got {self.k}")


def discretize_first_order(tf: FirstOrderTf) -> DiscreteFirstOrder:
    """Backward (left) difference of ``k du/dt + u = d``.

    ``k (u_i - u_{i-1}) + u_{i-1} = d_i`` gives ``a = (k - 1)/k`` and
    ``b = 1/k``; the recursion is stable iff ``|a| < 1``, i.e. ``k > 1/2``.
    """
    k = tf.k
    a = (k - 1.0) / k
    return DiscreteFirstOrder(a, 1.0 / k, abs(a) < 1.0)


@dataclass(frozen=True)
class ClosedLoopTf:
    """Disturbance-to-output map ``(1 + k s) / ((1 + k s) + beta)`` of the loop."""

    k: float
    beta: float = 1.0

    def __post_init__(self):
        _check_finite(k=self.k, beta=self.beta)
        if self.k <= 0:
            raise InvalidInputError(f"time constant k must be > 0, got {self.k}")

    def pole(self) -> float:
        return -(1.0 + self.beta) / self.k

    @property
    def stable(self) -> bool:
        return self.pole() < 0

    def gain(self, s: complex) -> complex:
        num = 1.0 + self.k * s
        den = num + self.beta
        if den == 0:
            raise ZeroDivisionError(f"s = {s} is the closed-loop pole")
        return num / den


def closed_loop_eval(tf: ClosedLoopTf, s: complex) -> complex:
    return tf.gain(s)
