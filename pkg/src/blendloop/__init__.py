"""Feedback control of a gluten blending process under AR(1) disturbances,
with disturbance-model fitting and individuals/moving-range charting."""

from .errors import (
    BlendloopError,
    DegenerateSeriesError,
    InsufficientDataError,
    InvalidInputError,
    NoFixedPointError,
)
from .process import (
    Ar1Model,
    BlendProcess,
    ClosedLoopTf,
    FirstOrder,
    FirstOrderTf,
    Integral,
    SensorModel,
)
from .simulator import SimConfig, compare_rules, run_replications, run_trace
from .tuner import TuneSpec, grid_search

__version__ = "0.1.0"
