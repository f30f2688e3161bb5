"""Exception types shared across the package."""


class BlendloopError(ValueError):
    """Base class for all errors raised by blendloop."""


class InvalidInputError(BlendloopError):
    """An argument violates a documented precondition."""


class InsufficientDataError(BlendloopError):
    """Too few observations for the requested statistic."""


class DegenerateSeriesError(BlendloopError):
    """The data has no variation where variation is required
    (constant regressor, zero-variance moments)."""


class NoFixedPointError(BlendloopError):
    """The noise-free closed loop has no unique equilibrium."""
