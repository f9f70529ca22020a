"""Exception types shared across the package."""

import numpy as np


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Matrix could not be factorized even after the jitter ladder was exhausted."""


class SingularInnovationCovariance(NotPositiveDefinite):
    """Innovation covariance of a measurement update is not positive definite."""


class SingularMatrix(np.linalg.LinAlgError):
    """A matrix that must be inverted (via its factor) is singular."""


class DofTooSmall(ValueError):
    """Degrees of freedom must exceed 2 for the covariance to exist."""


class ModelDofTooSmall(DofTooSmall):
    """Integrand-model degrees of freedom must exceed 2."""


class DimensionMismatch(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class TooFewValues(ValueError):
    pass


class ConfigError(ValueError):
    """Invalid benchmark configuration."""


class FilterFailure(RuntimeError):
    """Numeric failure inside a filter recursion.

    Attributes
    ----------
    step : int
        Zero-based index of the measurement at which the failure occurred.
    states : list
        Filtered states computed before the failure.
    """

    def __init__(self, step, states, cause=None):
        self.step = step
        self.states = states
        self.cause = cause
        super().__init__(f"filter failed at step {step}: {cause!r}")
