"""Exception types shared across the package."""


class EitnetError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(EitnetError, ValueError):
    """Invalid option, hyperparameter, or config-file entry."""


class DataError(EitnetError, ValueError):
    """Malformed or missing input data (points, boundary tables, ...)."""


class DegenerateDomainError(EitnetError):
    """Rejection sampling acceptance rate too low to be a usable domain."""


class UnsupportedBackingError(EitnetError, TypeError):
    """A field backing does not provide the derivatives an operation needs."""


class OutOfSupportError(EitnetError, ValueError):
    """Grid interpolation queried outside the masked region's stencil."""


class NumericalOverflowError(EitnetError, FloatingPointError):
    """Non-finite value produced during evaluation or differentiation."""

    def __init__(self, message, point_index=None):
        super().__init__(message)
        self.point_index = point_index


class DivergenceError(EitnetError, FloatingPointError):
    """Training loss exceeded the divergence guard.

    Carries the network and history accumulated up to the abort so callers
    can persist a last checkpoint.
    """

    def __init__(self, message, net=None, history=None):
        super().__init__(message)
        self.net = net
        self.history = history or []


class SolverError(EitnetError):
    """Linear solve failed to reach the required residual norm."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateReferenceError(EitnetError, ValueError):
    """Reference field unusable for relative-error normalization."""


class CheckpointError(EitnetError, ValueError):
    """Checkpoint file has a wrong version, is truncated, or is corrupted."""
