"""Exception types shared across the library."""


class NoescError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(NoescError):
    """Vector dimension does not match the expected one."""


class NonFiniteState(NoescError):
    """An integrated state became NaN or infinite (blow-up)."""


class NonFiniteValue(NoescError):
    """A performance evaluation returned NaN or infinity."""


class OutOfRange(NoescError):
    """Value at or beyond the open range of the saturation map."""


class OutOfDomain(NoescError):
    """Time outside the transition window of a trajectory piece."""


class UnsupportedOrder(NoescError):
    """Requested derivative order is not supported."""


class NoConvergence(NoescError):
    """Root finding did not reach the requested residual tolerance."""

    def __init__(self, message, iterations=None, best_residual=None, best_p=None):
        super().__init__(message)
        self.iterations = iterations
        self.best_residual = best_residual
        self.best_p = best_p


class ConfigError(NoescError):
    """Invalid experiment configuration."""
