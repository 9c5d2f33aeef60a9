"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    pass


class ContractViolationError(ValueError):
    """An operator does not satisfy a property the caller relies on."""


class ConvergenceError(RuntimeError):
    """An iterative method stopped before meeting its tolerance.

    ``residuals`` holds the best residual norms reached, when available.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DegenerateNormalizationError(ValueError):
    """A kernel row sum is too small to normalize by."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class FormatError(ValueError):
    """A data file does not match its declared format."""
