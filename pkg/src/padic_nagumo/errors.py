"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """An argument is outside the domain of an operation."""


class InvalidWindow(InvalidArgument):
    """A shell window with j_min > j_max was requested."""


class DivergentConstant(InvalidArgument):
    """A constant is requested at an index where its defining integral diverges."""


class Unsupported(InvalidArgument):
    """The operation is not defined for the given prime."""


class IterationDiverged(RuntimeError):
    """Picard iteration did not reach tolerance.

    The residual history is kept on ``residuals``.
    """

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = list(residuals)


class EstimateFailed(RuntimeError):
    """No existence horizon satisfies the required inequalities."""


class ConfigError(ValueError):
    """A run configuration could not be parsed or validated."""
