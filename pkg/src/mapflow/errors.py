"""Exception hierarchy shared by every module."""


class MapflowError(Exception):
    """Base class for all package errors."""


class DomainError(MapflowError, ValueError):
    """Invalid input (non-finite value, unsupported order, degenerate map)."""


class NumericError(MapflowError, ArithmeticError):
    """A numerical procedure failed to meet its contract.

    ``residuals`` carries whatever diagnostic values the failing routine had
    when it gave up.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DegenerateSpectrum(NumericError):
    """Two eigenvalues are too close for a diagonalising similarity transform."""


class InconclusiveWindow(NumericError):
    """Too few maxima in the measurement window to classify the attractor."""


class TrajectoryDiverged(NumericError):
    """The trajectory left the divergence bound before the measurement ended."""

    def __init__(self, message, at_time):
        super().__init__(message)
        self.at_time = at_time
