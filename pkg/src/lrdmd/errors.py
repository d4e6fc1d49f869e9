"""Exception hierarchy shared by the lrdmd modules."""


class LrdmdError(Exception):
    """Base class for all library errors."""


class InvalidInput(LrdmdError, ValueError):
    """Bad shape, range or non-finite value in an argument."""


class ParseError(InvalidInput):
    """A snapshot or artifact file could not be parsed.

    ``location`` is a human readable pointer (``line 4`` or ``offset 37``).
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{message} ({location})"
        super().__init__(message)


class NumericalFailure(LrdmdError):
    """An underlying dense solver did not converge or returned garbage."""


class NotConverged(LrdmdError):
    """An iterative solver hit its iteration cap.

    The last iterate and residual history are attached so callers can still
    inspect or use them.
    """

    def __init__(self, message, last_iterate=None, residuals=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residuals = residuals


class GammaGridExhausted(LrdmdError):
    """No penalty weight in the grid produced few enough sparse modes.

    ``result`` holds the best attempt as a ``(factors, report)`` tuple.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class AlphaBracketFailure(LrdmdError):
    """The nuclear-norm weight bracket does not contain the target rank."""


class SpectralPairingError(NumericalFailure):
    """Left and right eigenvalues could not be matched."""


class DefectiveOperator(NumericalFailure):
    """A left/right eigenvector pair is (numerically) orthogonal."""


class NotDiagonalizable(LrdmdError):
    """A spectral reduced model was requested for a non-diagonalizable operator."""


class CapExceeded(LrdmdError):
    """A dense n x n object was requested above the materialization cap."""
