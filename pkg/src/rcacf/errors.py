"""Exception hierarchy shared by all rcacf modules."""


class TrackingError(Exception):
    """Base class for all rcacf errors."""


class DimensionError(TrackingError, ValueError):
    """Array shapes do not satisfy an operation's contract."""


class ParameterError(TrackingError, ValueError):
    """A scalar argument or configuration value is out of range."""


class NumericError(TrackingError, ArithmeticError):
    """A numeric consistency check failed (e.g. large imaginary residue)."""


class LoadError(TrackingError):
    """A sequence or result file could not be loaded."""


class ParseError(LoadError):
    """A line of a data file is malformed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConsistencyError(TrackingError):
    """Cross-referenced inputs disagree (unknown sequence, mismatched sets)."""


class SynthSpecError(ParameterError):
    """A synthetic sequence description violates its own invariants."""
