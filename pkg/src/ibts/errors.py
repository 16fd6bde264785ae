"""Exception hierarchy shared by every module."""


class IBTSError(Exception):
    """Base class for all errors raised by this package."""


class ValidityError(IBTSError, ValueError):
    """A value violates a domain invariant (interval, sequence, dataset)."""


class ParseError(IBTSError, ValueError):
    """Malformed input text. Carries the offending line number when known."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ConsistencyError(IBTSError, ValueError):
    """Two related inputs disagree with each other."""


class ParameterError(IBTSError, ValueError):
    """A parameter is outside its permitted range."""


class TrainingError(IBTSError):
    pass


class PredictionError(IBTSError):
    pass


class GenerationError(IBTSError):
    """Raised when a synthetic dataset cannot be produced within the retry budget."""
