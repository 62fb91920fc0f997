"""Exception hierarchy shared by every texeval module."""


class TexevalError(Exception):
    """Base class for all texeval errors."""


class ConfigError(TexevalError, ValueError):
    """Invalid parameters, mismatched vocabularies or dimensions."""


class IngestionError(TexevalError):
    """A corpus source could not be turned into a vocabulary or corpus."""


class OOVError(TexevalError, KeyError):
    def __init__(self, token):
        super().__init__(token)
        self.token = token

    def __str__(self):
        return f"out-of-vocabulary token: {self.token!r}"


class RangeError(TexevalError, IndexError):
    """A token id outside [0, N)."""


class ParseError(TexevalError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line


class TrainingError(TexevalError):
    pass


class DegenerateInputError(TexevalError):
    pass


class MetricError(TexevalError):
    pass


class AlignmentError(MetricError):
    """A log-prob file does not line up with the test corpus."""


class ValidityError(MetricError):
    """A log-prob value that cannot come from a proper distribution."""
