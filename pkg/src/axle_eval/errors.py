"""Exception hierarchy shared by all modules.

Anything deriving from :class:`AxleEvalError` is a user/input problem; the
command line maps it to exit status 2.
"""


class AxleEvalError(Exception):
    """Base class for expected, user-facing failures."""


class AnnotationParseError(AxleEvalError):
    """A ground-truth or detection line could not be parsed."""

    def __init__(self, source: str, line: int, token: str, message: str):
        self.source = source
        self.line = line
        self.token = token
        super().__init__(f"{source}:{line}: {message} (offending token: {token!r})")


class DatasetLoadError(AxleEvalError):
    """A manifest or one of the files it references is invalid."""


class CompositionError(AxleEvalError):
    """A mixed dataset cannot be composed as requested."""


class MatrixError(AxleEvalError):
    """An experiment matrix is malformed or unsuitable for the requested test."""


class StatsError(AxleEvalError, ValueError):
    """Invalid input to a statistical routine."""
