"""Exception hierarchy.

Errors are grouped by how the command line reports them: ``DataError`` for
bad or missing input, ``NumericFailure`` for training that diverged, and
plain ``ValueError`` subclasses for misuse of the API.
"""


class GraceAccError(Exception):
    """Base class for all package errors."""


class DataError(GraceAccError):
    """Input data is missing, malformed or unusable."""


class MissingHeaderTerminator(DataError):
    def __init__(self, path, terminator):
        super().__init__(f"{path}: no header terminator line {terminator!r}")
        self.path = path
        self.terminator = terminator


class MalformedRecord(DataError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class NonMonotonicTime(DataError):
    def __init__(self, line_no, previous, current):
        super().__init__(
            f"line {line_no}: gps_time {current} does not follow {previous}"
        )
        self.line_no = line_no


class EmptyInput(DataError, ValueError):
    pass


class TooShort(DataError, ValueError):
    pass


class TooFewPairs(DataError, ValueError):
    pass


class DegenerateScale(DataError, ValueError):
    pass


class ShapeMismatch(GraceAccError, ValueError):
    pass


class LengthMismatch(GraceAccError, ValueError):
    pass


class ScalerMismatch(GraceAccError, ValueError):
    pass


class BadWindowLength(GraceAccError, ValueError):
    pass


class NumericFailure(GraceAccError, ArithmeticError):
    """Training produced a non-finite loss or parameter."""
