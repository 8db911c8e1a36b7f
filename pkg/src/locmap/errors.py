"""Exception hierarchy shared across the toolkit.

The CLI maps ``ValidationError`` subclasses to exit code 1 and
``DataError`` subclasses (unreadable or malformed input files) to exit
code 2.
"""


class LocmapError(Exception):
    exit_code = 1


class ValidationError(LocmapError):
    """Bad arguments or inputs that violate an operation's contract."""

    exit_code = 1


class InvalidInput(ValidationError):
    pass


class InvalidArgument(ValidationError):
    pass


class InvalidK(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class MissingPrediction(ValidationError):
    pass


class EmptyObject(ValidationError):
    pass


class DivergenceError(ValidationError):
    def __init__(self, step: int, loss: float, initial: float):
        super().__init__(
            f"loss diverged at step {step}: {loss:.6g} > 10 x initial {initial:.6g}"
        )
        self.step = step


class SchemaError(ValidationError):
    """Manifest JSON violates the version-1 schema; message carries a JSON pointer."""


class DuplicateId(SchemaError):
    pass


class DataError(LocmapError):
    """Input file is missing, unreadable, or malformed on disk."""

    exit_code = 2


class MissingFile(DataError):
    pass


class ParseError(DataError):
    """Array container could not be parsed; subclasses name the offending field."""


class BadMagic(ParseError):
    pass


class BadVersion(ParseError):
    pass


class BadHeader(ParseError):
    pass


class UnsupportedDtype(ParseError):
    pass


class FortranOrder(ParseError):
    pass


class Truncated(ParseError):
    pass


class TrailingData(ParseError):
    pass


class InvalidMask(DataError):
    pass


class UnsupportedFormat(DataError):
    pass
