"""Exception hierarchy shared across the toolkit.

``ConfigError`` means the caller asked for something impossible (missing
paths, bad option combinations) and maps to CLI exit code 2.  Everything
under ``DataError`` means an input file or value is malformed and maps to
exit code 3.
"""


class SpanchainError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SpanchainError):
    """Invalid or incomplete configuration."""


class DataError(SpanchainError):
    """Malformed input data."""


class ParseError(DataError):
    """A file could not be parsed; message carries file/line context."""


class ValidationError(DataError):
    """A value violates a declared invariant or precondition."""


class DecodeError(SpanchainError):
    """No legal decoding exists (e.g. fully masked transition lattice)."""


class TrainingError(SpanchainError):
    """Training diverged or was invoked on an unusable dataset."""
