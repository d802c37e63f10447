from __future__ import annotations


class SwarmlabError(Exception):
    """Base class for swarmlab errors."""

    exit_code = 4


class ConfigError(SwarmlabError):
    """Raised for invalid experiment or command configuration."""

    exit_code = 2


class InputFormatError(SwarmlabError):
    """Raised when an input file cannot be parsed."""

    exit_code = 3

    def __init__(self, message: str, path: str | None = None, offset: int | None = None):
        if path is not None and offset is not None:
            message = f"{path}: {message} (at byte offset {offset})"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.offset = offset


class IdxFormatError(InputFormatError):
    """Raised for IDX files with an unexpected magic number or dimensions."""


class IdxTruncationError(InputFormatError):
    """Raised when an IDX payload does not match its declared size."""


class ModelFormatError(InputFormatError):
    """Raised when a weights file is malformed."""


class InvariantViolation(SwarmlabError):
    """Raised when an internal invariant does not hold."""


class InvalidArgumentError(SwarmlabError, ValueError):
    """Raised for out-of-range operation arguments."""


class InvalidChromosomeError(InvalidArgumentError):
    """Raised when a chromosome does not fit the requested decoding."""


class InvalidPairError(InvalidArgumentError):
    """Raised when two parents have different lengths."""


class DegenerateSelectionError(SwarmlabError):
    """Raised when every roulette weight is zero."""


class ModelError(SwarmlabError):
    """Raised when a classifier model's dimensions do not chain."""


class OracleError(SwarmlabError):
    """Raised when an oracle returns something that is not a distribution."""
