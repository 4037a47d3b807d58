"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line interface:
1 for configuration/validation problems, 2 for data/parse problems.
"""

from __future__ import annotations


class NilmError(Exception):
    exit_code = 2


class ConfigError(NilmError, ValueError):
    """Invalid parameters or configuration."""

    exit_code = 1


class DimensionError(ConfigError):
    """Vectors or windows of incompatible length."""


class EmptyDatasetError(ConfigError):
    """No labeled windows to work with."""


class DataError(NilmError):
    """Problem with input data on disk or in a stream.

    ``source`` names the offending file once known; callers that only see a
    stream leave it unset and the loader fills it in.
    """

    def __init__(self, message: str, *, source: str | None = None) -> None:
        super().__init__(message)
        self.detail = message
        self.source = source

    def __str__(self) -> str:
        return f"{self.source}: {self.detail}" if self.source else self.detail


class ParseError(DataError):
    def __init__(self, message: str, line: int, *, source: str | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}", source=source)


class DuplicateChannelError(DataError):
    def __init__(self, channel: int, line: int, *, source: str | None = None) -> None:
        self.channel = channel
        self.line = line
        super().__init__(f"line {line}: duplicate channel {channel}", source=source)


class OrderingError(DataError):
    def __init__(self, index: int, *, source: str | None = None) -> None:
        self.index = index
        super().__init__(f"timestamp at sample index {index} is not strictly increasing", source=source)


class NegativePowerError(DataError, ValueError):
    def __init__(self, index: int, value: float, *, source: str | None = None) -> None:
        self.index = index
        self.value = value
        super().__init__(f"negative power {value!r} at sample index {index}", source=source)


class StructureError(DataError):
    """A house directory is missing required files."""


class MissingChannelError(DataError):
    def __init__(self, channel: int, *, source: str | None = None) -> None:
        self.channel = channel
        super().__init__(f"channel {channel} is listed in labels.dat but channel_{channel}.dat is missing", source=source)


class DataWarning(UserWarning):
    """Non-fatal data issue (surplus files, degenerate classes, even k)."""
