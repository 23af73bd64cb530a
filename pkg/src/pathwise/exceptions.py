"""Exception hierarchy for pathwise.

``InputError`` and its subclasses describe problems with what the user
supplied and map to exit code 2; anything else escaping a command is an
internal error (exit code 1).
"""

from typing import Optional


class PathwiseError(Exception):
    """Base class for all pathwise errors."""


class InputError(PathwiseError):
    """A user or input problem."""


class ConfigError(InputError):
    """Invalid pipeline or command configuration."""


class TableFormatError(InputError):
    """An abundance table could not be parsed."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"{message} (row {line}, column {column})"
        elif line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class MetadataError(InputError):
    """Sample metadata is missing, malformed or inconsistent."""


class MappingError(InputError):
    """The KO to pathway reference is malformed or produced nothing."""


class AnalysisError(InputError):
    """A statistical method cannot run on the given data."""


class DistributionError(InputError, ValueError):
    """Invalid distribution parameters."""


class AnnotationError(InputError):
    """Annotation could not be performed as requested."""


class PlotError(InputError):
    """A figure cannot be drawn from the given inputs."""
