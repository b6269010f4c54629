"""Exception hierarchy shared across the toolkit."""


class BellsimError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(BellsimError, ValueError):
    """An experiment configuration is malformed or out of range."""


class LogParseError(BellsimError, ValueError):
    """An event-log file violates the documented record format."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NoDataError(BellsimError, ValueError):
    """An estimator was asked for a quantity its counts cannot support."""


class GeometryError(BellsimError, ValueError):
    """A spacetime geometry file is malformed or inconsistent."""
