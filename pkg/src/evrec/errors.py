"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: InputFormatError -> 2,
NumericError -> 3, ConfigError (and DimensionError) -> 4.
"""


class EvrecError(Exception):
    """Base class for all toolkit errors."""


class InputFormatError(EvrecError):
    """A file or stream does not conform to its declared format."""


class NumericError(EvrecError):
    """A computation produced non-finite or otherwise invalid values."""


class DivergenceError(NumericError):
    """An iterative solver diverged; carries the failing iteration."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class ConfigError(EvrecError):
    """Invalid parameters or configuration."""


class DimensionError(ConfigError):
    """Array arguments have inconsistent shapes."""
