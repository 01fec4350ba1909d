"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
EstimationError -> 3.
"""


class TzvarnetError(Exception):
    """Base class for package errors."""


class ConfigError(TzvarnetError):
    """Invalid or unreadable run configuration."""


class DataError(TzvarnetError):
    """Malformed, inconsistent, or insufficient input data."""


class EstimationError(TzvarnetError):
    """Estimation or model-selection failure."""
