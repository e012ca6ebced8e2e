"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError (and subclasses) -> 4.
"""


class ParameterError(ValueError):
    """Invalid parameter for a loss, kernel, or estimator."""


class ConfigError(ValueError):
    """Malformed or unknown configuration (CLI layer)."""


class DataError(ValueError):
    """Unreadable or malformed input data (CSV point clouds, fields)."""


class NumericError(ArithmeticError):
    """A numeric computation reached an unusable state."""


class DegenerateWeightsError(NumericError):
    """Every point received zero weight during reweighting.

    Possible for capped losses when all residuals fall past the cutoff.
    """
