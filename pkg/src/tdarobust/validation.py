"""Input validation helpers used by the estimators and metric functions."""

import numpy as np

from .errors import ParameterError


def as_points(X, dim=None, name="X"):
    """Coerce X to a float (n, d) array.

    1-d input is treated as n points in one dimension. Raises
    ParameterError on empty input, non-finite values, or a dimension
    mismatch against `dim`.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ParameterError(f"{name} must be a nonempty (n, d) array")
    if not np.all(np.isfinite(X)):
        raise ParameterError(f"{name} contains non-finite values")
    if dim is not None and X.shape[1] != dim:
        raise ParameterError(
            f"{name} has dimension {X.shape[1]}, expected {dim}"
        )
    return X


def as_weights(w, n=None, name="weights", tol=1e-10):
    """Coerce to a nonnegative weight vector summing to 1 within tol."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ParameterError(f"{name} must be a nonempty 1-d array")
    if n is not None and w.size != n:
        raise ParameterError(f"{name} has length {w.size}, expected {n}")
    if not np.all(np.isfinite(w)):
        raise ParameterError(f"{name} contains non-finite values")
    if np.any(w < -tol):
        raise ParameterError(f"{name} has negative entries")
    if abs(w.sum() - 1.0) > tol:
        raise ParameterError(f"{name} must sum to 1 (got {w.sum()!r})")
    return np.clip(w, 0.0, None)


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be a positive finite real, got {value!r}")
    return value


def check_in_range(value, name, lo, hi, closed_lo=False, closed_hi=False):
    value = float(value)
    ok_lo = value >= lo if closed_lo else value > lo
    ok_hi = value <= hi if closed_hi else value < hi
    if not (np.isfinite(value) and ok_lo and ok_hi):
        lb = "[" if closed_lo else "("
        rb = "]" if closed_hi else ")"
        raise ParameterError(f"{name} must lie in {lb}{lo}, {hi}{rb}, got {value!r}")
    return value


def check_fitted(estimator, attr):
    if not hasattr(estimator, attr):
        raise ParameterError(
            f"{type(estimator).__name__} is not fitted (missing {attr})"
        )
