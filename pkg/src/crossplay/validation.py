"""Input validation helpers shared by the estimators and solvers."""

import numpy as np

SIMPLEX_ATOL = 1e-9


class ConfigurationError(ValueError):
    """Raised for inconsistent game, policy or run configuration."""


def check_distribution(p, atol=SIMPLEX_ATOL):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ConfigurationError("a distribution must be a non-empty vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ConfigurationError(f"distribution has negative or non-finite entries: {p}")
    if abs(p.sum() - 1.0) > atol:
        raise ConfigurationError(f"distribution sums to {p.sum()!r}, not 1")
    return p


def check_weights(w, atol=SIMPLEX_ATOL):
    return check_distribution(w, atol=atol)


def check_interval(name, value, low, high, low_open=False, high_open=False):
    """Raise unless ``value`` lies in the given interval."""
    ok_low = value > low if low_open else value >= low
    ok_high = value < high if high_open else value <= high
    if not (ok_low and ok_high):
        lb = "(" if low_open else "["
        rb = ")" if high_open else "]"
        raise ConfigurationError(f"{name}={value!r} must lie in {lb}{low}, {high}{rb}")
    return value


def check_positive_int(name, value):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ConfigurationError(f"{name} must be a non-empty 2-d array")
    if not np.all(np.isfinite(a)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    return a
