"""Correlation helpers used by the reports and threshold sweeps."""

import numpy as np
from scipy.stats import rankdata

from .errors import DataError


def _pair(x, y, minimum):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise DataError("correlation needs two vectors of equal length")
    if x.size < minimum:
        raise DataError(f"correlation needs at least {minimum} points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("correlation inputs must be finite")
    return x, y


def pearson(x, y):
    """Product-moment correlation; raises DataError on a constant input."""
    x, y = _pair(x, y, 3)
    xc = x - x.mean()
    yc = y - y.mean()
    sx, sy = np.sqrt(xc @ xc), np.sqrt(yc @ yc)
    # centred vectors of a constant input are pure rounding noise
    if sx <= 1e-14 * max(np.abs(x).max(), 1e-300) or sy <= 1e-14 * max(np.abs(y).max(), 1e-300):
        raise DataError("correlation undefined: an input has zero standard deviation")
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


def spearman(x, y):
    """Pearson correlation of average ranks."""
    x, y = _pair(x, y, 3)
    return pearson(rankdata(x), rankdata(y))


def log_target(values):
    """Natural log, rejecting nonpositive values."""
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        raise DataError("log transform needs positive target values")
    return np.log(v)
