"""Small numeric helpers: log-log slope fits and ladder bookkeeping."""

import numpy as np


def fit_loglog_slope(xs, ys):
    """Least-squares slope of log(y) against log(x).

    Returns (slope, intercept).  Requires positive data.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2:
        raise ValueError("slope fit needs at least two points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("slope fit needs positive data")
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope), float(intercept)


def is_nonincreasing(values, slack=0.0):
    values = list(values)
    return all(b <= a * (1.0 + slack) for a, b in zip(values, values[1:]))


def geometric_tail(last_change, ratio):
    """Sum of a geometric tail with first term last_change*ratio."""
    if not (0.0 < ratio < 1.0):
        return float("inf")
    return last_change * ratio / (1.0 - ratio)
