"""Small numeric helpers shared across modules."""

from __future__ import annotations

import numpy as np


def as_float_array(x) -> np.ndarray:
    """Return the values of a series-like object as a 1-D float array.

    Accepts plain sequences/arrays as well as any object carrying a
    ``values`` attribute (PriceSeries, ReturnSeries, ...).
    """
    vals = getattr(x, "values", x)
    arr = np.asarray(vals, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D series")
    return arr


def linefit(x, y) -> tuple[float, float, float]:
    """Ordinary least squares line y = slope*x + intercept.

    Returns (slope, intercept, slope_stderr).  stderr is 0 for n <= 2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 points for a line fit")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("degenerate fit range: all x identical")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    if n > 2:
        stderr = float(np.sqrt((resid @ resid) / (n - 2) / sxx))
    else:
        stderr = 0.0
    return slope, intercept, stderr


def log_spaced_ints(lo: int, hi: int, num: int) -> np.ndarray:
    """Unique, increasing integers roughly log-spaced between lo and hi."""
    if hi < lo:
        raise ValueError(f"empty integer range [{lo}, {hi}]")
    grid = np.logspace(np.log10(lo), np.log10(hi), num=num)
    return np.unique(np.clip(np.round(grid), lo, hi).astype(int))
