"""Return construction, rolling volatility, and moving-average detrending."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._util import as_float_array

__all__ = [
    "ReturnSeries",
    "ReturnEnsemble",
    "TrendDecomposition",
    "increments",
    "return_ensemble",
    "rolling_volatility",
    "moving_average_trend",
]


@dataclass
class ReturnSeries:
    """One-step differences of an index series."""

    values: np.ndarray
    dt_minutes: int = 10
    detrended: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return self.values.size


@dataclass
class ReturnEnsemble:
    """All lag-t differences I(k+t) - I(k) of a series, indexed by start time k."""

    lag: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return self.values.size


@dataclass
class TrendDecomposition:
    """Additive split of a series into a moving-average trend and a residual."""

    trend: np.ndarray
    residual: np.ndarray
    window: int


def increments(series, detrended: bool = False, dt_minutes: int | None = None) -> ReturnSeries:
    """Consecutive differences x[i+1] - x[i].

    Accepts a PriceSeries, a detrending residual, or any 1-D array.
    """
    x = as_float_array(series)
    if x.size < 2:
        raise ValueError("series too short for increments")
    dt = dt_minutes if dt_minutes is not None else getattr(series, "dt_minutes", 10)
    return ReturnSeries(values=np.diff(x), dt_minutes=dt, detrended=detrended)


def return_ensemble(series, lag: int) -> ReturnEnsemble:
    """Ensemble of lag-step differences over every admissible start index."""
    x = as_float_array(series)
    if lag < 1:
        raise ValueError("lag must be a positive integer")
    if lag >= x.size:
        raise ValueError(f"lag {lag} must be smaller than the series length {x.size}")
    return ReturnEnsemble(lag=lag, values=x[lag:] - x[:-lag])


def rolling_volatility(returns, window: int = 6) -> np.ndarray:
    """Sample standard deviation (divisor N-1) over a sliding window.

    Output length is len(returns) - window + 1.
    """
    x = as_float_array(returns)
    if window < 2:
        raise ValueError("window must be at least 2")
    if window > x.size:
        raise ValueError(f"window {window} exceeds series length {x.size}")
    return sliding_window_view(x, window).std(axis=1, ddof=1)


def moving_average_trend(series, window: int) -> TrendDecomposition:
    """Three-piece centered moving-average trend with truncated edge windows.

    With 1-based time t and half-widths fh = floor((w-1)/2), ch = ceil((w-1)/2):

        t <  w/2          trend = 2/(w + 2t)        * sum of x[1 .. t+ch]
        w/2 <= t <= N-w/2 trend = 1/w               * sum of x[t-fh .. t+ch]
        t >  N - w/2      trend = 2/(2N - 2t + w)   * sum of x[t-fh .. N]

    For even windows every prefactor equals one over the number of samples
    averaged; for odd windows the edge prefactors are kept literally as above
    (locked by a golden test).  The residual satisfies trend + residual == x.
    """
    x = as_float_array(series)
    n = x.size
    if not 1 <= window <= n:
        raise ValueError(f"window must lie in [1, {n}], got {window}")

    fh = (window - 1) // 2
    ch = window - 1 - fh
    t = np.arange(1, n + 1)
    cs = np.concatenate([[0.0], np.cumsum(x)])  # cs[i] = x[1] + ... + x[i]

    lower = t < window / 2
    upper = t > n - window / 2
    interior = ~lower & ~upper

    trend = np.empty(n)
    ti = t[interior]
    trend[interior] = (cs[ti + ch] - cs[ti - fh - 1]) / window
    tl = t[lower]
    trend[lower] = 2.0 / (window + 2 * tl) * (cs[tl + ch] - cs[0])
    tu = t[upper]
    trend[upper] = 2.0 / (2 * n - 2 * tu + window) * (cs[n] - cs[tu - fh - 1])

    return TrendDecomposition(trend=trend, residual=x - trend, window=window)
