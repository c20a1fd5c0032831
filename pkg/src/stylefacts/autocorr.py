"""Sample and chopping (ensemble) autocorrelation, power-law slope, memory time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve

from ._util import as_float_array, linefit

__all__ = [
    "AcfCurve",
    "sample_acf",
    "chopped_acf",
    "fit_abs_acf_slope",
    "hurst_from_acf_slope",
    "memory_time",
]


@dataclass
class AcfCurve:
    """Autocorrelation values C(s) on integer grid lags, C(0) = 1.

    ``stderr`` is the cross-segment standard error (chopping curves only).
    """

    lags: np.ndarray
    values: np.ndarray
    kind: str  # "sample" or "chopping"
    stderr: np.ndarray | None = None
    dt_minutes: int = 10
    n_segments: int | None = None
    n_dropped_segments: int = 0

    def __post_init__(self):
        self.lags = np.asarray(self.lags, dtype=int)
        self.values = np.asarray(self.values, dtype=float)
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("s_minutes,C,stderr\n")
            for i, (s, c) in enumerate(zip(self.lags, self.values)):
                err = "" if self.stderr is None else repr(float(self.stderr[i]))
                fh.write(f"{s * self.dt_minutes},{c!r},{err}\n")


def _acf_1d(x: np.ndarray, max_lag: int) -> np.ndarray:
    """C(s) with the global mean and full-sample variance in the denominator."""
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise ValueError("series has zero variance")
    full = fftconvolve(xc, xc[::-1])
    center = x.size - 1
    return full[center : center + max_lag + 1] / denom


def sample_acf(returns, max_lag: int) -> AcfCurve:
    """Full-series autocorrelation C(s) for s = 0..max_lag."""
    x = as_float_array(returns)
    if max_lag < 1:
        raise ValueError("max_lag must be positive")
    if max_lag >= x.size / 2:
        raise ValueError(f"max_lag {max_lag} must be below half the length {x.size}")
    values = _acf_1d(x, max_lag)
    return AcfCurve(
        lags=np.arange(max_lag + 1),
        values=values,
        kind="sample",
        dt_minutes=getattr(returns, "dt_minutes", 10),
    )


def chopped_acf(returns, segment_length: int = 1000) -> AcfCurve:
    """Ensemble autocorrelation: average of per-segment curves.

    The series is cut into floor(N/S) disjoint segments of length S (tail
    remainder discarded); each segment gets its own mean/variance.  Segments
    with zero variance are dropped and counted, never silently ignored.
    """
    x = as_float_array(returns)
    if segment_length < 2:
        raise ValueError("segment_length must be at least 2")
    n_seg = x.size // segment_length
    if n_seg < 2:
        raise ValueError(
            f"need at least 2 complete segments of length {segment_length}, "
            f"series has {x.size} samples"
        )
    max_lag = segment_length - 1
    curves = []
    dropped = 0
    for i in range(n_seg):
        seg = x[i * segment_length : (i + 1) * segment_length]
        try:
            curves.append(_acf_1d(seg, max_lag))
        except ValueError:
            dropped += 1
    if len(curves) < 2:
        raise ValueError("fewer than 2 segments with non-zero variance")
    stack = np.vstack(curves)
    mean = stack.mean(axis=0)
    stderr = stack.std(axis=0, ddof=1) / np.sqrt(len(curves))
    return AcfCurve(
        lags=np.arange(max_lag + 1),
        values=mean,
        kind="chopping",
        stderr=stderr,
        dt_minutes=getattr(returns, "dt_minutes", 10),
        n_segments=len(curves),
        n_dropped_segments=dropped,
    )


def fit_abs_acf_slope(curve: AcfCurve, s_lo: int = 1, s_hi: int = 10) -> tuple[float, float]:
    """OLS slope of ln|C(s)| against ln s over lags [s_lo, s_hi].

    Returns (slope, stderr).
    """
    if not 1 <= s_lo < s_hi:
        raise ValueError("need 1 <= s_lo < s_hi")
    sel = (curve.lags >= s_lo) & (curve.lags <= s_hi)
    if sel.sum() < 2:
        raise ValueError(f"fit range [{s_lo}, {s_hi}] selects fewer than 2 lags")
    s = curve.lags[sel].astype(float)
    c = np.abs(curve.values[sel])
    if np.any(c == 0):
        raise ValueError("autocorrelation is exactly zero inside the fit range")
    slope, _, stderr = linefit(np.log(s), np.log(c))
    return float(slope), float(stderr)


def hurst_from_acf_slope(slope: float) -> float:
    """Hurst exponent from the absolute-ACF power-law slope: H = 1 + slope/2."""
    if not -2.0 < slope < 0.0:
        raise ValueError(f"slope must lie in (-2, 0), got {slope}")
    return 1.0 + slope / 2.0


def memory_time(curve: AcfCurve, tail_tol: float = 0.01) -> float:
    """Characteristic correlation time: trapezoid integral of C(s) over lags,
    normalized by C(0).

    Requires the curve to have decayed (|C| < tail_tol at the last lag).
    """
    c = curve.values
    if abs(c[-1]) >= tail_tol:
        raise ValueError(
            f"curve too short to converge: |C| = {abs(c[-1]):.4f} >= {tail_tol} "
            "at the last lag"
        )
    return float(trapezoid(c, curve.lags.astype(float)) / c[0])
