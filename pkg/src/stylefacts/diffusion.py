"""Anomalous-diffusion exponents from PDF-peak scaling and self-similarity collapse.

For a self-similar process the return density obeys P(x, t) = F(x/phi)/phi
with phi ~ t^H, so the peak decays as P_max ~ t^(-H) while the RMS grows as
t^H; 1/P_max and sqrt(<x^2>) stay proportional.  alpha = 1/H separates
subdiffusion (alpha > 2) from superdiffusion (alpha < 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from ._util import as_float_array, linefit
from .density import (
    Q_MAX,
    Q_MIN,
    EmpiricalPdf,
    fit_support,
    kde,
    q_normalization,
    _log_scaled_q_gaussian,
)
from .series import return_ensemble

__all__ = [
    "PeakScalingCurve",
    "TwoRegimeFit",
    "CollapseResult",
    "peak_scaling",
    "fit_two_regime",
    "classify_regime",
    "collapse_pdfs",
]


@dataclass
class PeakScalingCurve:
    """Per-lag PDF peaks and raw second moments."""

    lags: np.ndarray
    peaks: np.ndarray
    msd: np.ndarray

    def __post_init__(self):
        self.lags = np.asarray(self.lags, dtype=int)
        self.peaks = np.asarray(self.peaks, dtype=float)
        self.msd = np.asarray(self.msd, dtype=float)
        if np.any(np.diff(self.lags) <= 0):
            raise ValueError("lags must be strictly increasing")
        if np.any(self.peaks <= 0):
            raise ValueError("peaks must be positive")

    def __len__(self) -> int:
        return self.lags.size

    def to_csv(self, path, dt_minutes: int = 10) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("lag,t_minutes,peak,msd\n")
            for lag, pk, m2 in zip(self.lags, self.peaks, self.msd):
                fh.write(f"{lag},{lag * dt_minutes},{pk!r},{m2!r}\n")


@dataclass
class TwoRegimeFit:
    """Piecewise power law P_max ~ t^-H with one breakpoint."""

    h_short: float
    h_long: float
    breakpoint: int
    stderr_short: float
    stderr_long: float
    alpha_short: float = field(init=False)
    alpha_long: float = field(init=False)

    def __post_init__(self):
        self.alpha_short = 1.0 / self.h_short if self.h_short != 0 else math.inf
        self.alpha_long = 1.0 / self.h_long if self.h_long != 0 else math.inf


@dataclass
class CollapseResult:
    scale_factors: np.ndarray  # fitted beta(t), one per input pdf
    master_q: float
    collapse_distance: float  # max pairwise sup-distance of rescaled pdfs
    hurst: float  # H supplied by the caller (seeds the scale search)

    def __post_init__(self):
        self.scale_factors = np.asarray(self.scale_factors, dtype=float)

    def to_csv(self, path, lags=None) -> None:
        lags = list(lags) if lags is not None else list(range(len(self.scale_factors)))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("lag,scale_factor,master_q,collapse_distance\n")
            for lag, beta in zip(lags, self.scale_factors):
                fh.write(f"{lag},{beta!r},{self.master_q!r},{self.collapse_distance!r}\n")


def peak_scaling(
    series, lags, bandwidth: float = 0.001, grid_size: int = 2048
) -> PeakScalingCurve:
    """PDF peak and second moment of the lag-t return ensemble, per lag.

    ``bandwidth`` is relative: each ensemble is smoothed with a kernel of
    width bandwidth * (ensemble standard deviation), which leaves power-law
    peak scaling undistorted across lags.
    """
    x = as_float_array(series)
    lags = np.asarray(sorted(set(int(v) for v in lags)), dtype=int)
    if lags.size == 0 or lags[0] < 1:
        raise ValueError("lags must be positive integers")
    if lags[-1] >= x.size / 4:
        raise ValueError(
            f"ensemble too small at lag {lags[-1]} (series length {x.size})"
        )
    peaks = np.empty(lags.size)
    msd = np.empty(lags.size)
    for i, lag in enumerate(lags):
        ens = return_ensemble(x, int(lag)).values
        sd = ens.std()
        if sd == 0:
            raise ValueError(f"zero-variance ensemble at lag {lag}")
        pdf = kde(ens, bandwidth * sd, grid_size)
        peaks[i] = pdf.peak
        msd[i] = float(np.mean(ens * ens))
    return PeakScalingCurve(lags=lags, peaks=peaks, msd=msd)


def fit_two_regime(curve: PeakScalingCurve, min_per_side: int = 4) -> TwoRegimeFit:
    """Two-segment log-log fit of peaks against lags.

    Grid-searches the breakpoint, fitting each side by OLS with the sign
    flipped so H > 0 for decaying peaks; picks the split with minimal total
    SSE, ties going to the smaller breakpoint.
    """
    n = len(curve)
    if n < 2 * min_per_side:
        raise ValueError(f"need at least {2 * min_per_side} points, got {n}")
    lt = np.log(curve.lags.astype(float))
    lp = np.log(curve.peaks)

    candidates = []
    for k in range(min_per_side, n - min_per_side + 1):
        sse = _side_sse(lt[:k], lp[:k]) + _side_sse(lt[k:], lp[k:])
        candidates.append((sse, k))
    best_sse = min(sse for sse, _ in candidates)
    tol = 1e-9 * (1.0 + best_sse)
    k = min(k for sse, k in candidates if sse <= best_sse + tol)
    s1, _, e1 = linefit(lt[:k], lp[:k])
    s2, _, e2 = linefit(lt[k:], lp[k:])
    return TwoRegimeFit(
        h_short=-s1,
        h_long=-s2,
        breakpoint=int(curve.lags[k - 1]),
        stderr_short=e1,
        stderr_long=e2,
    )


def _side_sse(x: np.ndarray, y: np.ndarray) -> float:
    slope, intercept, _ = linefit(x, y)
    resid = y - intercept - slope * x
    return float(resid @ resid)


def classify_regime(alpha: float, tolerance: float = 0.05) -> str:
    """Label the diffusion regime by alpha = 1/H against the Brownian value 2."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if alpha > 2.0 + tolerance:
        return "subdiffusion"
    if alpha < 2.0 - tolerance:
        return "superdiffusion"
    return "normal"


def _best_scale(x: np.ndarray, y: np.ndarray, q: float, log_beta0: float) -> tuple[float, float]:
    """Best log-scale for one pdf at fixed q; returns (sse, log_beta).

    The log-space SSE has a narrow well around the optimum sitting on broad
    non-unimodal slopes, so a coarse grid locates the basin before the
    bounded refinement.
    """

    def sse(log_beta: float) -> float:
        resid = y - _log_scaled_q_gaussian(x, q, log_beta)
        return float(resid @ resid)

    grid = np.linspace(log_beta0 - 10.0, log_beta0 + 10.0, 81)
    vals = [sse(lb) for lb in grid]
    k = int(np.argmin(vals))
    res = minimize_scalar(
        sse,
        bounds=(grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.fun), float(res.x)


def collapse_pdfs(pdfs, hurst: float, grid_size: int = 2048) -> CollapseResult:
    """Rescale per-lag pdfs onto a master curve with a shared q.

    ``pdfs`` is a list of (lag, EmpiricalPdf).  A joint semilog fit shares one
    q across all pdfs while each gets its own scale beta(t); the pdfs are then
    rescaled (x -> x/beta, density -> density*beta) and compared on a common
    grid.  Returns the shared q, the scale factors, and the maximum pairwise
    sup-distance of the rescaled curves.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError("hurst must lie in (0, 1)")
    if len(pdfs) < 1:
        raise ValueError("need at least one pdf")

    masked = []
    for lag, pdf in pdfs:
        mask = fit_support(pdf)
        if pdf.peak <= 0 or mask.sum() < 8:
            raise ValueError(f"pdf at lag {lag} has no usable support")
        masked.append((pdf.grid[mask], np.log(pdf.density[mask])))

    # initial log-scales: peak heuristic for the first pdf, extrapolated to
    # the other lags through the self-similar scaling beta(t) ~ t^H
    lag_ref, pdf_ref = pdfs[0]
    lb_ref = math.log(1.0 / (pdf_ref.peak * q_normalization(1.5)))
    log_beta0 = [
        lb_ref + hurst * math.log(int(lag) / int(lag_ref)) for lag, _ in pdfs
    ]

    def total_sse(q: float) -> float:
        return sum(_best_scale(x, y, q, lb0)[0] for (x, y), lb0 in zip(masked, log_beta0))

    res = minimize_scalar(
        total_sse, bounds=(Q_MIN, Q_MAX), method="bounded", options={"xatol": 1e-7}
    )
    master_q = float(res.x)
    betas = np.array(
        [
            math.exp(_best_scale(x, y, master_q, lb0)[1])
            for (x, y), lb0 in zip(masked, log_beta0)
        ]
    )

    if len(pdfs) == 1:
        return CollapseResult(betas, master_q, 0.0, hurst)

    rescaled = []
    for (lag, pdf), beta in zip(pdfs, betas):
        rescaled.append((pdf.grid / beta, pdf.density * beta))
    lo = max(g.min() for g, _ in rescaled)
    hi = min(g.max() for g, _ in rescaled)
    if hi <= lo:
        raise ValueError("rescaled pdfs share no common support")
    common = np.linspace(lo, hi, grid_size)
    interps = [np.interp(common, g, d) for g, d in rescaled]

    distance = 0.0
    for i in range(len(interps)):
        for j in range(i + 1, len(interps)):
            distance = max(distance, float(np.max(np.abs(interps[i] - interps[j]))))
    return CollapseResult(betas, master_q, distance, hurst)
