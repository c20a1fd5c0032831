"""Kernel density estimation and q-Gaussian (Tsallis) calibration.

The reference shape is the normalized q-Gaussian

    g_q(x) = [1 + (q - 1) x^2]^(1/(1-q)) / C_q,    1 < q < 3,

which recovers the Gaussian exp(-x^2)/sqrt(pi) as q -> 1 and the Cauchy
density at q = 2.  Scale-family fits use p(x) = g_q(x / beta) / beta, so the
far tail decays as x^(2/(1-q)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize
from scipy.special import gammaln, ndtr

from ._util import linefit

__all__ = [
    "EmpiricalPdf",
    "QGaussianFit",
    "TailFit",
    "q_normalization",
    "q_gaussian_density",
    "q_gaussian_scaled",
    "kde",
    "fit_support",
    "fit_q_gaussian_semilog",
    "fit_tail_exponent",
    "q_from_tail",
]

Q_MIN = 1.0 + 1e-6
Q_MAX = 3.0 - 1e-3
_KERNEL_CUTOFF = 10.0  # kernel support truncated at 10 bandwidths
_NORM_TOL = 1e-3


@dataclass
class EmpiricalPdf:
    """Density estimate on a strictly increasing grid, trapezoid-normalized."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    n_samples: int

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise ValueError("pdf grid must be a 1-D array with >= 2 points")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("pdf grid must be strictly increasing")
        if self.density.shape != self.grid.shape:
            raise ValueError("density length must match grid")
        if np.any(self.density < 0):
            raise ValueError("density must be non-negative")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        total = float(trapezoid(self.density, self.grid))
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"density integrates to {total:.6f}, expected 1")

    @property
    def peak(self) -> float:
        return float(self.density.max())

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,density\n")
            for x, d in zip(self.grid, self.density):
                fh.write(f"{x!r},{d!r}\n")


@dataclass
class QGaussianFit:
    q: float
    scale: float  # fitted density is g_q(x / scale) / scale
    r_squared: float
    method: str  # "semilog" or "tail"
    pinned: bool = False  # q converged onto a search bound


@dataclass
class TailFit:
    slope: float
    intercept: float
    fit_range: tuple[float, float]
    stderr: float


def q_normalization(q: float) -> float:
    """Normalization constant C_q = sqrt(pi/(q-1)) * G((3-q)/(2(q-1))) / G(1/(q-1))."""
    if not 1.0 < q < 3.0:
        raise ValueError(f"q must lie in (1, 3), got {q}")
    a = (3.0 - q) / (2.0 * (q - 1.0))
    b = 1.0 / (q - 1.0)
    return math.sqrt(math.pi / (q - 1.0)) * math.exp(gammaln(a) - gammaln(b))


def q_gaussian_density(x, q: float):
    """Normalized q-Gaussian density g_q evaluated at x (scalar or array)."""
    cq = q_normalization(q)
    x = np.asarray(x, dtype=float)
    out = np.power(1.0 + (q - 1.0) * x * x, 1.0 / (1.0 - q)) / cq
    return float(out) if out.ndim == 0 else out


def q_gaussian_scaled(x, q: float, scale: float):
    """Scale-family density g_q(x/scale)/scale."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    out = np.asarray(q_gaussian_density(np.asarray(x, dtype=float) / scale, q)) / scale
    return float(out) if out.ndim == 0 else out


def _log_scaled_q_gaussian(x: np.ndarray, q: float, log_scale: float) -> np.ndarray:
    """log of g_q(x/beta)/beta with beta = exp(log_scale), without overflow."""
    beta = math.exp(log_scale)
    z = x / beta
    return (
        np.log1p((q - 1.0) * z * z) / (1.0 - q)
        - math.log(q_normalization(q))
        - log_scale
    )


def kde(samples, bandwidth: float, grid_size: int = 2048) -> EmpiricalPdf:
    """Gaussian-kernel density estimate on a uniform grid.

    The grid spans [min - 4*bandwidth, max + 4*bandwidth].  Density values
    are grid-cell averages of the kernel mixture, so the estimate stays
    normalized for any bandwidth: kernels much wider than a grid cell go
    through linear-binned convolution, narrow kernels through exact
    normal-CDF differences per cell.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 10:
        raise ValueError(f"need at least 10 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")

    lo = x.min() - 4.0 * bandwidth
    hi = x.max() + 4.0 * bandwidth
    grid = np.linspace(lo, hi, grid_size)
    dx = grid[1] - grid[0]
    n = x.size

    if bandwidth >= 3.0 * dx:
        density = _binned_kde(x, grid, dx, bandwidth)
    else:
        density = _cell_kde(x, grid, dx, bandwidth)
    return EmpiricalPdf(grid=grid, density=density, bandwidth=float(bandwidth), n_samples=n)


def _cell_kde(x: np.ndarray, grid: np.ndarray, dx: float, bw: float) -> np.ndarray:
    """Exact per-cell kernel mass: density_i = sum_s P(x_s + bw*Z in cell i) / (n*dx)."""
    xs = np.sort(x)
    edges = np.concatenate([grid - 0.5 * dx, [grid[-1] + 0.5 * dx]])
    cutoff = _KERNEL_CUTOFF * bw
    lo = np.searchsorted(xs, edges - cutoff, side="left")
    hi = np.searchsorted(xs, edges + cutoff, side="right")
    cum = np.empty(edges.size)
    for j in range(edges.size):
        # samples below the window contribute a full unit of CDF each
        tail = ndtr((edges[j] - xs[lo[j] : hi[j]]) / bw).sum() if hi[j] > lo[j] else 0.0
        cum[j] = lo[j] + tail
    return np.clip(np.diff(cum), 0.0, None) / (x.size * dx)


def _binned_kde(x: np.ndarray, grid: np.ndarray, dx: float, bw: float) -> np.ndarray:
    # linear binning conserves total mass
    pos = (x - grid[0]) / dx
    i0 = np.floor(pos).astype(int)
    frac = pos - i0
    counts = np.zeros(grid.size)
    np.add.at(counts, np.clip(i0, 0, grid.size - 1), 1.0 - frac)
    np.add.at(counts, np.clip(i0 + 1, 0, grid.size - 1), frac)
    half = min(int(math.ceil(_KERNEL_CUTOFF * bw / dx)), (grid.size - 1) // 2)
    offsets = np.arange(-half, half + 1) * dx
    kernel = np.exp(-0.5 * (offsets / bw) ** 2)
    kernel /= kernel.sum() * dx
    return np.convolve(counts, kernel, mode="same") / x.size


def fit_support(pdf: EmpiricalPdf) -> np.ndarray:
    """Grid cells with a meaningful density estimate.

    Cells whose value sits below the single-sample noise floor (under a
    quarter of one sample's mass per smoothing width) carry no information
    and would dominate a log-space fit, so they are excluded.
    """
    dx = float(pdf.grid[1] - pdf.grid[0])
    floor = 0.25 / (pdf.n_samples * max(pdf.bandwidth, dx))
    return pdf.density > floor


def fit_q_gaussian_semilog(
    pdf: EmpiricalPdf, starts: tuple[float, ...] = (1.2, 1.5, 2.0)
) -> QGaussianFit:
    """Calibrate (q, scale) by least squares of log density against the
    log of the scaled q-Gaussian, over the pdf's usable support.

    Runs a bounded Nelder-Mead from each start; ties go to the lower q.
    R^2 is reported in log space.  A q that converges onto a search bound is
    flagged via ``pinned`` rather than silently accepted.
    """
    mask = fit_support(pdf)
    if pdf.peak <= 0 or mask.sum() < 8:
        raise ValueError("pdf has no usable positive-density support")
    x = pdf.grid[mask]
    y = np.log(pdf.density[mask])
    sst = float(((y - y.mean()) ** 2).sum())

    def sse(params: np.ndarray) -> float:
        q, log_scale = params
        resid = y - _log_scaled_q_gaussian(x, q, log_scale)
        return float(resid @ resid)

    results = []
    for q0 in starts:
        beta0 = 1.0 / (pdf.peak * q_normalization(q0))
        res = minimize(
            sse,
            x0=np.array([q0, math.log(beta0)]),
            method="Nelder-Mead",
            bounds=[(Q_MIN, Q_MAX), (-40.0, 40.0)],
            options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000},
        )
        if res.success or res.fun < np.inf:
            results.append(res)
    if not results:
        raise ValueError("semilog q-Gaussian fit did not converge")

    best_sse = min(r.fun for r in results)
    tol = 1e-8 * (1.0 + abs(best_sse))
    winner = min((r for r in results if r.fun <= best_sse + tol), key=lambda r: r.x[0])
    q_hat, log_scale = (float(v) for v in winner.x)
    r2 = 1.0 - winner.fun / sst if sst > 0 else 1.0
    pinned = (q_hat - Q_MIN) < 1e-4 or (Q_MAX - q_hat) < 1e-4
    return QGaussianFit(
        q=float(q_hat),
        scale=float(math.exp(log_scale)),
        r_squared=float(r2),
        method="semilog",
        pinned=pinned,
    )


def fit_tail_exponent(pdf: EmpiricalPdf, tail_fraction: float = 0.25) -> TailFit:
    """Log-log OLS of the right tail: density ~ x^slope.

    The fit region is the top ``tail_fraction`` of the positive-x range that
    carries a usable density estimate (above the single-sample noise floor,
    which also excludes the bare-kernel roll-off past the largest sample).
    Zero densities inside the region abort the fit; positive cells below the
    noise floor are dropped from the regression.
    """
    if not 0.0 < tail_fraction < 0.5:
        raise ValueError("tail_fraction must lie in (0, 0.5)")
    usable = fit_support(pdf)
    # the top margin of the grid only carries the bare roll-off of the
    # outermost kernels, never a density signal
    usable &= pdf.grid <= pdf.grid[-1] - 5.0 * pdf.bandwidth
    pos = pdf.grid > 0
    x_all = pdf.grid[pos]
    d_all = pdf.density[pos]
    carrying = usable[pos]
    if not carrying.any():
        raise ValueError("no positive density on the right tail")
    x_hi = float(x_all[carrying].max())
    cut = (1.0 - tail_fraction) * x_hi
    sel = (x_all >= cut) & (x_all <= x_hi)
    if np.any(d_all[sel] <= 0):
        raise ValueError("tail region contains zero densities")
    # cells between the floor and zero are positive but unresolved; fit the
    # usable ones only
    sel &= carrying
    if sel.sum() < 10:
        raise ValueError("fewer than 10 grid points in the selected tail")
    slope, intercept, stderr = linefit(np.log(x_all[sel]), np.log(d_all[sel]))
    if slope >= 0:
        raise ValueError(f"tail slope must be negative, got {slope:.4f}")
    return TailFit(
        slope=float(slope),
        intercept=float(intercept),
        fit_range=(float(x_all[sel].min()), x_hi),
        stderr=float(stderr),
    )


def q_from_tail(slope: float) -> float:
    """Map a power-law tail slope m (density ~ x^m, m < 0) to q = 1 - 2/m."""
    if slope >= 0:
        raise ValueError("tail slope must be negative")
    return 1.0 - 2.0 / slope
