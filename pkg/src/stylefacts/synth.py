"""Seeded synthetic processes with known exponents, used as estimator oracles.

Every generator is a pure function of (parameters, seed): the same 64-bit
seed reproduces the output bit for bit.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from .series import ReturnSeries

__all__ = ["gaussian_white", "fgn", "fgn_autocovariance", "q_gaussian_sample", "ar1"]


def gaussian_white(n: int, sigma: float = 1.0, seed: int = 0, dt_minutes: int = 10) -> ReturnSeries:
    """iid N(0, sigma^2) increments."""
    if n < 1:
        raise ValueError("n must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    return ReturnSeries(values=sigma * rng.standard_normal(n), dt_minutes=dt_minutes)


def fgn_autocovariance(h: float, k) -> np.ndarray:
    """Autocovariance of unit-variance fractional Gaussian noise at lag k:
    rho(k) = 0.5 * (|k+1|^2H - 2|k|^2H + |k-1|^2H)."""
    k = np.abs(np.asarray(k, dtype=float))
    return 0.5 * (
        np.abs(k + 1) ** (2 * h) - 2 * k ** (2 * h) + np.abs(k - 1) ** (2 * h)
    )


def fgn(n: int, h: float, seed: int = 0, dt_minutes: int = 10) -> ReturnSeries:
    """Fractional Gaussian noise with exact target autocovariance.

    Exact circulant-embedding (Davies-Harte) synthesis; the cumulative sum is
    fractional Brownian motion with Hurst exponent h.  n must be a power of
    two so the embedding stays exact.
    """
    if not 0.0 < h < 1.0:
        raise ValueError(f"Hurst exponent must lie in (0, 1), got {h}")
    if n < 2 or n & (n - 1) != 0:
        raise ValueError(f"n must be a power of two, got {n}")
    rng = np.random.default_rng(seed)

    if h == 0.5:
        return ReturnSeries(values=rng.standard_normal(n), dt_minutes=dt_minutes)

    rho = fgn_autocovariance(h, np.arange(n))
    # first row of the 2n circulant embedding: rho_0..rho_{n-1}, 0, rho_{n-1}..rho_1
    row = np.concatenate([rho, [0.0], rho[-1:0:-1]])
    eig = np.fft.fft(row).real
    if eig.min() < -1e-8:
        raise ValueError(
            f"circulant embedding not nonnegative definite (min eigenvalue {eig.min():.3e})"
        )
    eig = np.clip(eig, 0.0, None)

    a = rng.standard_normal(n)
    b = rng.standard_normal(n)
    m = 2 * n
    w = np.empty(m, dtype=complex)
    w[0] = np.sqrt(eig[0] / m) * a[0]
    w[n] = np.sqrt(eig[n] / m) * b[0]
    k = np.arange(1, n)
    w[k] = np.sqrt(eig[k] / (2 * m)) * (a[k] + 1j * b[k])
    w[m - k] = np.sqrt(eig[m - k] / (2 * m)) * (a[k] - 1j * b[k])

    z = np.fft.fft(w)
    return ReturnSeries(values=z[:n].real, dt_minutes=dt_minutes)


def q_gaussian_sample(n: int, q: float, seed: int = 0) -> np.ndarray:
    """iid draws from the normalized q-Gaussian g_q via the generalized
    Box-Muller construction.

    For q >= 5/3 the variance is infinite; distribution checks there should
    rely on quantiles rather than moments.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 1.0 < q < 3.0:
        raise ValueError(f"q must lie in (1, 3), got {q}")
    rng = np.random.default_rng(seed)
    u1 = rng.random(n)
    u2 = rng.random(n)
    qp = (1.0 + q) / (3.0 - q)
    # q'-logarithm of u1; qp > 1 for q in (1, 3) so this is always <= 0
    lnq = (u1 ** (1.0 - qp) - 1.0) / (1.0 - qp)
    z = np.sqrt(-2.0 * lnq) * np.cos(2.0 * np.pi * u2)
    return z / np.sqrt(3.0 - q)


def ar1(n: int, phi: float, seed: int = 0, dt_minutes: int = 10) -> ReturnSeries:
    """Stationary AR(1): x[t+1] = phi * x[t] + eps[t] with unit-variance noise."""
    if n < 1:
        raise ValueError("n must be positive")
    if not -1.0 < phi < 1.0:
        raise ValueError(f"phi must lie in (-1, 1), got {phi}")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(n)
    if phi == 0.0:
        return ReturnSeries(values=eps, dt_minutes=dt_minutes)
    x0 = rng.standard_normal() / np.sqrt(1.0 - phi * phi)
    values, _ = lfilter([1.0], [1.0, -phi], eps, zi=np.array([phi * x0]))
    return ReturnSeries(values=values, dt_minutes=dt_minutes)
