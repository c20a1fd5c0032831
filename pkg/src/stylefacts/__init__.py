"""Stylized-facts analysis toolkit for high-frequency price series.

Covers fat-tail calibration with q-Gaussian distributions, anomalous
diffusion exponents from PDF-peak scaling, sample/ensemble autocorrelation,
moving-average detrending with self-similarity collapse, and multifractal
detrended fluctuation analysis with a regularized singularity spectrum, all
validated against seeded synthetic processes with known exponents.
"""

from . import autocorr, density, diffusion, ingest, mfdfa, series, synth
from .config import RunConfig, load_config
from .pipeline import run, sweep_detrend_window

__version__ = "0.1.0"

__all__ = [
    "autocorr",
    "density",
    "diffusion",
    "ingest",
    "mfdfa",
    "series",
    "synth",
    "RunConfig",
    "load_config",
    "run",
    "sweep_detrend_window",
    "__version__",
]
