"""Configuration-driven analysis pipeline over ingested price periods.

Each period runs the full battery: returns and rolling volatility, PDF-peak
scaling with a two-regime fit, tail and semilog q-Gaussian calibration,
sample and chopping autocorrelation, moving-average detrending with a
self-similarity collapse, and MF-DFA with a regularized singularity-spectrum
sweep.  Failures are isolated per period and per analysis so a long batch
never loses completed work.
"""

from __future__ import annotations

import os

import numpy as np

from . import autocorr, density, diffusion, mfdfa, series
from ._util import log_spaced_ints
from .config import RunConfig
from .errors import DataError
from .ingest import PriceSeries, filter_jumps, parse_price_csv, resample_to_grid, split_periods
from .report import new_report, write_csv, write_report

__all__ = ["run", "sweep_detrend_window", "load_periods"]

GAP_NOTE_THRESHOLD = 1e-3


def load_periods(config: RunConfig) -> tuple[dict[str, PriceSeries], list[str]]:
    """Ingest the configured CSV and split it into the configured periods."""
    notes: list[str] = []
    try:
        with open(config.input_path, "rb") as fh:
            table = parse_price_csv(fh, config.column_map)
    except OSError as exc:
        raise DataError(f"cannot read input {config.input_path!r}: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"CSV parse failed: {exc}") from exc

    if config.jump_threshold is not None:
        table, dropped = filter_jumps(table, config.jump_threshold)
        if dropped:
            notes.append(
                f"jump filter dropped {dropped} ticks "
                f"(|price change| > {config.jump_threshold:g})"
            )
    try:
        full = resample_to_grid(table, config.dt_minutes, config.max_gap)
        periods = split_periods(full, config.periods)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    return periods, notes


def run(config: RunConfig) -> tuple[dict, int]:
    """Execute the full pipeline; returns (report, number of failed analyses).

    Writes report.json / report.txt and per-period CSV plot data under the
    configured output directory.
    """
    config.validate()
    periods, notes = load_periods(config)
    report = new_report(config.to_dict())
    report["notes"].extend(notes)
    failures = 0

    for name, ps in periods.items():
        outdir = os.path.join(config.output_dir, name)
        os.makedirs(outdir, exist_ok=True)
        per, n_failed = _analyze_period(ps, config, outdir, report["notes"], name)
        report["periods"][name] = per
        failures += n_failed

    write_report(report, config.output_dir)
    return report, failures


def _run_guarded(per: dict, analysis: str, fn) -> bool:
    """Run one analysis, capturing any failure into the report."""
    try:
        fn()
        return True
    except Exception as exc:  # isolate per-analysis failures
        per.setdefault("errors", {})[analysis] = f"{type(exc).__name__}: {exc}"
        return False


def _analyze_period(
    ps: PriceSeries, config: RunConfig, outdir: str, notes: list[str], name: str
) -> tuple[dict, int]:
    per: dict = {
        "n_samples": len(ps),
        "gap_fill_fraction": ps.gap_fill_fraction(),
    }
    if ps.gap_fill_fraction() > GAP_NOTE_THRESHOLD:
        notes.append(
            f"{name}: {100 * ps.gap_fill_fraction():.3f}% of grid points are "
            "carried forward over data gaps"
        )
    failed = 0
    returns = series.increments(ps)
    write_csv(
        os.path.join(outdir, "price.csv"),
        ["t_minutes", "value", "gap_filled"],
        (
            (i * ps.dt_minutes, float(v), int(g))
            for i, (v, g) in enumerate(zip(ps.values, ps.gap_mask))
        ),
    )
    write_csv(
        os.path.join(outdir, "returns.csv"),
        ["t_minutes", "return"],
        ((i * ps.dt_minutes, float(v)) for i, v in enumerate(returns.values)),
    )

    def volatility():
        vol = series.rolling_volatility(returns, window=6)
        write_csv(
            os.path.join(outdir, "rolling_volatility.csv"),
            ["t_minutes", "sigma"],
            ((i * ps.dt_minutes, float(v)) for i, v in enumerate(vol)),
        )
        per["volatility"] = {
            "window": 6,
            "mean": float(vol.mean()),
            "max": float(vol.max()),
        }

    def pdf_fits():
        x = returns.values
        sd = float(np.std(x, ddof=1))
        if config.kde.bandwidth_mode == "normalized":
            samples = x / sd
            bw = config.kde.bandwidth
            per["pdf_units"] = "returns normalized by sample std"
        else:
            samples = x
            bw = config.kde.bandwidth
            per["pdf_units"] = "raw returns"
        pdf = density.kde(samples, bw, config.kde.grid_size)
        pdf.to_csv(os.path.join(outdir, "pdf_lag1.csv"))

        tail = density.fit_tail_exponent(pdf)
        per["tail_fit"] = {
            "slope": tail.slope,
            "stderr": tail.stderr,
            "fit_range": list(tail.fit_range),
            "q": density.q_from_tail(tail.slope),
        }
        fit = density.fit_q_gaussian_semilog(pdf)
        per["semilog_fit"] = {
            "q": fit.q,
            "scale": fit.scale,
            "r_squared": fit.r_squared,
            "pinned": fit.pinned,
        }
        if fit.pinned:
            notes.append(f"{name}: semilog q-Gaussian fit pinned at a q bound")
        fitted = density.q_gaussian_scaled(pdf.grid, fit.q, fit.scale)
        write_csv(
            os.path.join(outdir, "qgaussian_fit.csv"),
            ["x", "density", "fitted"],
            zip(pdf.grid, pdf.density, fitted),
        )

    def peak_diffusion():
        lags = config.diffusion.lags
        if lags is None:
            hi = min(config.diffusion.max_lag, len(ps) // 4 - 1)
            lags = log_spaced_ints(1, hi, config.diffusion.n_lags)
        curve = diffusion.peak_scaling(
            ps, lags, config.kde.bandwidth, config.kde.grid_size
        )
        curve.to_csv(os.path.join(outdir, "peak_scaling.csv"), ps.dt_minutes)
        # raw density evolution over the short-lag decade for plotting
        rows = []
        for lag in [v for v in curve.lags if v <= 100][:6]:
            ens = series.return_ensemble(ps, int(lag)).values
            pdf = density.kde(ens, config.kde.bandwidth * ens.std(), config.kde.grid_size)
            rows.extend((int(lag), float(x), float(d)) for x, d in zip(pdf.grid, pdf.density))
        write_csv(os.path.join(outdir, "pdf_evolution.csv"), ["lag", "x", "density"], rows)
        fit = diffusion.fit_two_regime(curve)
        tol = config.diffusion.regime_tolerance
        per["diffusion"] = {
            "h_short": fit.h_short,
            "h_long": fit.h_long,
            "alpha_short": fit.alpha_short,
            "alpha_long": fit.alpha_long,
            "stderr_short": fit.stderr_short,
            "stderr_long": fit.stderr_long,
            "breakpoint_lag": fit.breakpoint,
            "regime_short": (
                diffusion.classify_regime(fit.alpha_short, tol)
                if fit.h_short > 0
                else "undetermined"
            ),
            "regime_long": (
                diffusion.classify_regime(fit.alpha_long, tol)
                if fit.h_long > 0
                else "undetermined"
            ),
        }
        if fit.h_short <= 0 or fit.h_long <= 0:
            notes.append(f"{name}: peak-scaling fit produced a non-positive exponent")

    def acf_analysis():
        sample = autocorr.sample_acf(returns, config.acf.max_lag)
        sample.to_csv(os.path.join(outdir, "acf_sample.csv"))
        chopped = autocorr.chopped_acf(returns, config.acf.segment_length)
        chopped.to_csv(os.path.join(outdir, "acf_chopping.csv"))
        if chopped.n_dropped_segments:
            notes.append(
                f"{name}: chopping ACF dropped {chopped.n_dropped_segments} "
                "zero-variance segments"
            )
        slope, stderr = autocorr.fit_abs_acf_slope(
            sample, config.acf.fit_lo, config.acf.fit_hi
        )
        entry = {
            "slope": slope,
            "slope_stderr": stderr,
            "hurst": None,
            "dropped_segments": chopped.n_dropped_segments,
            "memory_time": None,
        }
        per["acf"] = entry
        if -2.0 < slope < 0.0:
            entry["hurst"] = autocorr.hurst_from_acf_slope(slope)
        else:
            notes.append(
                f"{name}: absolute-ACF slope {slope:.3f} outside (-2, 0); "
                "no power-law decay, Hurst not derived"
            )
        entry["memory_time"] = autocorr.memory_time(sample)

    def detrend_collapse():
        window = min(config.detrend.window, len(ps))
        decomp = series.moving_average_trend(ps, window)
        write_csv(
            os.path.join(outdir, "trend.csv"),
            ["t_minutes", "value", "trend", "residual"],
            (
                (i * ps.dt_minutes, float(v), float(t), float(r))
                for i, (v, t, r) in enumerate(
                    zip(ps.values, decomp.trend, decomp.residual)
                )
            ),
        )
        h_ref = per.get("diffusion", {}).get("h_short") or 0.5
        h_ref = min(max(h_ref, 0.05), 0.95)
        pdfs = []
        for lag in config.detrend.collapse_lags:
            if lag >= len(ps) // 4:
                break
            ens = series.return_ensemble(decomp.residual, lag).values
            sd = ens.std()
            if sd == 0:
                raise ValueError(f"zero-variance detrended ensemble at lag {lag}")
            pdfs.append((lag, density.kde(ens, config.kde.bandwidth * sd, config.kde.grid_size)))
        result = diffusion.collapse_pdfs(pdfs, h_ref)
        rows = []
        for (lag, pdf), beta in zip(pdfs, result.scale_factors):
            for x, d in zip(pdf.grid / beta, pdf.density * beta):
                rows.append((lag, float(x), float(d)))
        write_csv(os.path.join(outdir, "collapse_pdfs.csv"), ["lag", "x_rescaled", "density_rescaled"], rows)
        result.to_csv(os.path.join(outdir, "collapse_scales.csv"), lags=[lag for lag, _ in pdfs])
        per["detrend"] = {
            "window": window,
            "collapse_q": result.master_q,
            "collapse_distance": result.collapse_distance,
            "scale_factors": [float(b) for b in result.scale_factors],
            "implied_xi": h_ref * (3.0 - result.master_q),
        }

    def mfdfa_analysis():
        if config.mfdfa.input == "detrended":
            window = min(config.detrend.window, len(ps))
            src = series.increments(
                series.moving_average_trend(ps, window).residual, detrended=True
            )
        else:
            src = returns
        prof = mfdfa.profile(src)
        scales = config.mfdfa.scales
        fm = mfdfa.fluctuation_matrix(prof, scales=scales, orders=config.mfdfa.orders)
        fm.to_csv(os.path.join(outdir, "fluctuation_moments.csv"))
        lo = config.mfdfa.fit_lo if config.mfdfa.fit_lo is not None else int(fm.scales[0])
        hi = config.mfdfa.fit_hi if config.mfdfa.fit_hi is not None else int(fm.scales[-1])
        gh = mfdfa.generalized_hurst(fm, fit_range=(lo, hi))
        gh.to_csv(os.path.join(outdir, "hurst_orders.csv"))
        test = mfdfa.multifractality_test(
            gh, config.mfdfa.slope_threshold, config.mfdfa.h_range_threshold
        )
        sweep = mfdfa.beta_sweep(gh, config.mfdfa.betas)
        for spec in sweep.spectra:
            spec.to_csv(os.path.join(outdir, f"spectrum_beta_{spec.beta:g}.csv"))
        h2_idx = np.where(gh.orders == 2.0)[0]
        per["mfdfa"] = {
            "input": config.mfdfa.input,
            "h2": float(gh.h[h2_idx[0]]) if h2_idx.size else None,
            "slope_negative": test.slope_negative,
            "slope_positive": test.slope_positive,
            "h_range": test.h_range,
            "verdict": test.verdict,
            "sweep_verdict": sweep.verdict,
            "n_peaks_smallest_beta": len(sweep.spectra[-1].peaks),
            "n_skipped_segments": fm.n_skipped_segments,
        }
        notes.append(f"{name}: scaling analysis ran on {config.mfdfa.input} returns")

    for analysis, fn in (
        ("volatility", volatility),
        ("pdf_fits", pdf_fits),
        ("diffusion", peak_diffusion),
        ("acf", acf_analysis),
        ("detrend_collapse", detrend_collapse),
        ("mfdfa", mfdfa_analysis),
    ):
        if not _run_guarded(per, analysis, fn):
            failed += 1
    return per, failed


def sweep_detrend_window(config: RunConfig, candidates: list[int]) -> list[dict]:
    """Detrend with each candidate window and score how Gaussian the
    large-lag detrended return PDFs become (R^2 of a parabola fit to the
    log density over the central mass).  Half a window is trimmed from each
    end of the residual so the truncated edge averages do not contaminate
    the ensembles.

    Returns one row per candidate with per-lag R^2, the minimum, and a flag
    marking candidates whose every PDF reaches R^2 >= 0.95.
    """
    config.validate()
    if not candidates or min(candidates) < 1:
        raise ValueError("candidate windows must be positive integers")
    periods, _ = load_periods(config)
    rows: list[dict] = []
    for name, ps in periods.items():
        for window in candidates:
            if window > len(ps):
                rows.append(
                    {
                        "period": name,
                        "window": window,
                        "r2_by_lag": {},
                        "min_r2": None,
                        "ok": False,
                        "error": "window exceeds series length",
                    }
                )
                continue
            decomp = series.moving_average_trend(ps, window)
            trim = (window + 1) // 2
            residual = decomp.residual
            if residual.size > 4 * trim and trim > 0:
                residual = residual[trim:-trim]
            r2s: dict[int, float] = {}
            for lag in config.detrend.sweep_lags:
                if lag >= residual.size // 4:
                    continue
                ens = series.return_ensemble(residual, lag).values
                sd = ens.std()
                if sd == 0:
                    continue
                pdf = density.kde(ens, config.kde.bandwidth * sd, config.kde.grid_size)
                r2s[lag] = _gaussian_r2(pdf)
            min_r2 = min(r2s.values()) if r2s else None
            rows.append(
                {
                    "period": name,
                    "window": window,
                    "r2_by_lag": r2s,
                    "min_r2": min_r2,
                    "ok": bool(min_r2 is not None and min_r2 >= 0.95),
                }
            )
    return rows


def _gaussian_r2(pdf: density.EmpiricalPdf, mass_cut: float = 1e-3) -> float:
    """R^2 of a concave parabola fit to ln density over the central mass."""
    mask = pdf.density > pdf.peak * mass_cut
    x = pdf.grid[mask]
    y = np.log(pdf.density[mask])
    if x.size < 8:
        raise ValueError("too few points for a Gaussian fit")
    coeffs = np.polyfit(x, y, 2)
    fitted = np.polyval(coeffs, x)
    sse = float(((y - fitted) ** 2).sum())
    sst = float(((y - y.mean()) ** 2).sum())
    if coeffs[0] >= 0:
        return 0.0
    return 1.0 - sse / sst if sst > 0 else 1.0
