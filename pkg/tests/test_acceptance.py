"""Acceptance suite: one test per exit criterion, each printing a PASS line.

All synthetic inputs are seeded, so every criterion is deterministic.  The
final criterion needs a user-supplied BTC/USD 10-minute dataset and is
skipped unless STYLEFACTS_BTC_CSV points at one.
"""

import math
import os
import time

import numpy as np
import pytest
from scipy.integrate import quad

from stylefacts import autocorr, density, diffusion, mfdfa, series, synth
from stylefacts._util import linefit, log_spaced_ints

N16 = 2**16


def _h_at(profile: mfdfa.HurstProfile, w: float) -> float:
    return float(profile.h[np.where(profile.orders == w)[0][0]])


def _mfdfa_h2(returns) -> tuple[float, mfdfa.HurstProfile]:
    prof = mfdfa.profile(returns)
    matrix = mfdfa.fluctuation_matrix(prof)
    hurst = mfdfa.generalized_hurst(matrix)
    return _h_at(hurst, 2.0), hurst


def _peak_hurst(walk: np.ndarray) -> float:
    lags = log_spaced_ints(1, walk.size // 128, 12)
    curve = diffusion.peak_scaling(walk, lags, bandwidth=0.1)
    slope, _, _ = linefit(np.log(curve.lags), np.log(curve.peaks))
    return -float(slope)


def test_criterion_1_monofractal_baseline():
    """MF-DFA on white noise: h(2) = 0.50 +- 0.03, monofractal, < 10 s."""
    start = time.perf_counter()
    noise = synth.gaussian_white(N16, seed=2)
    h2, hurst = _mfdfa_h2(noise)
    verdict = mfdfa.multifractality_test(hurst).verdict
    elapsed = time.perf_counter() - start
    assert abs(h2 - 0.5) <= 0.03
    assert verdict == "monofractal"
    assert elapsed < 10.0
    print(
        f"\n[PASS] criterion 1: white-noise h(2)={h2:.4f} (0.50 +- 0.03), "
        f"verdict={verdict}, runtime {elapsed:.2f}s < 10s"
    )


def test_criterion_2_fgn_recovery_and_consistency():
    """fGn H in {0.3, 0.5, 0.7}: MF-DFA h(2) and peak-scaling H within
    +-0.05 of H and of each other."""
    lines = []
    for h_true in (0.3, 0.5, 0.7):
        noise = synth.fgn(N16, h_true, seed=7)
        h2, _ = _mfdfa_h2(noise)
        h_peak = _peak_hurst(np.cumsum(noise.values))
        assert abs(h2 - h_true) <= 0.05, (h_true, h2)
        assert abs(h_peak - h_true) <= 0.05, (h_true, h_peak)
        assert abs(h2 - h_peak) <= 0.05, (h_true, h2, h_peak)
        lines.append(f"H={h_true}: h2={h2:.3f}, peak={h_peak:.3f}")
    print("\n[PASS] criterion 2: fGn recovery within +-0.05: " + "; ".join(lines))


def test_criterion_3_q_gaussian_round_trip():
    """Sampler -> semilog fit q in [1.45, 1.55]; tail method q in [1.40, 1.60];
    normalization of g_q within 1e-6; C_2 = pi to 1e-10."""
    samples = synth.q_gaussian_sample(10**6, 1.5, seed=3)

    clipped = samples[np.abs(samples) <= np.quantile(np.abs(samples), 0.999)]
    semilog_pdf = density.kde(clipped, bandwidth=0.02 * clipped.std())
    semilog = density.fit_q_gaussian_semilog(semilog_pdf)
    assert 1.45 <= semilog.q <= 1.55

    tail_clipped = samples[np.abs(samples) <= 20.0]
    tail_pdf = density.kde(tail_clipped, bandwidth=0.3)
    tail = density.fit_tail_exponent(tail_pdf, tail_fraction=0.49)
    q_tail = density.q_from_tail(tail.slope)
    assert 1.40 <= q_tail <= 1.60

    for q in (1.1, 1.5, 2.0, 2.5):
        total, _ = quad(density.q_gaussian_density, -np.inf, np.inf, args=(q,), limit=300)
        assert abs(total - 1.0) < 1e-6, q
    assert abs(density.q_normalization(2.0) - math.pi) < 1e-10

    print(
        f"\n[PASS] criterion 3: semilog q={semilog.q:.4f} in [1.45,1.55], "
        f"tail q={q_tail:.4f} in [1.40,1.60], g_q normalized to 1e-6, C_2=pi to 1e-10"
    )


def test_criterion_4_acf_oracles():
    """AR(1) C(1) in [0.49, 0.51]; chopping within 3*stderr of sample at
    >= 95% of lags; exact power law -1.17 to 1e-6 with H = 0.415."""
    ar = synth.ar1(10**6, 0.5, seed=1)
    c1 = autocorr.sample_acf(ar, 5).values[1]
    assert 0.49 <= c1 <= 0.51

    white = synth.gaussian_white(10**6, seed=2)
    sample = autocorr.sample_acf(white, 999)
    chopped = autocorr.chopped_acf(white, 1000)
    half = chopped.lags.size // 2  # the usable half of the segment
    diff = np.abs(chopped.values[1 : half + 1] - sample.values[1 : half + 1])
    frac = float(np.mean(diff <= 3.0 * chopped.stderr[1 : half + 1]))
    assert frac >= 0.95

    lags = np.arange(0, 101)
    values = np.ones(101)
    values[1:] = lags[1:].astype(float) ** -1.17
    curve = autocorr.AcfCurve(lags=lags, values=values, kind="sample")
    slope, _ = autocorr.fit_abs_acf_slope(curve, 1, 10)
    assert abs(slope + 1.17) <= 1e-6
    hurst = autocorr.hurst_from_acf_slope(slope)
    assert hurst == pytest.approx(0.415, abs=1e-9)

    print(
        f"\n[PASS] criterion 4: AR(1) C(1)={c1:.4f} in [0.49,0.51], "
        f"chopping-vs-sample {100 * frac:.1f}% within 3*stderr (>=95%), "
        f"power-law slope {slope:.8f} -> H={hurst:.4f}"
    )


def test_criterion_5_detrend_exactness():
    """trend + residual reproduces the input to <= 1 ulp on 1e6 samples;
    golden five-point fixture matches the hand-evaluated edge formulas."""
    rng = np.random.default_rng(11)
    x = 20_000.0 + np.cumsum(rng.standard_normal(10**6))
    decomp = series.moving_average_trend(x, 1008)
    recon = decomp.trend + decomp.residual
    ulps = np.abs(recon - x) / np.spacing(np.abs(x))
    max_ulp = float(ulps.max())
    assert max_ulp <= 1.0

    golden_in = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    golden_trend = np.array([1.2, 7.0 / 3.0, 14.0 / 3.0, 11.2, 16.0])
    fixture = series.moving_average_trend(golden_in, 3)
    assert np.allclose(fixture.trend, golden_trend, rtol=0, atol=1e-12)

    print(
        f"\n[PASS] criterion 5: reconstruction within {max_ulp:.2f} ulp on 1e6 samples; "
        "golden 5-point fixture matches hand values"
    )


def test_criterion_6_gaussian_collapse():
    """Gaussian PDFs with sigma = t^0.5 collapse to sup-distance < 0.01 at H=0.5."""
    pdfs = []
    for t in (1, 4, 16, 64):
        sig = t**0.5
        grid = np.linspace(-8 * sig, 8 * sig, 3001)
        dens = np.exp(-0.5 * (grid / sig) ** 2) / (sig * np.sqrt(2 * np.pi))
        pdfs.append(
            (t, density.EmpiricalPdf(grid, dens, bandwidth=grid[1] - grid[0], n_samples=10**6))
        )
    result = diffusion.collapse_pdfs(pdfs, hurst=0.5)
    assert result.collapse_distance < 0.01
    print(
        f"\n[PASS] criterion 6: Gaussian collapse distance "
        f"{result.collapse_distance:.2e} < 0.01 (master q={result.master_q:.4f})"
    )


def test_criterion_7_legendre_machinery():
    """Flat h(w)=0.5: beta sweep gives a single peak with f_max = 1 +- 1e-6,
    narrowing monotonically; a two-slope profile gives exactly two peaks at
    beta = 0.001."""
    w = mfdfa.default_orders()
    flat = mfdfa.HurstProfile(
        orders=w, h=np.full_like(w, 0.5), stderr=np.zeros_like(w), tau=w * 0.5 - 1.0
    )
    sweep = mfdfa.beta_sweep(flat, betas=(1.0, 0.1, 0.01, 0.001))
    widths = [spec.width for spec in sweep.spectra]
    assert all(a > b for a, b in zip(widths, widths[1:]))
    for spec in sweep.spectra:
        assert len(spec.peaks) == 1
        assert abs(spec.peaks[0][1] - 1.0) <= 1e-6
    assert sweep.verdict == "monofractal"

    h2s = np.where(w <= 0, 0.5 - 0.047 * w, 0.5 - 0.041 * w)
    two_slope = mfdfa.HurstProfile(
        orders=w, h=h2s, stderr=np.zeros_like(w), tau=w * h2s - 1.0
    )
    sweep2 = mfdfa.beta_sweep(two_slope, betas=(1.0, 0.1, 0.01, 0.001))
    assert len(sweep2.spectra[-1].peaks) == 2
    assert sweep2.verdict == "multifractal"

    print(
        "\n[PASS] criterion 7: flat profile -> single peak, f_max = 1 +- 1e-6, "
        f"widths narrow {['%.3g' % v for v in widths]}; "
        "two-slope profile -> exactly 2 peaks at beta = 0.001"
    )


BTC_ENV = "STYLEFACTS_BTC_CSV"


@pytest.mark.skipif(
    not os.environ.get(BTC_ENV),
    reason=f"optional data cross-check: set {BTC_ENV} to a BTC/USD 10-minute CSV "
    "covering 2019-04-02..2022-05-09 (environment-dependent, excluded from gating)",
)
def test_criterion_8_btc_cross_check(tmp_path):
    """Given equivalent market data, the report reproduces the reference
    values below within +-0.05 on q and H and +-0.1 on ACF slopes."""
    from stylefacts.config import RunConfig
    from stylefacts.pipeline import run

    config = RunConfig.from_dict(
        {
            "input": os.environ[BTC_ENV],
            "output_dir": str(tmp_path / "btc-out"),
            "columns": {"timestamp": "timestamp", "price": "price"},
            "dt_minutes": 10,
            "max_gap": 6,
            "periods": [
                {"name": "period1", "start": "2019-04-02", "end": "2020-12-31"},
                {"name": "period2", "start": "2021-01-01", "end": "2022-05-09"},
            ],
        }
    )
    report, failures = run(config)
    assert failures == 0
    expected = {
        "period1": {"tail_q": 1.51, "semilog_q": 1.53, "h_short": 0.415, "h_long": 0.610, "acf_slope": -1.17},
        "period2": {"tail_q": 1.50, "semilog_q": 1.57, "h_short": 0.478, "h_long": 0.646, "acf_slope": -1.07},
    }
    for name, targets in expected.items():
        per = report["periods"][name]
        assert abs(per["tail_fit"]["q"] - targets["tail_q"]) <= 0.05
        assert abs(per["semilog_fit"]["q"] - targets["semilog_q"]) <= 0.05
        assert abs(per["diffusion"]["h_short"] - targets["h_short"]) <= 0.05
        assert abs(per["diffusion"]["h_long"] - targets["h_long"]) <= 0.05
        assert abs(per["acf"]["slope"] - targets["acf_slope"]) <= 0.1
    print("\n[PASS] criterion 8: BTC/USD cross-check within stated tolerances")
