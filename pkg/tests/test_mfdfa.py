"""MF-DFA: profile, fluctuation moments, h(w), and the Legendre spectrum."""

import numpy as np
import pytest

from stylefacts import mfdfa, synth


def _order_index(profile_or_matrix, w):
    return int(np.where(profile_or_matrix.orders == w)[0][0])


class TestProfile:
    def test_hand_example(self):
        x = np.array([1.0, -1.0, 1.0, -1.0] * 4)
        prof = mfdfa.profile(x)
        assert np.array_equal(prof[:4], [1.0, 0.0, 1.0, 0.0])

    def test_constant_input_gives_zeros(self):
        prof = mfdfa.profile(np.full(32, 3.3))
        assert np.allclose(prof, 0.0, atol=1e-12)

    def test_last_element_is_zero(self):
        x = np.random.default_rng(1).standard_normal(100)
        assert mfdfa.profile(x)[-1] == pytest.approx(0.0, abs=1e-9)

    def test_too_short(self):
        with pytest.raises(ValueError):
            mfdfa.profile(np.arange(8.0))


def _plain_dfa(prof, scales):
    """Independent reference DFA-1: same segmentation, explicit loops."""
    out = []
    for s in scales:
        n_seg = prof.size // s
        t = np.arange(s, dtype=float)
        f2 = []
        for v in range(n_seg):
            seg = prof[v * s : (v + 1) * s]
            coef = np.polyfit(t, seg, 1)
            resid = seg - np.polyval(coef, t)
            f2.append(np.mean(resid**2))
        out.append(np.sqrt(np.mean(f2)))
    return np.array(out)


class TestFluctuationMatrix:
    def test_pure_linear_profile_rejected(self):
        prof = 3.0 * np.arange(256.0) + 1.0
        with pytest.raises(ValueError, match="zero residual variance"):
            mfdfa.fluctuation_matrix(prof, scales=[8, 16], orders=[2.0])

    def test_order_two_matches_plain_dfa(self):
        prof = mfdfa.profile(synth.gaussian_white(2**12, seed=3))
        scales = [8, 16, 32, 64, 128]
        fm = mfdfa.fluctuation_matrix(prof, scales=scales, orders=[0.0, 2.0])
        reference = _plain_dfa(prof, scales)
        got = fm.values[_order_index(fm, 2.0)]
        assert np.allclose(got, reference, rtol=1e-9)

    def test_white_noise_scaling_exponent(self):
        prof = mfdfa.profile(synth.gaussian_white(2**14, seed=4))
        fm = mfdfa.fluctuation_matrix(prof)
        gh = mfdfa.generalized_hurst(fm)
        h2 = gh.h[_order_index(gh, 2.0)]
        assert h2 == pytest.approx(0.5, abs=0.05)

    def test_moments_non_decreasing_in_order(self):
        prof = mfdfa.profile(synth.gaussian_white(2**12, seed=5))
        fm = mfdfa.fluctuation_matrix(prof)
        diffs = np.diff(fm.values, axis=0)
        assert np.all(diffs >= -1e-12)

    def test_scale_bounds_enforced(self):
        prof = mfdfa.profile(np.random.default_rng(0).standard_normal(256))
        with pytest.raises(ValueError, match="minimum scale"):
            mfdfa.fluctuation_matrix(prof, scales=[2, 8], orders=[2.0])
        with pytest.raises(ValueError, match="maximum scale"):
            mfdfa.fluctuation_matrix(prof, scales=[8, 128], orders=[2.0])


class TestGeneralizedHurst:
    def test_tau_arithmetic(self):
        w = mfdfa.default_orders()
        h = np.full_like(w, 0.5)
        hp = mfdfa.HurstProfile(orders=w, h=h, stderr=np.zeros_like(w), tau=w * h - 1.0)
        assert hp.tau[_order_index(hp, 2.0)] == pytest.approx(0.0, abs=1e-12)
        assert hp.tau[_order_index(hp, 0.0)] == pytest.approx(-1.0, abs=1e-12)

    def test_tau_consistency_enforced(self):
        w = mfdfa.default_orders()
        h = np.full_like(w, 0.5)
        with pytest.raises(ValueError, match="tau"):
            mfdfa.HurstProfile(orders=w, h=h, stderr=np.zeros_like(w), tau=np.zeros_like(w))

    def test_fgn_profile_is_flat(self):
        x = synth.fgn(2**16, 0.7, seed=5)
        fm = mfdfa.fluctuation_matrix(mfdfa.profile(x))
        gh = mfdfa.generalized_hurst(fm)
        sel = np.abs(gh.orders) <= 5.0
        assert gh.h[sel].max() - gh.h[sel].min() < 0.08
        h2 = gh.h[_order_index(gh, 2.0)]
        assert 0.65 <= h2 <= 0.75

    def test_fit_range_needs_six_scales(self):
        prof = mfdfa.profile(synth.gaussian_white(2**12, seed=6))
        fm = mfdfa.fluctuation_matrix(prof, scales=[8, 16, 32, 64, 128], orders=[2.0])
        with pytest.raises(ValueError, match="fewer than 6"):
            mfdfa.generalized_hurst(fm)


def _flat_profile(h0=0.5):
    w = mfdfa.default_orders()
    h = np.full_like(w, h0)
    return mfdfa.HurstProfile(orders=w, h=h, stderr=np.zeros_like(w), tau=w * h - 1.0)


def _two_slope_profile(s_neg=-0.047, s_pos=-0.041, h0=0.5):
    w = mfdfa.default_orders()
    h = np.where(w <= 0, h0 + s_neg * w, h0 + s_pos * w)
    return mfdfa.HurstProfile(orders=w, h=h, stderr=np.zeros_like(w), tau=w * h - 1.0)


class TestLegendreSpectrum:
    def test_linear_case_closed_form(self):
        # h(w) = a*w + b  =>  gamma = b - 2*beta*w^3 and, with
        # W = ((b - gamma)/(2*beta))^(1/3),  f = W*(gamma - h_beta(W)) + 1
        a, b, beta = -0.02, 0.6, 0.001
        w = np.arange(-3.0, 3.0 + 1e-12, 1e-4)
        h = a * w + b
        hp = mfdfa.HurstProfile(orders=w, h=h, stderr=np.zeros_like(w), tau=w * h - 1.0)
        spec = mfdfa.legendre_spectrum(hp, beta)
        inner = slice(2, -2)  # central differences are one-sided at the edges
        gamma_exact = np.sort(b - 2.0 * beta * w**3)
        assert np.allclose(spec.gamma[inner], gamma_exact[inner], atol=1e-8)
        ww = np.cbrt((b - spec.gamma) / (2.0 * beta))
        f_exact = ww * (spec.gamma - (beta * ww**3 + a * ww + b)) + 1.0
        assert np.allclose(spec.f[inner], f_exact[inner], atol=1e-8)

    def test_w_zero_maps_to_one_exactly(self):
        spec = mfdfa.legendre_spectrum(_flat_profile(), 0.01)
        idx = int(np.argmin(np.abs(spec.gamma - 0.5)))
        assert spec.f[idx] == 1.0

    def test_flat_profile_single_peak_narrowing(self):
        sweep = mfdfa.beta_sweep(_flat_profile(), betas=(1.0, 0.1, 0.01, 0.001))
        assert sweep.verdict == "monofractal"
        widths = [s.width for s in sweep.spectra]
        assert all(w1 > w2 for w1, w2 in zip(widths, widths[1:]))
        for spec in sweep.spectra:
            assert len(spec.peaks) == 1
            assert spec.peaks[0][1] == pytest.approx(1.0, abs=1e-6)
            assert spec.peaks[0][0] == pytest.approx(0.5, abs=1e-6)

    def test_two_slope_profile_two_peaks(self):
        sweep = mfdfa.beta_sweep(_two_slope_profile(), betas=(1.0, 0.1, 0.01, 0.001))
        assert sweep.verdict == "multifractal"
        assert len(sweep.spectra[-1].peaks) == 2

    def test_non_monotonic_gamma_rejected(self):
        w = mfdfa.default_orders()
        h = -0.1 * w**2 + 0.5
        hp = mfdfa.HurstProfile(orders=w, h=h, stderr=np.zeros_like(w), tau=w * h - 1.0)
        with pytest.raises(ValueError, match="monotonic"):
            mfdfa.legendre_spectrum(hp, 1e-6)

    def test_beta_validation(self):
        with pytest.raises(ValueError):
            mfdfa.legendre_spectrum(_flat_profile(), 0.0)
        with pytest.raises(ValueError):
            mfdfa.beta_sweep(_flat_profile(), betas=(0.1, 1.0))
        with pytest.raises(ValueError):
            mfdfa.beta_sweep(_flat_profile(), betas=(1.0, -0.1))

    def test_asymmetric_grid_rejected(self):
        w = np.arange(-2.0, 5.0, 0.5)
        h = np.full_like(w, 0.5)
        hp = mfdfa.HurstProfile(orders=w, h=h, stderr=np.zeros_like(w), tau=w * h - 1.0)
        with pytest.raises(ValueError, match="symmetric"):
            mfdfa.legendre_spectrum(hp, 0.01)


class TestMultifractalityTest:
    def test_flat_profile_is_monofractal(self):
        res = mfdfa.multifractality_test(_flat_profile())
        assert res.verdict == "monofractal"
        assert res.slope_negative == pytest.approx(0.0, abs=1e-12)
        assert res.slope_positive == pytest.approx(0.0, abs=1e-12)

    def test_two_slope_profile_is_multifractal(self):
        res = mfdfa.multifractality_test(_two_slope_profile())
        assert res.verdict == "multifractal"
        assert res.slope_negative == pytest.approx(-0.047, abs=1e-3)
        assert res.slope_positive == pytest.approx(-0.041, abs=1e-3)

    def test_white_noise_is_monofractal(self):
        prof = mfdfa.profile(synth.gaussian_white(2**16, seed=2))
        gh = mfdfa.generalized_hurst(mfdfa.fluctuation_matrix(prof))
        assert mfdfa.multifractality_test(gh).verdict == "monofractal"

    def test_needs_both_sides(self):
        w = np.arange(0.5, 5.5, 0.5)
        h = np.full_like(w, 0.5)
        hp = mfdfa.HurstProfile(orders=w, h=h, stderr=np.zeros_like(w), tau=w * h - 1.0)
        with pytest.raises(ValueError, match="negative and positive"):
            mfdfa.multifractality_test(hp)
