import numpy as np
import pytest
from scipy.integrate import quad

import rbpulse as rb
from rbpulse.errors import ConfigError, FitError
from rbpulse.pulse import fwhm_of

LN2 = np.log(2.0)


class TestPulseSpec:
    def test_transform_limit_relation(self):
        spec = rb.PulseSpec(spectral_fwhm=5.69e9)
        assert spec.temporal_fwhm == pytest.approx(2 * LN2 / (np.pi * 5.69e9), rel=1e-12)
        assert spec.temporal_fwhm == pytest.approx(77.56e-12, rel=1e-3)

    def test_temporal_only(self):
        spec = rb.PulseSpec(spectral_fwhm=None, temporal_fwhm=100e-12)
        assert spec.spectral_fwhm == pytest.approx(2 * LN2 / (np.pi * 100e-12), rel=1e-12)

    def test_inconsistent_pair_rejected(self):
        with pytest.raises(ConfigError):
            rb.PulseSpec(spectral_fwhm=5.69e9, temporal_fwhm=100e-12)

    def test_validation(self):
        with pytest.raises(ConfigError):
            rb.PulseSpec(amplitude=0.0)
        with pytest.raises(ConfigError):
            rb.PulseSpec(emission_lifetime=-1.0)


class TestGaussianEnvelope:
    def test_peak_value_is_amplitude(self):
        spec = rb.PulseSpec(amplitude=42.0)
        t = np.linspace(-0.5e-9, 0.5e-9, 2001)
        env = rb.gaussian_envelope(spec, t)
        assert np.abs(env).max() == pytest.approx(42.0, rel=1e-9)

    def test_intensity_fwhm(self):
        spec = rb.PulseSpec(spectral_fwhm=5.69e9)
        t = np.linspace(-0.5e-9, 0.5e-9, 20001)
        series = rb.SampledSeries(t[0], t[1] - t[0], np.abs(rb.gaussian_envelope(spec, t)) ** 2)
        assert fwhm_of(series) == pytest.approx(77.56e-12, rel=1e-3)

    def test_half_intensity_at_half_fwhm(self):
        spec = rb.PulseSpec()
        dt_fwhm = spec.temporal_fwhm
        env = rb.gaussian_envelope(spec, np.array([-3.1 * dt_fwhm, 0.0, dt_fwhm / 2, 3.1 * dt_fwhm]))
        assert np.abs(env[2]) ** 2 == pytest.approx(0.5 * np.abs(env[1]) ** 2, rel=1e-12)

    def test_short_axis_rejected(self):
        spec = rb.PulseSpec()
        with pytest.raises(ValueError):
            rb.gaussian_envelope(spec, np.linspace(-1e-10, 1e-10, 11))


class TestSpectrumTime:
    def test_gaussian_pair(self):
        f = np.linspace(-320e9, 320e9, 16384)
        S = np.exp(-4 * LN2 * (f / 5.69e9) ** 2)
        ts = rb.spectrum_to_time(rb.SampledSeries(f[0], f[1] - f[0], S, axis_unit="Hz"))
        assert fwhm_of(ts) == pytest.approx(2 * LN2 / (np.pi * 5.69e9), rel=1e-3)

    def test_single_bin_gives_flat_intensity(self):
        S = np.zeros(512)
        S[300] = 1.0
        ts = rb.spectrum_to_time(rb.SampledSeries(0.0, 1e9, S, axis_unit="Hz"))
        np.testing.assert_allclose(ts.values, 1.0, rtol=1e-12)

    def test_negative_spectrum_rejected(self):
        with pytest.raises(ValueError):
            rb.spectrum_to_time(rb.SampledSeries(0.0, 1e9, np.array([1.0, -0.1, 1.0])))

    def test_round_trip(self):
        f = np.linspace(-100e9, 100e9, 4096)
        S = np.exp(-4 * LN2 * (f / 8e9) ** 2)
        ts = rb.spectrum_to_time(rb.SampledSeries(f[0], f[1] - f[0], S, axis_unit="Hz"))
        back = rb.spectrum_to_time(rb.time_to_spectrum(ts))
        err = np.linalg.norm(back.values - ts.values) / np.linalg.norm(ts.values)
        assert err < 1e-6

    @pytest.mark.parametrize("dnu", [1e9, 5.69e9, 20e9])
    def test_time_bandwidth_identity(self, dnu):
        # both construction routes agree on dt*dnu = 2 ln2/pi to 0.1%
        spec = rb.PulseSpec(spectral_fwhm=dnu)
        t = np.linspace(-60.0 / dnu, 60.0 / dnu, 40001)
        direct = rb.SampledSeries(t[0], t[1] - t[0], np.abs(rb.gaussian_envelope(spec, t)) ** 2)
        f = np.linspace(-60 * dnu, 60 * dnu, 32768)
        S = np.exp(-4 * LN2 * (f / dnu) ** 2)
        via_fft = rb.spectrum_to_time(rb.SampledSeries(f[0], f[1] - f[0], S, axis_unit="Hz"))
        for series in (direct, via_fft):
            assert fwhm_of(series) * dnu == pytest.approx(2 * LN2 / np.pi, rel=1e-3)


class TestVoigt:
    def test_lorentzian_limit(self):
        nu = np.linspace(-5e9, 5e9, 1001)
        fwhm_l = 1.2e9
        v = rb.voigt_intensity(nu, fwhm_l, fwhm_l * 1e-4)
        gamma = fwhm_l / 2
        lor = gamma / np.pi / (nu**2 + gamma**2)
        assert np.max(np.abs(v - lor)) / lor.max() < 1e-3

    def test_gaussian_limit(self):
        nu = np.linspace(-5e9, 5e9, 1001)
        sigma = 1.0e9
        v = rb.voigt_intensity(nu, sigma * 1e-5, sigma)
        gauss = np.exp(-(nu**2) / (2 * sigma**2)) / (sigma * np.sqrt(2 * np.pi))
        assert np.max(np.abs(v - gauss)) / gauss.max() < 1e-3

    def test_normalized(self):
        # finite-window quadrature plus the analytic Lorentzian tail mass
        fwhm_l, sigma = 1.18e9, 1.31e9
        cut = 50 * (fwhm_l + sigma)
        core, _ = quad(
            lambda nu: rb.voigt_intensity(nu, fwhm_l, sigma), -cut, cut, limit=400
        )
        tail = 2 * np.arctan(0.5 * fwhm_l / cut) / np.pi
        assert core + tail == pytest.approx(1.0, abs=1e-4)

    def test_two_component_photon_spectrum(self):
        # main line plus a sideband component centered 4 GHz below
        nu = np.linspace(-10e9, 6e9, 4001)
        main = rb.voigt_intensity(nu, 1.18e9, 1.31e9, center=0.0)
        side = rb.voigt_intensity(nu, 1.19e9, 4.62e9, center=-4e9)
        assert nu[np.argmax(main)] == pytest.approx(0.0, abs=5e6)
        assert nu[np.argmax(side)] == pytest.approx(-4e9, abs=5e6)
        total = main + 0.3 * side
        assert nu[np.argmax(total)] == pytest.approx(0.0, abs=5e7)

    def test_width_validation(self):
        with pytest.raises(ValueError):
            rb.voigt_intensity(0.0, -1.0, 1.0)


class TestEmg:
    def test_unit_area(self):
        val, err = quad(lambda x: rb.emg(x, 0.0, 75.35e-12, 134e-12), -2e-9, 8e-9)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_gaussian_limit(self):
        t = np.linspace(-0.4e-9, 0.6e-9, 4001)
        g = rb.gaussian_profile(t, 0.0, 75.35e-12)
        e = rb.emg(t, 0.0, 75.35e-12, 75.35e-15)
        assert np.max(np.abs(e - g)) / g.max() < 5e-3

    def test_peak_after_t0_and_exponential_tail(self):
        t = np.linspace(-0.5e-9, 3e-9, 7001)
        y = rb.emg(t, 0.0, 75.35e-12, 134e-12)
        assert t[np.argmax(y)] > 0.0
        tail = (t > 1.0e-9) & (t < 2.5e-9)
        slope = np.polyfit(t[tail], np.log(y[tail]), 1)[0]
        assert slope == pytest.approx(-1.0 / 134e-12, rel=1e-3)

    def test_finite_everywhere_for_extreme_lifetimes(self):
        t = np.linspace(-1e-9, 5e-9, 2001)
        for tau in (1e-16, 1e-13, 1e-9):
            assert np.all(np.isfinite(rb.emg(t, 0.0, 75e-12, tau)))


def _gauss_series(dt=1e-12, fwhm=75.35e-12, t0=0.0, start=-1.0e-9, stop=3.0e-9):
    ax = np.arange(start, stop, dt)
    return rb.SampledSeries(ax[0], dt, rb.gaussian_profile(ax, t0, fwhm))


class TestConvolveEmission:
    def test_impulse_gives_exponential_tail(self):
        n = 1000
        x = np.zeros(n)
        x[100] = 1.0
        out = rb.convolve_emission(rb.SampledSeries(0.0, 1e-12, x), 134e-12)
        y = out.values[101:400]
        slope = np.polyfit(np.arange(y.size) * 1e-12, np.log(y), 1)[0]
        assert slope == pytest.approx(-1.0 / 134e-12, rel=1e-6)

    def test_constant_preserved(self):
        # after the ~tau causal startup transient the constant is exact
        out = rb.convolve_emission(rb.SampledSeries(0.0, 1e-12, np.ones(4000)), 134e-12)
        np.testing.assert_allclose(out.values[3000:], 1.0, rtol=1e-9)

    def test_matches_analytic_emg(self):
        gs = _gauss_series()
        out = rb.convolve_emission(gs, 134e-12)
        direct = rb.emg(gs.axis, 0.0, 75.35e-12, 134e-12)
        err = np.linalg.norm(out.values - direct) / np.linalg.norm(direct)
        assert err < 1e-4

    def test_shift_equivariance_on_grid(self):
        gs = _gauss_series()
        peak = gs.values.max()
        shifted_in = rb.SampledSeries(gs.start, gs.step, np.roll(gs.values, 50))
        a = np.roll(rb.convolve_emission(gs, 134e-12).values, 50)
        b = rb.convolve_emission(shifted_in, 134e-12).values
        np.testing.assert_allclose(a[60:], b[60:], rtol=1e-10, atol=1e-12 * peak)

    def test_linear(self):
        gs = _gauss_series()
        a = rb.convolve_emission(rb.SampledSeries(gs.start, gs.step, 3.0 * gs.values), 134e-12)
        b = rb.convolve_emission(gs, 134e-12)
        np.testing.assert_allclose(
            a.values, 3.0 * b.values, rtol=1e-12, atol=1e-13 * gs.values.max()
        )


class TestDeconvolveEmission:
    def test_round_trip_deconv_then_conv(self):
        gs = _gauss_series()
        rec = rb.convolve_emission(rb.deconvolve_emission(gs, 134e-12, 1e-3), 134e-12)
        err = np.linalg.norm(rec.values - gs.values) / np.linalg.norm(gs.values)
        assert err < 0.01

    def test_round_trip_conv_then_deconv(self):
        gs = _gauss_series()
        rec = rb.deconvolve_emission(rb.convolve_emission(gs, 134e-12), 134e-12, 1e-3)
        err = np.linalg.norm(rec.values - gs.values) / np.linalg.norm(gs.values)
        assert err < 0.01

    def test_recovers_gaussian_width_from_analytic_emg(self):
        ax = np.arange(-1.0e-9, 3.0e-9, 1e-12)
        series = rb.SampledSeries(ax[0], 1e-12, rb.emg(ax, 0.0, 75.35e-12, 134e-12))
        dec = rb.deconvolve_emission(series, 134e-12, 1e-3)
        assert fwhm_of(dec) == pytest.approx(75.35e-12, rel=0.02)

    def test_full_damping_is_identity(self):
        gs = _gauss_series(fwhm=600e-12, t0=0.8e-9)
        out = rb.deconvolve_emission(gs, 134e-12, 1.0)
        np.testing.assert_allclose(out.values, gs.values, atol=1e-12 * gs.values.max())

    @pytest.mark.parametrize("eps", [0.0, -1.0, 1.5])
    def test_regularization_range(self, eps):
        with pytest.raises(ValueError):
            rb.deconvolve_emission(_gauss_series(), 134e-12, eps)


class TestFitEmg:
    def test_synthetic_recovery_with_noise(self):
        ax = np.arange(-1.0e-9, 3.0e-9, 1e-12)
        truth = rb.emg(ax, 0.0, 75.35e-12, 134e-12)
        rng = np.random.default_rng(3)
        noisy = np.clip(truth * (1 + 0.005 * rng.standard_normal(truth.size)), 0.0, None)
        fit = rb.fit_emg(rb.SampledSeries(ax[0], 1e-12, noisy))
        assert fit.width_fwhm == pytest.approx(75.35e-12, rel=0.03)
        assert fit.lifetime == pytest.approx(134e-12, rel=0.03)
        assert abs(fit.t0) < 0.03 * 75.35e-12

    def test_pure_gaussian_degenerates_to_tiny_lifetime(self):
        fit = rb.fit_emg(_gauss_series())
        assert fit.lifetime <= 0.05 * fit.width_fwhm

    def test_all_zero_series_is_fit_error(self):
        with pytest.raises(FitError):
            rb.fit_emg(rb.SampledSeries(0.0, 1e-12, np.zeros(100)))


class TestSeriesIO:
    def test_write_read_round_trip(self, tmp_path):
        gs = _gauss_series()
        path = tmp_path / "series.csv"
        rb.write_series(path, gs)
        back = rb.read_series(path)
        assert back.axis_unit == "s"
        assert back.start == pytest.approx(gs.start, rel=1e-14)
        assert back.step == pytest.approx(gs.step, rel=1e-9)
        np.testing.assert_allclose(back.values, gs.values, rtol=1e-14)

    def test_header_only_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("time_s,intensity\n")
        with pytest.raises(ConfigError):
            rb.read_series(path)

    def test_non_monotone_axis(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time_s,intensity\n0.0,1.0\n2.0,1.0\n1.0,1.0\n")
        with pytest.raises(ConfigError):
            rb.read_series(path)

    def test_non_uniform_axis(self, tmp_path):
        path = tmp_path / "jitter.csv"
        path.write_text("time_s,intensity\n0.0,1.0\n1.0,1.0\n2.5,1.0\n3.0,1.0\n")
        with pytest.raises(ConfigError):
            rb.read_series(path)

    def test_three_columns_rejected(self, tmp_path):
        path = tmp_path / "wide.csv"
        path.write_text("time_s,intensity,extra\n0.0,1.0,2.0\n1.0,1.0,2.0\n")
        with pytest.raises(ConfigError):
            rb.read_series(path)
