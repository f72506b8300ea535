import json

import numpy as np
import pytest

import rbpulse as rb
from rbpulse.observables import config_hash, save_map_csv, save_series_csv, write_sidecar


@pytest.fixture(scope="module")
def zero_density_run(params_eff, vapor75, small_grid):
    t = small_grid.t_axis
    env = (np.exp(-2 * np.log(2) * (t / 77.56e-12) ** 2)).astype(complex)
    return rb.propagate(params_eff, vapor75, small_grid, env, density=0.0)


class TestTransmittedIntensity:
    def test_zero_density_equals_input(self, zero_density_run):
        obs = rb.transmitted_intensity(zero_density_run)
        np.testing.assert_allclose(
            obs.values, np.abs(zero_density_run.field.input_envelope) ** 2, rtol=0
        )

    def test_nonnegative(self, run75_coarse):
        assert np.all(rb.transmitted_intensity(run75_coarse).values >= 0)

    def test_reference_normalization(self, run75_coarse):
        obs = rb.transmitted_intensity(run75_coarse)
        normed = rb.transmitted_intensity(run75_coarse, reference=obs)
        assert normed.values.max() == pytest.approx(1.0, rel=1e-12)
        assert normed.unit == "relative"


class TestCoherenceMap:
    def test_zero_before_pulse_arrival(self, run75_coarse):
        cmap = rb.coherence_map(run75_coarse, 3, 1)
        early = cmap.t_values < -0.3e-9
        assert np.max(cmap.values[:, early]) < 1e-12

    def test_level_validation(self, run75_coarse):
        with pytest.raises(ValueError):
            rb.coherence_map(run75_coarse, 1, 1)
        with pytest.raises(ValueError):
            rb.coherence_map(run75_coarse, 0, 5)

    def test_excited_coherence_appears(self, run75_coarse):
        cmap = rb.coherence_map(run75_coarse, 4, 3)
        assert cmap.values.max() > 0
        # still present well after the pulse has left
        late = cmap.t_values > 1.5e-9
        assert np.max(cmap.values[-1, late]) > 0.05 * cmap.values[-1].max()


class TestPopulations:
    def test_populations_sum_to_one_pointwise(self, run75_coarse):
        total = sum(rb.population_map(run75_coarse, i).values for i in (1, 2, 3, 4))
        np.testing.assert_allclose(total, 1.0, atol=1e-9)

    def test_ground_drop_matches_excited_rise(self, run75_coarse):
        g = rb.population_map(run75_coarse, 1).values + rb.population_map(run75_coarse, 2).values
        e = rb.population_map(run75_coarse, 3).values + rb.population_map(run75_coarse, 4).values
        np.testing.assert_allclose(1.0 - g, e, atol=1e-9)


class TestEnsembleEnergy:
    def test_single_atom_reference_states(self, params_eff):
        rho1 = np.zeros((4, 4), complex)
        rho1[0, 0] = 1.0
        assert rb.excitation_quanta(rho1, params_eff) == 0.0
        rho3 = np.zeros((4, 4), complex)
        rho3[2, 2] = 1.0
        p0 = params_eff.replace(delta_p=0.0)
        assert rb.excitation_quanta(rho3, p0) == pytest.approx(1.0, abs=1e-6)

    def test_zero_before_pulse(self, run75_coarse):
        energy = rb.ensemble_energy(run75_coarse, mode_area=1e-9)
        early = energy.axis < -0.3e-9
        assert np.max(np.abs(energy.values[early])) < 1e-12

    def test_positive_peak_and_units(self, run75_coarse):
        energy = rb.ensemble_energy(run75_coarse, mode_area=1e-9)
        assert energy.values.max() > 0
        assert energy.unit == "photon quanta"

    def test_mode_area_validation(self, run75_coarse):
        with pytest.raises(ValueError):
            rb.ensemble_energy(run75_coarse, mode_area=0.0)

    def test_slow_decay_of_stored_energy(self, run75_coarse):
        # the stored excitation outlives the photon: still above 10% of
        # its peak one nanosecond after the maximum
        energy = rb.ensemble_energy(run75_coarse, mode_area=1e-9)
        t = energy.axis
        i_peak = int(np.argmax(energy.values))
        late = int(np.searchsorted(t, t[i_peak] + 1e-9))
        assert energy.values[late] > 0.1 * energy.values[i_peak]


class TestNormalizeSeries:
    def test_self_normalization(self, run75_coarse):
        obs = rb.transmitted_intensity(run75_coarse)
        normed = rb.normalize_series(obs, obs)
        assert normed.values.max() == pytest.approx(1.0, rel=1e-12)

    def test_scale_invariance(self, run75_coarse):
        import dataclasses

        obs = rb.transmitted_intensity(run75_coarse)
        doubled = dataclasses.replace(obs, values=2.0 * obs.values)
        a = rb.normalize_series(doubled, doubled)
        b = rb.normalize_series(obs, obs)
        np.testing.assert_allclose(a.values, b.values, rtol=1e-14)

    def test_zero_reference_rejected(self, run75_coarse):
        import dataclasses

        obs = rb.transmitted_intensity(run75_coarse)
        zero = dataclasses.replace(obs, values=np.zeros_like(obs.values))
        with pytest.raises(ValueError):
            rb.normalize_series(obs, zero)


class TestCompareToHistogram:
    def _series(self, shift=0.0, noise=0.0, seed=0, step=1e-12):
        t = np.arange(-0.5e-9, 2.0e-9, step)
        y = np.exp(-2 * np.log(2) * ((t - shift) / 100e-12) ** 2)
        if noise:
            y = y + noise * np.random.default_rng(seed).standard_normal(y.size)
        return rb.SampledSeries(t[0], step, y)

    def test_identical_series(self):
        s = self._series()
        rms, shift = rb.compare_to_histogram(s, s)
        assert rms == 0.0 and shift == 0.0

    def test_recovers_known_shift(self):
        # positive shift = delay applied to the simulation
        a = self._series()
        b = self._series(shift=50e-12)
        rms, shift = rb.compare_to_histogram(a, b, free_shift=True)
        assert shift == pytest.approx(50e-12, abs=1e-12)

    def test_noise_floor(self):
        clean = self._series()
        noisy = self._series(noise=0.01, seed=4)
        rms, _ = rb.compare_to_histogram(clean, noisy)
        assert rms == pytest.approx(0.01, rel=0.2)

    def test_disjoint_axes_rejected(self):
        a = self._series()
        b = rb.SampledSeries(10.0, 1e-12, np.ones(100))
        with pytest.raises(ValueError):
            rb.compare_to_histogram(a, b)

    def test_resamples_to_coarser_axis(self):
        fine = self._series(step=1e-12)
        coarse = self._series(step=7e-12)
        rms, _ = rb.compare_to_histogram(fine, coarse)
        assert rms < 1e-3


class TestExport:
    def test_series_csv_round_trip(self, tmp_path, run75_coarse):
        obs = rb.transmitted_intensity(run75_coarse)
        path = tmp_path / "series.csv"
        save_series_csv(path, obs)
        back = rb.read_series(path)
        np.testing.assert_allclose(back.values, obs.values, rtol=1e-14)

    def test_map_csv_long_format(self, tmp_path, run75_coarse):
        cmap = rb.coherence_map(run75_coarse, 3, 1)
        path = tmp_path / "map.csv"
        save_map_csv(path, cmap)
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        assert data.shape == (cmap.values.size, 3)
        np.testing.assert_allclose(
            data[:, 2].reshape(cmap.values.shape), cmap.values, rtol=1e-14
        )

    def test_sidecar_and_hash_stability(self, tmp_path):
        cfg = {"sweep": {"temperatures_c": [55.0, 75.0]}, "pulse": {"amplitude": 1.0}}
        path = tmp_path / "run.json"
        write_sidecar(path, cfg, extra={"density_per_m3": 1e17})
        payload = json.loads(path.read_text())
        assert payload["config_sha256"] == config_hash(cfg)
        assert payload["density_per_m3"] == 1e17
        assert config_hash({"b": 1, "a": 2}) == config_hash({"a": 2, "b": 1})
