import numpy as np
import pytest
from scipy.constants import hbar

import rbpulse as rb
from rbpulse.atomic import D_FINE, GAMMA_D1, OMEGA_21, OMEGA_43


class TestDefaultParams:
    def test_total_decay_rate_partition(self):
        p = rb.default_rb87_params(0.0)
        assert p.gamma31 + p.gamma32 == pytest.approx(GAMMA_D1, rel=1e-12)
        assert p.gamma41 + p.gamma42 == pytest.approx(GAMMA_D1, rel=1e-12)
        assert p.gamma31 == pytest.approx(GAMMA_D1 / 6.0, rel=1e-12)
        assert p.gamma32 == pytest.approx(5.0 * GAMMA_D1 / 6.0, rel=1e-12)

    def test_dipole_values(self):
        p = rb.default_rb87_params(0.0)
        assert p.d31 == pytest.approx(D_FINE / (2.0 * np.sqrt(3.0)), rel=1e-12)
        assert p.d31 == pytest.approx(1.0358e-29, rel=1e-4)
        for name in ("d32", "d41", "d42"):
            assert getattr(p, name) == pytest.approx(np.sqrt(5.0) * p.d31, rel=1e-12)

    def test_detuning_passthrough(self):
        p0 = rb.default_rb87_params(0.0)
        p1 = rb.default_rb87_params(2.0 * np.pi * 1e9)
        assert p1.delta_p == pytest.approx(2.0 * np.pi * 1e9, rel=1e-15)
        assert p1.replace(delta_p=0.0) == p0

    def test_splittings(self):
        p = rb.default_rb87_params(0.0)
        assert p.omega21 == pytest.approx(2.0 * np.pi * 6.834e9, rel=1e-12)
        assert p.omega43 == pytest.approx(2.0 * np.pi * 814.5e6, rel=1e-12)

    def test_override(self):
        p = rb.default_rb87_params(0.0, d32=1e-30)
        assert p.d32 == 1e-30

    @pytest.mark.parametrize("field", ["d31", "gamma41", "gamma_deph"])
    def test_negative_values_rejected(self, field):
        with pytest.raises(ValueError):
            rb.default_rb87_params(0.0, **{field: -1.0})


class TestHamiltonian:
    def test_dark_diagonal(self):
        p = rb.default_rb87_params(0.0)
        H = rb.hamiltonian(p, 0.0)
        expected = np.diag([0.0, hbar * OMEGA_21, 0.0, hbar * OMEGA_43])
        np.testing.assert_allclose(H, expected, atol=0.0)

    def test_coupling_phase(self):
        p = rb.default_rb87_params(0.0)
        E0 = 123.0
        H = rb.hamiltonian(p, E0)
        assert H[2, 0] == -1j * p.d31 * E0
        assert H[0, 2] == +1j * p.d31 * E0

    def test_hermitian_for_complex_fields(self):
        p = rb.default_rb87_params(2.0 * np.pi * 3e8)
        rng = np.random.default_rng(1)
        for _ in range(20):
            field = complex(*rng.standard_normal(2)) * 1e3
            H = rb.hamiltonian(p, field)
            assert np.max(np.abs(H - H.conj().T)) == 0.0

    def test_linear_in_field(self):
        p = rb.default_rb87_params(0.0)
        H1 = rb.hamiltonian(p, 10.0)
        H2 = rb.hamiltonian(p, 20.0)
        off1 = H1 - np.diag(np.diag(H1))
        off2 = H2 - np.diag(np.diag(H2))
        np.testing.assert_allclose(off2, 2.0 * off1, rtol=1e-15)
        np.testing.assert_allclose(np.diag(H1), np.diag(H2), rtol=1e-15)


class TestLindbladRhs:
    def test_excited_state_decay_branching(self):
        # hand evaluation of the dissipator for rho = |3><3|
        p = rb.default_rb87_params(0.0, gamma_deph=0.0)
        rho = np.zeros((4, 4), complex)
        rho[2, 2] = 1.0
        d = rb.lindblad_rhs(p, rho, 0.0)
        assert d[2, 2].real == pytest.approx(-GAMMA_D1, rel=1e-12)
        assert d[0, 0].real == pytest.approx(GAMMA_D1 / 6.0, rel=1e-12)
        assert d[1, 1].real == pytest.approx(5.0 * GAMMA_D1 / 6.0, rel=1e-12)

    def test_ground_state_dark_stationary(self):
        p = rb.default_rb87_params(0.0)
        rho = np.zeros((4, 4), complex)
        rho[0, 0] = 1.0
        np.testing.assert_allclose(rb.lindblad_rhs(p, rho, 0.0), 0.0, atol=0.0)

    def test_traceless_and_hermitian(self):
        p = rb.default_rb87_params(2.0 * np.pi * 1e8).replace(gamma_deph=2e9)
        rng = np.random.default_rng(42)
        for _ in range(30):
            a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            field = complex(*rng.standard_normal(2)) * 1e4
            d = rb.lindblad_rhs(p, rho, field)
            assert abs(np.trace(d)) < 1e-12 * GAMMA_D1
            assert np.max(np.abs(d - d.conj().T)) < 1e-12 * np.max(np.abs(d))

    def test_rejects_non_hermitian(self):
        p = rb.default_rb87_params(0.0)
        rho = np.zeros((4, 4), complex)
        rho[0, 1] = 1e-3
        with pytest.raises(ValueError, match="Hermitian"):
            rb.lindblad_rhs(p, rho, 0.0)

    def test_dephasing_hits_optical_coherences_only(self):
        p = rb.default_rb87_params(0.0, gamma31=0, gamma32=0, gamma41=0, gamma42=0)
        rho = np.zeros((4, 4), complex)
        rho[0, 0] = rho[1, 1] = 0.25
        rho[2, 2] = rho[3, 3] = 0.25
        rho[2, 0] = rho[0, 2] = 0.1          # optical coherence
        rho[3, 2] = rho[2, 3] = 0.1          # excited-excited coherence
        rho[1, 0] = rho[0, 1] = 0.1          # ground-ground coherence
        extra = rb.lindblad_rhs(p.replace(gamma_deph=1e9), rho, 0.0) - rb.lindblad_rhs(
            p, rho, 0.0
        )
        assert extra[2, 0] == pytest.approx(-1e9 * 0.1, rel=1e-12)
        assert extra[3, 2] == 0.0
        assert extra[1, 0] == 0.0


class TestThermalState:
    def test_trace_and_excited(self):
        rho = rb.thermal_state()
        assert np.trace(rho) == pytest.approx(1.0, abs=1e-15)
        assert rho[2, 2] == 0.0 and rho[3, 3] == 0.0

    def test_degeneracy_ratio(self):
        rho = rb.thermal_state()
        assert rho[0, 0].real / rho[1, 1].real == pytest.approx(3.0 / 5.0, rel=1e-12)

    def test_override_weights(self):
        rho = rb.thermal_state((1.0, 0.0))
        assert rho[0, 0] == 1.0
        with pytest.raises(ValueError):
            rb.thermal_state((0.7, 0.7))


class TestEvolution:
    def test_rk4_preserves_trace_and_positivity(self, params_eff):
        # 3 ns of driven evolution at 1 ps steps
        dt = 1e-12
        nt = 3000
        t = dt * np.arange(nt)
        field = 500.0 * np.exp(-2 * np.log(2) * ((t - 0.5e-9) / 100e-12) ** 2)
        traj, terr = rb.integrate_bloch(params_eff, rb.thermal_state(), field, dt)
        assert terr < 1e-9
        herm = np.max(np.abs(traj - traj.conj().transpose(0, 2, 1)))
        assert herm < 1e-12
        eigs = np.linalg.eigvalsh(traj)
        assert eigs.min() > -1e-8

    def test_rabi_oscillation_analytic(self):
        # two-level restriction, no damping, constant real field
        p = rb.default_rb87_params(0.0).replace(
            d32=0.0, d41=0.0, d42=0.0,
            gamma31=0.0, gamma32=0.0, gamma41=0.0, gamma42=0.0, gamma_deph=0.0,
        )
        E0 = 2.0e4
        omega = 2.0 * p.d31 * E0 / hbar
        period = 2.0 * np.pi / omega
        dt = 0.5e-12
        nt = int(period / dt) + 1
        rho0 = np.zeros((4, 4), complex)
        rho0[0, 0] = 1.0
        traj, _ = rb.integrate_bloch(p, rho0, np.full(nt, E0, complex), dt)
        t = dt * np.arange(nt)
        expected = np.sin(0.5 * omega * t) ** 2
        assert np.max(np.abs(traj[:, 2, 2].real - expected)) < 1e-4
        assert np.max(np.abs(traj[:, 1, 1])) == 0.0  # |2> stays empty

    def test_numba_and_numpy_integrators_agree(self, params_eff):
        dt = 1e-12
        t = dt * np.arange(200)
        field = (30.0 + 10j) * np.exp(-((t - 0.1e-9) / 50e-12) ** 2)
        t1, e1 = rb.integrate_bloch(params_eff, rb.thermal_state(), field, dt, engine="numba")
        t2, e2 = rb.integrate_bloch(params_eff, rb.thermal_state(), field, dt, engine="numpy")
        np.testing.assert_allclose(t1, t2, atol=1e-13)
