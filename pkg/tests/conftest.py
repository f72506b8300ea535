import numpy as np
import pytest

import rbpulse as rb


@pytest.fixture(scope="session")
def vapor75():
    return rb.VaporSpec(temperature=75.0)


@pytest.fixture(scope="session")
def params_eff(vapor75):
    """Default atom with the 800 MHz effective dephasing applied."""
    gamma = rb.effective_dephasing(vapor75, rb.GAMMA_D1)
    return rb.default_rb87_params(0.0).replace(gamma_deph=gamma)


@pytest.fixture(scope="session")
def small_grid():
    return rb.SimGrid(nz=5, nt=300, dz=0.01, dt=1e-12, t0=-0.1e-9)


@pytest.fixture(scope="session")
def run75_coarse(params_eff, vapor75):
    """Moderate-resolution 75 degC run shared by observable tests."""
    pulse = rb.PulseSpec(amplitude=1.0)
    grid = rb.make_grid(vapor75, pulse, dt=1e-12, dz=1e-3)
    env = rb.gaussian_envelope(pulse, grid.t_axis)
    return rb.propagate(params_eff, vapor75, grid, env, store_t_samples=1500)
