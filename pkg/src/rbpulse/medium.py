"""Vapor-cell model: number density, effective broadening, simulation grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import k as k_B
from scipy.constants import torr

from .errors import ConfigError, GridMemoryError

__all__ = [
    "VaporSpec",
    "SimGrid",
    "number_density",
    "effective_dephasing",
    "make_grid",
]

#: Natural abundance of 87Rb.
RB87_NATURAL_FRACTION = 0.2783

#: Supported temperature range of the liquid-phase vapor-pressure formula (degC).
TEMPERATURE_RANGE_C = (20.0, 120.0)


@dataclass(frozen=True)
class VaporSpec:
    """Cell temperature, geometry, and line-broadening inputs.

    ``doppler_fwhm`` and ``pressure_fwhm`` (Hz) together set the effective
    homogeneous width of each optical resonance, 800 MHz by default.
    ``isotope_fraction`` scales the total Rb density down to the 87Rb
    share; set it to 1.0 for an isotopically pure cell.
    """

    temperature: float                 # degC
    cell_length: float = 0.05          # m
    doppler_fwhm: float = 5.0e8        # Hz
    pressure_fwhm: float = 3.0e8       # Hz
    isotope_fraction: float = RB87_NATURAL_FRACTION

    def __post_init__(self):
        lo, hi = TEMPERATURE_RANGE_C
        if not lo <= self.temperature <= hi:
            raise ConfigError(
                f"temperature {self.temperature} degC outside supported "
                f"range [{lo}, {hi}]"
            )
        if self.cell_length <= 0:
            raise ConfigError("cell_length must be > 0")
        if self.doppler_fwhm < 0 or self.pressure_fwhm < 0:
            raise ConfigError("broadening FWHMs must be >= 0")
        if not 0.0 < self.isotope_fraction <= 1.0:
            raise ConfigError("isotope_fraction must be in (0, 1]")


@dataclass(frozen=True)
class SimGrid:
    """Uniform retarded-time x depth grid.

    ``nz`` depth slices of size ``dz`` span the cell (nz*dz = cell length);
    field and state samples live on the nz+1 slice boundaries.  The time
    axis has ``nt`` samples starting at ``t0`` in retarded time
    tau = t - z/c.
    """

    nz: int
    nt: int
    dz: float
    dt: float
    t0: float

    @property
    def t_axis(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.nt)

    @property
    def z_axis(self) -> np.ndarray:
        return self.dz * np.arange(self.nz + 1)

    @property
    def length(self) -> float:
        return self.nz * self.dz


def vapor_pressure_pa(temperature_c: float) -> float:
    """Liquid-phase Rb vapor pressure (Pa) from the four-term log10 formula."""
    lo, hi = TEMPERATURE_RANGE_C
    if not lo <= temperature_c <= hi:
        raise ConfigError(
            f"temperature {temperature_c} degC outside supported range [{lo}, {hi}]"
        )
    t_k = temperature_c + 273.15
    log10_torr = (
        15.88253
        - 4529.635 / t_k
        + 0.00058663 * t_k
        - 2.99138 * np.log10(t_k)
    )
    return 10.0 ** log10_torr * torr


def number_density(spec: VaporSpec) -> float:
    """87Rb number density (1/m^3) at the cell temperature."""
    t_k = spec.temperature + 273.15
    return spec.isotope_fraction * vapor_pressure_pa(spec.temperature) / (k_B * t_k)


def effective_dephasing(spec: VaporSpec, natural_gamma: float) -> float:
    """Extra coherence decay rate (1/s) reproducing the target linewidth.

    The Lorentzian FWHM of an optical coherence decaying at
    natural_gamma/2 + gamma_deph is (natural_gamma/2 + gamma_deph)/pi in
    Hz; this solves for gamma_deph so that the total equals
    doppler_fwhm + pressure_fwhm.
    """
    fwhm_total = spec.doppler_fwhm + spec.pressure_fwhm
    gamma_deph = np.pi * fwhm_total - 0.5 * natural_gamma
    if gamma_deph < 0:
        raise ConfigError(
            f"target FWHM {fwhm_total:.3e} Hz is below the natural linewidth"
        )
    return float(gamma_deph)


def make_grid(
    spec: VaporSpec,
    pulse,
    dt: float = 0.5e-12,
    dz: float = 0.25e-3,
    *,
    pre_window: float | None = None,
    post_window: float | None = None,
    max_bytes: float = 4.0e9,
) -> SimGrid:
    """Build the retarded-time x depth grid for one propagation run.

    The time window is auto-sized to the pulse support: it starts
    max(0.5 ns, 4 sigma_t) before the pulse peak and ends
    max(2.5 ns, 4 sigma_t + 1.5 ns) after it, unless explicit
    ``pre_window`` / ``post_window`` spans (s) are given.  The number of
    depth slices is cell_length/dz rounded to an integer (minimum 1) and
    dz is adjusted so the slices tile the cell exactly.
    """
    if dt <= 0 or dz <= 0:
        raise ConfigError("dt and dz must be > 0")

    sigma_t = pulse.temporal_fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    if pre_window is None:
        pre_window = max(0.5e-9, 4.0 * sigma_t)
    if post_window is None:
        # one extra sample so the last axis point still covers the support
        post_window = max(2.5e-9, 4.0 * sigma_t + 1.5e-9) + dt
    span = pre_window + post_window
    nt = int(round(span / dt))
    if nt < 2:
        raise ConfigError("time window shorter than two samples")

    nz = max(1, int(round(spec.cell_length / dz)))
    dz_actual = spec.cell_length / nz

    # field grid + two work copies + decimated state storage estimate
    est = 3 * (nz + 1) * nt * 16 + min(nz + 1, 256) * min(nt, 1024) * 256
    if est > max_bytes:
        raise GridMemoryError(
            f"grid of {nz + 1} x {nt} samples needs ~{est / 1e9:.2f} GB "
            f"(> budget {max_bytes / 1e9:.2f} GB)"
        )
    return SimGrid(nz=nz, nt=nt, dz=dz_actual, dt=dt, t0=-pre_window)
