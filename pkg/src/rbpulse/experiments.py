"""Experiment orchestration: config files, temperature sweeps, benchmarking.

A single TOML file drives everything: vapor and pulse parameters, grid
resolution, the temperature list, and output paths.  ``run_sweep``
propagates one pulse per temperature with identical global parameters,
``forward_pipeline`` convolves the transmitted intensities with the
emission-time kernel so they can be compared with measured histograms,
and ``fit_global_amplitude`` adjusts the single free parameter - the
input field amplitude - against all temperatures simultaneously.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import os
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import minimize_scalar

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .atomic import AtomicParams, GAMMA_D1, default_rb87_params
from .errors import ConfigError, FitError, NumericalFailureError
from .medium import SimGrid, VaporSpec, effective_dephasing, make_grid, number_density
from .observables import (
    ObservableSeries,
    coherence_map,
    compare_to_histogram,
    normalize_series,
    population_map,
    save_map_csv,
    save_series_csv,
    transmitted_intensity,
    write_sidecar,
)
from .pulse import PulseSpec, SampledSeries, convolve_emission, gaussian_envelope, read_series
from .solver import RunResult, propagate

__all__ = [
    "ExperimentConfig",
    "SweepResult",
    "GlobalAmplitudeFit",
    "load_config",
    "default_config_toml",
    "run_sweep",
    "forward_pipeline",
    "shifted_average_pipeline",
    "fit_global_amplitude",
    "import_histogram",
    "histogram_filename",
]

#: Default sweep grid; the measured series ran at eleven cell temperatures,
#: but the exact list is not published, so this stand-in is not authoritative.
DEFAULT_TEMPERATURES = tuple(float(t) for t in range(55, 110, 5))


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings (see :func:`default_config_toml`)."""

    detuning: float = 0.0                      # rad/s
    atomic_overrides: dict = dc_field(default_factory=dict)
    cell_length: float = 0.05                  # m
    doppler_fwhm: float = 5.0e8                # Hz
    pressure_fwhm: float = 3.0e8               # Hz
    isotope_fraction: float = 0.2783
    spectral_fwhm: float = 5.69e9              # Hz
    amplitude: float | str = 1.0               # V/m or "fit"
    emission_lifetime: float = 134e-12         # s
    dt: float = 0.5e-12                        # s
    dz: float = 0.25e-3                        # m
    pre_window: float | None = None            # s
    post_window: float | None = None           # s
    store_t_samples: int = 1024
    store_z_samples: int = 256
    temperatures: tuple = DEFAULT_TEMPERATURES  # degC
    reference_temperature: float = 55.0        # degC
    mode_area: float = 1.0e-9                  # m^2
    velocity_classes: int = 1
    workers: int = 0                           # 0 = auto
    data_directory: str = ""
    output_directory: str = "out"
    write_maps: bool = False
    raw: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if len(self.temperatures) == 0:
            raise ConfigError("temperature list must not be empty")
        if isinstance(self.amplitude, str):
            if self.amplitude != "fit":
                raise ConfigError("amplitude must be a number or the string 'fit'")
        elif self.amplitude <= 0:
            raise ConfigError("amplitude must be > 0")
        if self.reference_temperature not in self.temperatures:
            raise ConfigError("reference_temperature must be in the temperature list")
        if self.velocity_classes < 1:
            raise ConfigError("velocity_classes must be >= 1")

    @property
    def fit_mode(self) -> bool:
        return self.amplitude == "fit"

    def vapor(self, temperature: float) -> VaporSpec:
        return VaporSpec(
            temperature=temperature,
            cell_length=self.cell_length,
            doppler_fwhm=self.doppler_fwhm,
            pressure_fwhm=self.pressure_fwhm,
            isotope_fraction=self.isotope_fraction,
        )

    def params(self) -> AtomicParams:
        p = default_rb87_params(self.detuning, **self.atomic_overrides)
        vapor = self.vapor(self.temperatures[0])
        if self.velocity_classes > 1:
            # Doppler handled by velocity averaging; dephase with pressure only
            deph_spec = dataclasses.replace(vapor, doppler_fwhm=0.0)
        else:
            deph_spec = vapor
        return p.replace(gamma_deph=effective_dephasing(deph_spec, GAMMA_D1))

    def pulse(self, amplitude: float) -> PulseSpec:
        return PulseSpec(
            spectral_fwhm=self.spectral_fwhm,
            amplitude=amplitude,
            center_detuning=self.detuning,
            emission_lifetime=self.emission_lifetime,
        )

    def grid(self, amplitude: float) -> SimGrid:
        return make_grid(
            self.vapor(self.temperatures[0]),
            self.pulse(amplitude),
            dt=self.dt,
            dz=self.dz,
            pre_window=self.pre_window,
            post_window=self.post_window,
        )


_DEFAULT_TOML = """\
# rbpulse experiment configuration

[atomic]
detuning_hz = 0.0            # probe carrier offset from the F=1 -> F'=1 line

[vapor]
cell_length_m = 0.05
doppler_fwhm_hz = 5.0e8
pressure_fwhm_hz = 3.0e8
isotope_fraction = 0.2783    # 87Rb share of total Rb density

[pulse]
spectral_fwhm_hz = 5.69e9
amplitude = 1.0              # peak envelope in V/m, or the string "fit"
emission_lifetime_s = 134e-12

[grid]
dt_s = 5.0e-13
dz_m = 2.5e-4
store_t_samples = 1024
store_z_samples = 256

[sweep]
# Stand-in list (the experimental temperature set is not published).
temperatures_c = [55.0, 60.0, 65.0, 70.0, 75.0, 80.0, 85.0, 90.0, 95.0, 100.0, 105.0]
reference_temperature_c = 55.0
mode_area_m2 = 1.0e-9
velocity_classes = 1
workers = 0                  # 0 = all available cores

[data]
directory = ""               # histogram CSVs: histogram_T<temp>C.csv

[output]
directory = "out"
write_maps = false
"""


def default_config_toml() -> str:
    """Default configuration as TOML text (for ``--dump-defaults``)."""
    return _DEFAULT_TOML


def _get(section: dict, key, default):
    return section.get(key, default)


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment configuration."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> ExperimentConfig:
    atomic = doc.get("atomic", {})
    vapor = doc.get("vapor", {})
    pulse = doc.get("pulse", {})
    grid = doc.get("grid", {})
    sweep = doc.get("sweep", {})
    data = doc.get("data", {})
    output = doc.get("output", {})
    known = {"atomic", "vapor", "pulse", "grid", "sweep", "data", "output"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    overrides = {
        k: v for k, v in atomic.items() if k not in ("detuning_hz", "omega43_hz")
    }
    if "omega43_hz" in atomic:
        overrides["omega43"] = 2.0 * np.pi * atomic["omega43_hz"]
    try:
        return ExperimentConfig(
            detuning=2.0 * np.pi * _get(atomic, "detuning_hz", 0.0),
            atomic_overrides=overrides,
            cell_length=_get(vapor, "cell_length_m", 0.05),
            doppler_fwhm=_get(vapor, "doppler_fwhm_hz", 5.0e8),
            pressure_fwhm=_get(vapor, "pressure_fwhm_hz", 3.0e8),
            isotope_fraction=_get(vapor, "isotope_fraction", 0.2783),
            spectral_fwhm=_get(pulse, "spectral_fwhm_hz", 5.69e9),
            amplitude=_get(pulse, "amplitude", 1.0),
            emission_lifetime=_get(pulse, "emission_lifetime_s", 134e-12),
            dt=_get(grid, "dt_s", 0.5e-12),
            dz=_get(grid, "dz_m", 0.25e-3),
            pre_window=_get(grid, "pre_window_s", None),
            post_window=_get(grid, "post_window_s", None),
            store_t_samples=_get(grid, "store_t_samples", 1024),
            store_z_samples=_get(grid, "store_z_samples", 256),
            temperatures=tuple(
                float(t) for t in _get(sweep, "temperatures_c", DEFAULT_TEMPERATURES)
            ),
            reference_temperature=_get(sweep, "reference_temperature_c", 55.0),
            mode_area=_get(sweep, "mode_area_m2", 1.0e-9),
            velocity_classes=int(_get(sweep, "velocity_classes", 1)),
            workers=int(_get(sweep, "workers", 0)),
            data_directory=_get(data, "directory", ""),
            output_directory=_get(output, "directory", "out"),
            write_maps=bool(_get(output, "write_maps", False)),
            raw=doc,
        )
    except TypeError as exc:
        raise ConfigError(f"bad configuration value: {exc}") from exc


@dataclass
class SweepResult:
    """Per-temperature runs sharing one global parameter set."""

    temperatures: tuple
    runs: tuple
    transmitted: tuple
    amplitude: float
    convolved: tuple | None = None
    fitted_amplitude: float | None = None
    residuals: tuple | None = None
    config: ExperimentConfig | None = None

    def __post_init__(self):
        ref = self.runs[0]
        for t, run in zip(self.temperatures, self.runs):
            if run.params != ref.params:
                raise ValueError(
                    f"run at {t} degC has different atomic parameters; only "
                    "temperature may vary across a sweep"
                )
            if run.field.grid != ref.field.grid:
                raise ValueError(f"run at {t} degC uses a different grid")
            if not np.array_equal(run.initial_state, ref.initial_state):
                raise ValueError(f"run at {t} degC uses a different initial state")

    def run_at(self, temperature: float) -> RunResult:
        return self.runs[self.temperatures.index(temperature)]


def _run_one(args):
    config, temperature, amplitude, params, grid, env = args
    vapor = config.vapor(temperature)
    try:
        run = propagate(
            params,
            vapor,
            grid,
            env,
            n_velocity_classes=config.velocity_classes,
            store_t_samples=config.store_t_samples,
            store_z_samples=config.store_z_samples,
        )
    except NumericalFailureError as exc:
        raise NumericalFailureError(
            f"run at {temperature} degC failed: {exc}",
            z_index=exc.z_index,
            t_index=exc.t_index,
        ) from exc
    return run


def run_sweep(
    config: ExperimentConfig,
    *,
    temperatures=None,
    amplitude_override: float | None = None,
    workers: int | None = None,
    out_dir: str | None = None,
) -> SweepResult:
    """One propagation per temperature with shared global parameters.

    Writes per-temperature CSV outputs and JSON sidecars when ``out_dir``
    is given.  Temperature points are independent and run in parallel
    processes when more than one worker is available.
    """
    temps = tuple(float(t) for t in (temperatures or config.temperatures))
    if amplitude_override is not None:
        amplitude = float(amplitude_override)
    elif config.fit_mode:
        raise ConfigError(
            "config requests amplitude='fit'; run the global fit first or "
            "pass amplitude_override"
        )
    else:
        amplitude = float(config.amplitude)

    params = config.params()
    grid = config.grid(amplitude)
    env = gaussian_envelope(config.pulse(amplitude), grid.t_axis)
    jobs = [(config, t, amplitude, params, grid, env) for t in temps]

    n_workers = workers if workers is not None else config.workers
    if n_workers <= 0:
        n_workers = min(len(temps), os.cpu_count() or 1)
    if n_workers > 1 and len(temps) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n_workers) as pool:
            runs = tuple(pool.map(_run_one, jobs))
    else:
        runs = tuple(_run_one(job) for job in jobs)

    transmitted = tuple(transmitted_intensity(r) for r in runs)
    sweep = SweepResult(
        temperatures=temps,
        runs=runs,
        transmitted=transmitted,
        amplitude=amplitude,
        config=config,
    )
    sweep = dataclasses.replace(
        sweep, convolved=forward_pipeline(sweep, config.emission_lifetime)
    )
    if out_dir is not None:
        write_sweep_outputs(sweep, out_dir)
    return sweep


def _temp_tag(t: float) -> str:
    return f"T{t:g}C"


def histogram_filename(temperature: float) -> str:
    """Conventional name of a measured-histogram CSV for one temperature."""
    return f"histogram_{_temp_tag(temperature)}.csv"


def write_sweep_outputs(sweep: SweepResult, out_dir) -> None:
    """Deterministic CSV + JSON outputs for every run of a sweep."""
    os.makedirs(out_dir, exist_ok=True)
    config = sweep.config
    raw = config.raw if config is not None else {}
    for i, t in enumerate(sweep.temperatures):
        tag = _temp_tag(t)
        run = sweep.runs[i]
        save_series_csv(
            os.path.join(out_dir, f"transmitted_{tag}.csv"), sweep.transmitted[i]
        )
        if sweep.convolved is not None:
            save_series_csv(
                os.path.join(out_dir, f"convolved_{tag}.csv"),
                sweep.convolved[i],
                value_label="convolved_intensity",
            )
        write_sidecar(
            os.path.join(out_dir, f"run_{tag}.json"),
            raw,
            extra={
                "temperature_c": t,
                "amplitude_v_per_m": sweep.amplitude,
                "density_per_m3": run.density,
                "params": dataclasses.asdict(run.params),
                "grid": dataclasses.asdict(run.field.grid),
                "diagnostics": run.diagnostics,
            },
        )
        if config is not None and config.write_maps:
            for pair in ((3, 1), (4, 1), (4, 3)):
                omap = coherence_map(run, *pair)
                save_map_csv(
                    os.path.join(
                        out_dir, f"coherence_{pair[0]}{pair[1]}_{tag}.csv"
                    ),
                    omap,
                )
            for level in (1, 2, 3, 4):
                save_map_csv(
                    os.path.join(out_dir, f"population_{level}_{tag}.csv"),
                    population_map(run, level),
                )


def forward_pipeline(sweep: SweepResult, lifetime: float) -> tuple:
    """Convolve each transmitted intensity with the emission-time kernel.

    The result is directly comparable to a measured arrival-time
    histogram, which blurs the propagation response with the exponential
    emission-time distribution of the source.
    """
    return tuple(convolve_emission(s, lifetime) for s in sweep.transmitted)


def shifted_average_pipeline(
    config: ExperimentConfig,
    temperature: float,
    lifetime: float,
    n_shifts: int = 32,
    bin_width: float | None = None,
    amplitude: float | None = None,
):
    """Emission-time average by explicit re-simulation.

    Re-simulates the pulse arriving at ``n_shifts`` delayed times, weights
    each run by the emission kernel mass of its delay bin (the final bin
    is open-ended so the weights sum to one exactly), and sums the
    transmitted intensities.  The delays are placed at the kernel centroid
    of each bin; the defaults keep the bin-quadrature error of the
    emission integral below one percent.  Returns (averaged, convolved,
    base_run) where ``convolved`` is the single-run fast path on the same
    grid for comparison.
    """
    if amplitude is None:
        if config.fit_mode:
            raise ConfigError("pass an explicit amplitude in fit mode")
        amplitude = float(config.amplitude)
    if bin_width is None:
        bin_width = lifetime / 6.0

    alpha = bin_width / lifetime
    edges = np.arange(n_shifts) * bin_width
    masses = np.exp(-edges / lifetime) * (1.0 - np.exp(-alpha))
    masses[-1] = np.exp(-edges[-1] / lifetime)  # open final bin
    # centroid of the exponential within each bin
    centroids = edges + lifetime - bin_width * np.exp(-alpha) / (1.0 - np.exp(-alpha))
    centroids[-1] = edges[-1] + lifetime

    span = n_shifts * bin_width
    base_post = config.post_window
    if base_post is None:
        base_post = max(2.5e-9, 4.0 * config.pulse(amplitude).temporal_fwhm + 1.5e-9)
    cfg = dataclasses.replace(config, post_window=base_post + span)

    params = cfg.params()
    grid = cfg.grid(amplitude)
    pulse = cfg.pulse(amplitude)
    vapor = cfg.vapor(temperature)
    avg = np.zeros(grid.nt)
    base = None
    for shift, mass in zip(centroids, masses):
        env = gaussian_envelope(pulse, grid.t_axis, center=float(shift))
        run = propagate(
            params, vapor, grid, env,
            n_velocity_classes=cfg.velocity_classes,
            store_t_samples=8, store_z_samples=2, check_positivity=False,
        )
        if base is None:
            base_run = propagate(
                params, vapor, grid, gaussian_envelope(pulse, grid.t_axis),
                n_velocity_classes=cfg.velocity_classes,
                store_t_samples=cfg.store_t_samples,
                store_z_samples=cfg.store_z_samples,
            )
            base = transmitted_intensity(base_run)
        avg += mass * np.abs(run.field.transmitted) ** 2
    averaged = SampledSeries(start=grid.t0, step=grid.dt, values=avg)
    convolved = convolve_emission(base, lifetime)
    return averaged, convolved, base_run


@dataclass
class GlobalAmplitudeFit:
    """Outcome of the one-parameter multi-temperature amplitude fit."""

    amplitude: float
    residuals: tuple          # per-temperature RMS at the optimum
    evaluations: tuple        # (amplitude, total cost) pairs in eval order


def fit_global_amplitude(
    config: ExperimentConfig,
    datasets: dict,
    *,
    initial_amplitude: float | None = None,
    workers: int | None = None,
    free_shift: bool = False,
    xatol_log10: float = 2e-3,
) -> GlobalAmplitudeFit:
    """Fit the input field amplitude against all temperatures at once.

    ``datasets`` maps temperature (degC) to a measured histogram series;
    every temperature in the config must be covered.  Simulated and
    measured curve sets are each normalized to their reference-temperature
    peak, then the summed squared RMS distance is minimized over
    log-amplitude with bounded Brent.  Raises :class:`FitError` for
    degenerate data or an optimum stuck at the search boundary (the
    evaluation trace is attached for inspection).
    """
    temps = config.temperatures
    missing = [t for t in temps if t not in datasets]
    if missing:
        raise ConfigError(f"datasets missing temperatures: {missing}")
    if all(np.max(np.abs(datasets[t].values)) == 0 for t in temps):
        raise FitError("all datasets are identically zero")

    ref_data = datasets[config.reference_temperature]
    data_norm = {t: normalize_series(datasets[t], ref_data) for t in temps}

    if initial_amplitude is None:
        initial_amplitude = config.amplitude if not config.fit_mode else 100.0
    x0 = np.log10(initial_amplitude)
    lo, hi = x0 - 3.0, x0 + 3.0

    evaluations = []

    def cost(x):
        amp = 10.0**x
        sweep = run_sweep(
            config, amplitude_override=amp, workers=workers, out_dir=None
        )
        ref_sim = sweep.convolved[temps.index(config.reference_temperature)]
        total = 0.0
        per_t = []
        for i, t in enumerate(temps):
            sim_norm = normalize_series(sweep.convolved[i], ref_sim)
            rms, _ = compare_to_histogram(sim_norm, data_norm[t], free_shift)
            per_t.append(rms)
            total += rms**2
        evaluations.append((amp, total, tuple(per_t)))
        return total

    res = minimize_scalar(
        cost, bounds=(lo, hi), method="bounded", options={"xatol": xatol_log10}
    )
    x_best = float(res.x)
    if min(x_best - lo, hi - x_best) < 3.0 * xatol_log10:
        raise FitError(
            "amplitude optimum stuck at the search boundary",
            last_result=tuple(evaluations),
        )
    best_amp = 10.0**x_best
    # residuals from the evaluation nearest the optimum
    nearest = min(evaluations, key=lambda e: abs(np.log10(e[0]) - x_best))
    return GlobalAmplitudeFit(
        amplitude=best_amp,
        residuals=nearest[2],
        evaluations=tuple((a, c) for a, c, _ in evaluations),
    )


def import_histogram(path) -> SampledSeries:
    """Load a measured histogram CSV (validated two-column series)."""
    return read_series(path)
