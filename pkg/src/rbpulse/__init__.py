"""Maxwell-Bloch simulation of short single-photon pulses in warm 87Rb vapor.

The package co-integrates the four-level Lindblad master equation with
the one-way slow-envelope propagation equation on a retarded-time x depth
grid, and ships the surrounding measurement pipeline: Gaussian
spectrum/time conversion, Voigt line shapes, exponentially modified
Gaussian emission models, convolution/deconvolution with the
emission-time kernel, observable extraction, and the one-parameter
global amplitude fit across a temperature sweep.
"""

from .atomic import (
    AtomicParams,
    GAMMA_D1,
    LevelIndex,
    default_rb87_params,
    hamiltonian,
    lindblad_rhs,
    thermal_state,
)
from .errors import (
    ConfigError,
    FitError,
    GridMemoryError,
    NumericalFailureError,
    RbPulseError,
)
from .medium import SimGrid, VaporSpec, effective_dephasing, make_grid, number_density
from .observables import (
    ObservableMap,
    ObservableSeries,
    coherence_map,
    compare_to_histogram,
    ensemble_energy,
    excitation_quanta,
    field_quanta,
    normalize_series,
    population_map,
    transmitted_intensity,
)
from .pulse import (
    EmgFit,
    PulseSpec,
    SampledSeries,
    convolve_emission,
    deconvolve_emission,
    emg,
    fit_emg,
    gaussian_envelope,
    gaussian_profile,
    read_series,
    spectrum_to_time,
    time_to_spectrum,
    voigt_intensity,
    write_series,
)
from .solver import (
    FieldGrid,
    RunResult,
    StateGrid,
    integrate_bloch,
    polarization_source,
    probe_transmission_scan,
    propagate,
    transmitted_series,
    velocity_classes,
)
from .experiments import (
    ExperimentConfig,
    GlobalAmplitudeFit,
    SweepResult,
    default_config_toml,
    fit_global_amplitude,
    forward_pipeline,
    import_histogram,
    load_config,
    run_sweep,
    shifted_average_pipeline,
)

__version__ = "0.1.0"
