"""Physical observables extracted from propagation results.

Transmitted-intensity histograms, coherence / population maps, stored
ensemble energy in photon quanta, normalization against a reference run,
and the resampling comparison used to benchmark simulations against
measured histograms.  CSV and JSON-sidecar export live here too.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as c_light
from scipy.constants import epsilon_0, hbar

from .atomic import AtomicParams, LevelIndex
from .pulse import SampledSeries
from .solver import RunResult

__all__ = [
    "ObservableSeries",
    "ObservableMap",
    "transmitted_intensity",
    "coherence_map",
    "population_map",
    "excitation_quanta",
    "ensemble_energy",
    "field_quanta",
    "normalize_series",
    "compare_to_histogram",
    "save_series_csv",
    "save_map_csv",
    "write_sidecar",
]


@dataclass
class ObservableSeries(SampledSeries):
    """A 1-D observable with a kind tag and value unit."""

    kind: str = ""
    unit: str = ""


@dataclass
class ObservableMap:
    """A 2-D observable on the (depth, retarded-time) grid."""

    kind: str
    z_values: np.ndarray
    t_start: float
    t_step: float
    values: np.ndarray  # (n_z, n_t), real
    unit: str = ""

    @property
    def t_values(self) -> np.ndarray:
        return self.t_start + self.t_step * np.arange(self.values.shape[1])


def _level(idx) -> int:
    """Map a physical level label |1>..|4> or a LevelIndex to 0..3."""
    if isinstance(idx, LevelIndex):
        return int(idx)
    idx = int(idx)
    if not 1 <= idx <= 4:
        raise ValueError("level labels are 1..4")
    return idx - 1


def transmitted_intensity(result: RunResult, reference: ObservableSeries | None = None) -> ObservableSeries:
    """|E(z=L, tau)|^2 in V^2/m^2, optionally scaled by a reference peak."""
    g = result.field.grid
    vals = np.abs(result.field.transmitted) ** 2
    unit = "V^2/m^2"
    if reference is not None:
        peak = float(np.max(reference.values))
        if peak <= 0:
            raise ValueError("reference series has no positive peak")
        vals = vals / peak
        unit = "relative"
    return ObservableSeries(
        start=g.t0, step=g.dt, values=vals, axis_unit="s",
        kind="transmitted_intensity", unit=unit,
    )


def _stored_map(result: RunResult, values, kind, unit="") -> ObservableMap:
    st = result.states
    t_vals = st.t_values
    step = float(t_vals[1] - t_vals[0]) if len(t_vals) > 1 else result.field.grid.dt
    return ObservableMap(
        kind=kind, z_values=st.z_values, t_start=float(t_vals[0]),
        t_step=step, values=values, unit=unit,
    )


def coherence_map(result: RunResult, i, j) -> ObservableMap:
    """|rho_ij(z, tau)| on the stored state grid; i and j are level labels."""
    li, lj = _level(i), _level(j)
    if li == lj:
        raise ValueError("coherence needs two distinct levels")
    vals = np.abs(result.states.rho[:, :, li, lj])
    return _stored_map(result, vals, kind=f"coherence_abs({int(i)},{int(j)})")


def population_map(result: RunResult, level) -> ObservableMap:
    """rho_ii(z, tau) on the stored state grid."""
    li = _level(level)
    vals = np.real(result.states.rho[:, :, li, li])
    return _stored_map(result, vals, kind=f"population({int(level)})")


def excitation_quanta(rho: np.ndarray, params: AtomicParams) -> float:
    """Energy of one atom relative to |1>, in units of hbar*omega_p.

    (omega21 rho22 + omega31 rho33 + omega41 rho44) / omega_p with
    omega31 = omega_p - delta_p and omega41 = omega31 + omega43.
    """
    w31 = params.omega_p - params.delta_p
    w41 = w31 + params.omega43
    e = (
        params.omega21 * np.real(rho[..., 1, 1])
        + w31 * np.real(rho[..., 2, 2])
        + w41 * np.real(rho[..., 3, 3])
    )
    return e / params.omega_p


def ensemble_energy(
    result: RunResult, mode_area: float, subtract_initial: bool = True
) -> ObservableSeries:
    """Energy stored in the ensemble vs retarded time, in photon quanta.

    Sums the per-atom excitation energy over the illuminated volume
    (density x mode area x depth integral over the stored slices).  With
    ``subtract_initial`` the pre-pulse thermal value is removed, so the
    series reports the energy *gained* from the photon and starts at zero.
    """
    if mode_area <= 0:
        raise ValueError("mode_area must be > 0")
    st = result.states
    if st.rho.size == 0:
        raise ValueError("run result carries no stored states")
    per_atom = excitation_quanta(st.rho, result.params)  # (n_z, n_t)
    quanta = result.density * mode_area * np.trapezoid(per_atom, st.z_values, axis=0)
    if subtract_initial:
        quanta = quanta - quanta[0]
    t_vals = st.t_values
    step = float(t_vals[1] - t_vals[0]) if len(t_vals) > 1 else result.field.grid.dt
    return ObservableSeries(
        start=float(t_vals[0]), step=step, values=quanta, axis_unit="s",
        kind="ensemble_energy", unit="photon quanta",
    )


def field_quanta(envelope: np.ndarray, dt: float, params: AtomicParams, mode_area: float) -> float:
    """Photon number carried by an envelope time series through mode_area.

    The intensity convention matching the propagation equations is
    I = 2 eps0 c |E|^2, so the photon flux density is
    2 eps0 c |E|^2 / (hbar omega_p).
    """
    fluence = float(np.sum(np.abs(envelope) ** 2)) * dt
    return 2.0 * epsilon_0 * c_light * fluence * mode_area / (hbar * params.omega_p)


def normalize_series(series, reference) -> "SampledSeries":
    """Scale ``series`` by the factor that makes the reference peak 1."""
    peak = float(np.max(np.abs(reference.values)))
    if peak <= 0:
        raise ValueError("reference series has zero peak")
    return dataclasses.replace(series, values=series.values / peak)


def _overlap_axis(a: SampledSeries, b: SampledSeries):
    coarse, fine = (a, b) if a.step >= b.step else (b, a)
    lo = max(a.axis[0], b.axis[0])
    hi = min(a.axis[-1], b.axis[-1])
    if hi <= lo:
        raise ValueError("series axes do not overlap")
    target = coarse.axis
    return target[(target >= lo) & (target <= hi)]


def compare_to_histogram(sim, data, free_shift: bool = False):
    """RMS distance between two series after resampling to the coarser axis.

    With ``free_shift`` the simulation is allowed a rigid time shift
    (found by a grid scan at the coarse step with parabolic refinement);
    returns (rms_residual, optimal_shift), where a positive shift is the
    delay applied to ``sim`` that best matches ``data``.
    """
    target = _overlap_axis(sim, data)
    b = np.interp(target, data.axis, np.real(data.values))
    sim_ax = sim.axis
    sim_vals = np.real(sim.values)

    def rms(shift):
        a = np.interp(target, sim_ax + shift, sim_vals)
        return float(np.sqrt(np.mean((a - b) ** 2)))

    if not free_shift:
        return rms(0.0), 0.0

    span = target[-1] - target[0]
    step = target[1] - target[0] if len(target) > 1 else sim.step
    shifts = np.arange(-0.25 * span, 0.25 * span + step, step)
    costs = np.array([rms(s) for s in shifts])
    k = int(np.argmin(costs))
    best = shifts[k]
    if 0 < k < len(shifts) - 1:
        # parabolic refinement on the three bracketing samples
        c_m, c_0, c_p = costs[k - 1], costs[k], costs[k + 1]
        denom = c_m - 2.0 * c_0 + c_p
        if denom > 0:
            best = shifts[k] + 0.5 * step * (c_m - c_p) / denom
    return rms(best), float(best)


def save_series_csv(path, series, value_label: str | None = None) -> None:
    """Series as two-column CSV (axis, value) with a unit-bearing header."""
    label = value_label or getattr(series, "kind", "") or "value"
    name = "time" if series.axis_unit == "s" else "frequency"
    header = f"{name}_{series.axis_unit},{label}"
    data = np.column_stack([series.axis, np.real(series.values)])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def save_map_csv(path, omap: ObservableMap) -> None:
    """2-D map as long-format CSV rows (z, t, value)."""
    z = np.repeat(omap.z_values, omap.values.shape[1])
    t = np.tile(omap.t_values, omap.values.shape[0])
    data = np.column_stack([z, t, omap.values.ravel()])
    np.savetxt(
        path, data, delimiter=",", comments="", fmt="%.17g",
        header=f"z_m,time_s,{omap.kind}",
    )


def config_hash(config_dict: dict) -> str:
    """Stable SHA-256 of a JSON-serializable configuration mapping."""
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_sidecar(path, config_dict: dict, extra: dict | None = None) -> None:
    """JSON metadata sidecar: run parameters plus a config provenance hash."""
    payload = {
        "config": config_dict,
        "config_sha256": config_hash(config_dict),
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")
