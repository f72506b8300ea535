"""The one-parameter global fit against arrival-time histograms.

The only quantity the propagation model cannot predict is the absolute
field amplitude of the photon envelope (it hides the unknown mode area).
Measured histograms at several temperatures pin it down: simulate the
sweep, convolve with the 134 ps emission kernel, and minimize the summed
residual against all histograms at once over the single amplitude.

Here the "measured" histograms are synthetic - generated by the same
pipeline at a known amplitude with shot-to-shot noise - so the fit can
be judged against ground truth.  A coarse grid keeps the demo quick.

Run: python demos/04_amplitude_fit.py   (a few minutes)
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import rbpulse as rb
from rbpulse.experiments import config_from_dict

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

config = config_from_dict(
    {
        "pulse": {"amplitude": "fit"},
        "grid": {"dt_s": 1e-12, "dz_m": 5e-4,
                 "store_t_samples": 16, "store_z_samples": 2},
        "sweep": {
            "temperatures_c": [55.0, 65.0, 75.0, 85.0, 95.0],
            "reference_temperature_c": 55.0,
            "workers": 1,
        },
    }
)

truth = 4.0e4  # V/m: pulse area of order one, so the shape depends on it
synthetic = rb.run_sweep(config, amplitude_override=truth)
rng = np.random.default_rng(1)
datasets = {}
for temp, series in zip(synthetic.temperatures, synthetic.convolved):
    noisy = series.values * (1 + 0.02 * rng.standard_normal(series.values.size))
    datasets[temp] = rb.SampledSeries(series.start, series.step, np.clip(noisy, 0, None))

fit = rb.fit_global_amplitude(config, datasets, initial_amplitude=1.0e4)
print(f"true amplitude      : {truth:.4g} V/m")
print(f"recovered amplitude : {fit.amplitude:.4g} V/m "
      f"({abs(fit.amplitude - truth) / truth * 100:.2f}% off)")
print(f"objective evaluations: {len(fit.evaluations)}")

fig, axes = plt.subplots(1, 2, figsize=(11, 4))

ax = axes[0]
amps, costs = zip(*sorted(fit.evaluations))
ax.loglog(amps, costs, "o-")
ax.axvline(truth, color="k", ls="--", lw=1, label="ground truth")
ax.set_xlabel("amplitude (V/m)")
ax.set_ylabel("summed squared residual")
ax.legend()
ax.set_title("objective landscape sampled by the bracketed search")

ax = axes[1]
best = rb.run_sweep(config, amplitude_override=fit.amplitude)
ref_sim = best.convolved[0]
ref_data = datasets[55.0]
for i, temp in enumerate(best.temperatures):
    sim = rb.normalize_series(best.convolved[i], ref_sim)
    data = rb.normalize_series(datasets[temp], ref_data)
    (line,) = ax.plot(sim.axis * 1e12, sim.values, lw=1.2)
    ax.plot(data.axis * 1e12, data.values, ".", ms=1.5, alpha=0.35,
            color=line.get_color(), label=f"{temp:g} degC")
ax.set_xlim(-300, 1500)
ax.set_xlabel("time (ps)")
ax.set_ylabel("histogram (norm. to 55 degC)")
ax.legend(fontsize=7, markerscale=4)
ax.set_title("refitted sweep over the synthetic histograms")

fig.tight_layout()
path = os.path.join(OUT, "amplitude_fit.png")
fig.savefig(path, dpi=140)
print(f"figure saved to {path}")
