"""Command-line interface.

Subcommands::

    rbpulse simulate --config FILE [--temperature T]... [--out DIR]
                     [--workers N] [--dump-defaults]
    rbpulse fit --config FILE --data DIR [--out DIR]
    rbpulse pulse-tools fit-emg --input CSV
    rbpulse pulse-tools deconvolve --input CSV --lifetime S [--eps E] --output CSV
    rbpulse pulse-tools spectrum --input CSV --output CSV

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 fit failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import ConfigError, FitError, GridMemoryError, NumericalFailureError
from . import experiments
from .pulse import deconvolve_emission, fit_emg, read_series, spectrum_to_time, write_series

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_FIT = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbpulse",
        description="Pulse propagation through warm 87Rb vapor and the "
        "associated histogram toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a temperature sweep")
    sim.add_argument("--config", help="TOML configuration file")
    sim.add_argument(
        "--temperature", type=float, action="append", default=None,
        metavar="T", help="override sweep temperature (repeatable, degC)",
    )
    sim.add_argument("--out", default=None, help="output directory override")
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument(
        "--dump-defaults", action="store_true",
        help="print the default configuration and exit",
    )

    fit = sub.add_parser("fit", help="global amplitude fit against histograms")
    fit.add_argument("--config", required=True)
    fit.add_argument("--data", required=True, help="directory of histogram CSVs")
    fit.add_argument("--out", default=None, help="write the refitted sweep here")

    tools = sub.add_parser("pulse-tools", help="stand-alone series utilities")
    tsub = tools.add_subparsers(dest="tool", required=True)

    t_fit = tsub.add_parser("fit-emg", help="fit an EMG model to a histogram")
    t_fit.add_argument("--input", required=True)

    t_dec = tsub.add_parser("deconvolve", help="remove the emission-time kernel")
    t_dec.add_argument("--input", required=True)
    t_dec.add_argument("--lifetime", type=float, required=True, help="seconds")
    t_dec.add_argument("--eps", type=float, default=1e-3)
    t_dec.add_argument("--output", required=True)

    t_sp = tsub.add_parser(
        "spectrum", help="effective temporal profile from an intensity spectrum"
    )
    t_sp.add_argument("--input", required=True)
    t_sp.add_argument("--output", required=True)
    return parser


def _cmd_simulate(args) -> int:
    if args.dump_defaults:
        sys.stdout.write(experiments.default_config_toml())
        return EXIT_OK
    if args.config is None:
        raise ConfigError("simulate needs --config (or --dump-defaults)")
    config = experiments.load_config(args.config)
    out_dir = args.out if args.out is not None else config.output_directory
    sweep = experiments.run_sweep(
        config,
        temperatures=args.temperature,
        workers=args.workers,
        out_dir=out_dir,
    )
    for t, run in zip(sweep.temperatures, sweep.runs):
        diag = run.diagnostics
        print(
            f"T={t:g} degC  density={run.density:.4e} /m^3  "
            f"trace_err={diag['max_trace_error']:.2e}  "
            f"min_eig={diag['min_eigenvalue']:.2e}  wall={run.wall_time:.2f}s"
        )
    print(f"outputs written to {out_dir}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    import os

    config = experiments.load_config(args.config)
    datasets = {}
    for t in config.temperatures:
        path = os.path.join(args.data, experiments.histogram_filename(t))
        if not os.path.exists(path):
            raise ConfigError(f"missing histogram file {path}")
        datasets[t] = experiments.import_histogram(path)
    result = experiments.fit_global_amplitude(config, datasets)
    print(f"fitted amplitude: {result.amplitude:.6e} V/m")
    for t, r in zip(config.temperatures, result.residuals):
        print(f"  T={t:g} degC rms residual {r:.4e}")
    if args.out is not None:
        experiments.run_sweep(
            config, amplitude_override=result.amplitude, out_dir=args.out
        )
        print(f"refitted sweep written to {args.out}")
    return EXIT_OK


def _cmd_pulse_tools(args) -> int:
    if args.tool == "fit-emg":
        series = read_series(args.input)
        fit = fit_emg(series)
        json.dump(dataclasses.asdict(fit), sys.stdout, indent=2)
        sys.stdout.write("\n")
    elif args.tool == "deconvolve":
        series = read_series(args.input)
        out = deconvolve_emission(series, args.lifetime, args.eps)
        write_series(args.output, out, value_label="deconvolved")
        print(f"wrote {args.output}")
    elif args.tool == "spectrum":
        spectrum = read_series(args.input)
        out = spectrum_to_time(spectrum)
        write_series(args.output, out, value_label="intensity")
        print(f"wrote {args.output}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "pulse-tools":
            return _cmd_pulse_tools(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, GridMemoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FitError as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
