"""Command-line entry point.

Subcommands, one per validation surface:

* ``simulate``     full ensemble run; writes g2.csv, summary.json and
                   (by default) adiabatic.csv to the output directory.
* ``check-noise``  statistical validation of the rate-noise generator
                   against its analytic autocovariance.
* ``steady-state`` stationary populations and intensities for a constant
                   transfer rate.
* ``adiabatic``    slow-noise closed forms on the delay grid.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .adiabatic import g2_acceptor_adiabatic, intensity_adiabatic
from .config import RunConfig, parse_config_file, resolve_config
from .correlator import (default_fit_window, fit_exponential_tail,
                         g2_ensemble, tau_grid)
from .errors import (ConfigurationError, FitError, NoBunchingError,
                     NumericalError)
from .kinetics import JumpChannel, intensity, steady_state_fixed
from .noise import (estimate_autocorrelation, generate_rate_path,
                    theoretical_autocorrelation)
from .output import (format_sig, write_adiabatic_csv, write_g2_csv,
                     write_summary_json)
from .rng import SeededRng

PAIR_NAMES = ("dd", "aa", "da", "ad")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fretsim",
        description="Photon-correlation simulator for a donor-acceptor "
                    "pair with a noise-driven transfer rate")
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "simulate": "run the full correlation ensemble and write its outputs",
        "check-noise": "validate the rate-noise statistics against theory",
        "steady-state": "print stationary populations for a constant rate",
        "adiabatic": "evaluate the slow-noise closed forms",
    }
    for name, help_text in descriptions.items():
        cmd = sub.add_parser(name, help=help_text)
        _add_common_flags(cmd)
        if name == "steady-state":
            cmd.add_argument("--gamma5", type=float, required=True,
                             help="constant transfer rate")
    return parser


def _add_common_flags(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--config", type=Path, default=None,
                     help="flat key = value configuration file")
    cmd.add_argument("--seed", type=int, default=None, help="master seed")
    cmd.add_argument("--realizations", type=int, default=None)
    cmd.add_argument("--dt", type=float, default=None)
    cmd.add_argument("--tau-max", dest="tau_max", type=float, default=None)
    cmd.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="noise relaxation rate (inverse correlation time)")
    cmd.add_argument("--diffusion", type=float, default=None,
                     help="noise amplitude D")
    cmd.add_argument("--workers", type=int, default=None)
    cmd.add_argument("--out", type=Path, default=None,
                     help="output directory")
    cmd.add_argument("--emit-paths", action="store_const", const=True,
                     default=None, help="dump every rate trajectory as CSV")
    cmd.add_argument("--literal-eq10-normalization", action="store_const",
                     const=True, default=None,
                     help="normalize by the equal-time correlation instead "
                          "of the mean-intensity product (comparison only)")


def _config_from_args(args) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {
        "master_seed": args.seed,
        "realizations": args.realizations,
        "dt": args.dt,
        "tau_max": args.tau_max,
        "lambda": args.lam,
        "diffusion": args.diffusion,
        "workers": args.workers,
        "output_dir": str(args.out) if args.out is not None else None,
        "emit_paths": args.emit_paths,
        "literal_eq10_normalization": args.literal_eq10_normalization,
    }
    return resolve_config(file_values, overrides)


# ---------------------------------------------------------------------------
# simulate


def run_simulate(cfg: RunConfig) -> int:
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths_dir = None
    if cfg.emit_paths:
        paths_dir = out_dir / "paths"
        paths_dir.mkdir(exist_ok=True)

    series = g2_ensemble(cfg.rate_set(), cfg.ou_params(), cfg.ensemble_config(),
                         cfg.master_seed, n_workers=cfg.workers,
                         literal_normalization=cfg.literal_eq10_normalization,
                         paths_dir=str(paths_dir) if paths_dir else None)
    by_name = dict(zip(PAIR_NAMES, series))

    window = default_fit_window(1.0 / cfg.lam, cfg.tau_max, cfg.dt)
    fits: dict[str, dict] = {}
    for name, ser in by_name.items():
        try:
            fit = fit_exponential_tail(ser, window)
            ser.fit = fit
            fits[name] = {"amplitude": fit.amplitude, "rate": fit.rate,
                          "residual": fit.residual, "window": list(fit.window)}
        except (NoBunchingError, FitError, ConfigurationError) as exc:
            fits[name] = {"error": str(exc)}

    taus = series[0].taus
    write_g2_csv(out_dir / "g2.csv", taus,
                 {name: ser.g2 for name, ser in by_name.items()})

    adiabatic_written = False
    if cfg.emit_adiabatic and np.isfinite(cfg.gamma5_max):
        write_adiabatic_csv(out_dir / "adiabatic.csv", taus,
                            g2_acceptor_adiabatic(taus, cfg.adiabatic_params()))
        adiabatic_written = True

    summary = {
        "version": __version__,
        "seed": cfg.master_seed,
        "config": cfg.as_dict(),
        "results": {
            "mean_intensity": {
                "donor": by_name["dd"].mean_intensity_i,
                "acceptor": by_name["aa"].mean_intensity_i,
            },
            "mean_gamma5": series[0].meta["mean_gamma5"],
            "n_samples": series[0].n_samples,
            "fits": fits,
            "files": ["g2.csv"] + (["adiabatic.csv"] if adiabatic_written else []),
        },
    }
    write_summary_json(out_dir / "summary.json", summary)
    print(f"wrote {out_dir}/g2.csv ({len(taus)} delays, "
          f"{series[0].n_samples} samples/pair); "
          f"mean gamma5 = {format_sig(series[0].meta['mean_gamma5'])}")
    return 0


# ---------------------------------------------------------------------------
# check-noise


def run_check_noise(cfg: RunConfig) -> dict:
    """Noise-generator report; returns the numbers it prints."""
    ou = cfg.ou_params()
    tau_c = ou.tau_c
    duration = max(100.0, 14.0 * tau_c)
    n_steps = int(round(duration / cfg.dt))
    n_paths = cfg.realizations

    unbounded = replace(ou, lower_bound=-np.inf, upper_bound=np.inf)
    free_paths = [generate_rate_path(unbounded, SeededRng(cfg.master_seed, i),
                                     n_steps) for i in range(n_paths)]
    est = estimate_autocorrelation(free_paths, max_lag=2.0 * tau_c)

    anchors = {}
    for label, lag in (("0", 0.0), ("tau_c", tau_c), ("2*tau_c", 2.0 * tau_c)):
        k = int(round(lag / cfg.dt))
        anchors[label] = {"lag": est.lags[k], "estimated": est.values[k],
                          "theory": theoretical_autocorrelation(unbounded, lag)}
    positive = est.values > 0
    slope = np.polyfit(est.lags[positive], np.log(est.values[positive]), 1)[0]

    bounded_paths = [generate_rate_path(ou, SeededRng(cfg.master_seed, i),
                                        n_steps) for i in range(n_paths)]
    stacked = np.stack([p.values for p in bounded_paths])
    report = {
        "n_paths": n_paths,
        "n_steps": n_steps,
        "anchors": anchors,
        "log_slope": slope,
        "lambda": ou.lam,
        "bounded_mean": float(stacked.mean()),
        "bounded_min": float(stacked.min()),
        "bounded_max": float(stacked.max()),
    }
    return report


def _print_noise_report(report: dict) -> None:
    print(f"noise check: {report['n_paths']} paths x {report['n_steps']} steps")
    print("unbounded autocovariance vs D*lambda*exp(-lambda*lag):")
    for label, row in report["anchors"].items():
        print(f"  lag {label:>7}: estimated {format_sig(row['estimated'])}  "
              f"theory {format_sig(row['theory'])}")
    print(f"  log-autocovariance slope: {format_sig(report['log_slope'])} "
          f"(expected {format_sig(-report['lambda'])})")
    print("bounded process:")
    print(f"  mean {format_sig(report['bounded_mean'])}  "
          f"min {format_sig(report['bounded_min'])}  "
          f"max {format_sig(report['bounded_max'])}")


# ---------------------------------------------------------------------------
# steady-state / adiabatic


def run_steady_state(cfg: RunConfig, gamma5: float) -> int:
    state = steady_state_fixed(cfg.rate_set(), gamma5)
    print(f"stationary populations at gamma5 = {format_sig(gamma5)}")
    print("state  population")
    for name, value in (("p00", state.p00), ("p01", state.p01),
                        ("p10", state.p10), ("p11", state.p11)):
        print(f"{name}    {format_sig(value)}")
    print("channel   intensity")
    print(f"donor     {format_sig(intensity(state, JumpChannel.DONOR))}")
    print(f"acceptor  {format_sig(intensity(state, JumpChannel.ACCEPTOR))}")
    return 0


def run_adiabatic(cfg: RunConfig) -> int:
    params = cfg.adiabatic_params()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    taus = tau_grid(cfg.ensemble_config())
    write_adiabatic_csv(out_dir / "adiabatic.csv",
                        taus, g2_acceptor_adiabatic(taus, params))
    i_high = intensity_adiabatic(params.gamma_high, params)
    i_low = intensity_adiabatic(params.gamma_low, params)
    contrast = ((i_high - i_low) / (i_high + i_low)) ** 2 if i_high + i_low else 0.0
    print(f"I_high = {format_sig(i_high)}  I_low = {format_sig(i_low)}  "
          f"amplitude = {format_sig(contrast)}  tau_c = {format_sig(params.tau_c)}")
    print(f"wrote {out_dir}/adiabatic.csv")
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "simulate":
            return run_simulate(cfg)
        if args.command == "check-noise":
            _print_noise_report(run_check_noise(cfg))
            return 0
        if args.command == "steady-state":
            return run_steady_state(cfg, args.gamma5)
        return run_adiabatic(cfg)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def main_entry() -> None:
    raise SystemExit(main(sys.argv[1:]))
