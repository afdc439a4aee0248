"""Batch front-end: simulate | calibrate | spectrum | budget.

Every subcommand takes the same four flags (--config, --set, --out,
--seed), builds one validated RunConfig, runs the requested stages, and
writes CSV artifacts plus a summary.txt into the output directory. Exit
codes: 0 success, 1 an estimator flagged a suspect result (outputs are
still written), 2 configuration or input error, 3 estimation error.
"""

import argparse
import os
import sys

from . import calibration, csvio, pipeline
from .config import load_config
from .errors import ConfigurationError, EstimationError, InputError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pdcalib",
        description="Twin-beam photocurrent simulator and absolute "
                    "quantum-efficiency calibration")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in [
            ("simulate", "generate events and detector traces, dump them as CSV"),
            ("calibrate", "full pipeline: correlations, spectra, efficiency estimates"),
            ("spectrum", "noise power spectra of the two detector currents"),
            ("budget", "Monte Carlo uncertainty budget of the calibration")]:
        sp = sub.add_parser(name, help=blurb, description=blurb)
        sp.add_argument("--config", metavar="PATH", help="sectioned key=value file")
        sp.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override one value (repeatable)")
        sp.add_argument("--out", metavar="DIR", help="output directory")
        sp.add_argument("--seed", type=int, help="run seed (overrides source.seed)")
    return parser


def _summary_lines(cfg, res):
    lines = [
        f"mode: {cfg.source.mode}",
        f"duration_s: {cfg.source.duration:.12g}",
        f"seed: {cfg.source.rng_seed}",
        f"dt_s: {cfg.dt:.12g}",
        f"tau_p_s: {cfg.tau_p:.12g}",
        f"beam1_events: {res.stream.beam1_times.shape[0]}",
        f"beam2_events: {res.stream.beam2_times.shape[0]}",
        f"detected1: {res.record1.n_events}",
        f"detected2: {res.record2.n_events}",
        f"mean_current1: {res.mean1:.12g}",
        f"mean_current2: {res.mean2:.12g}",
    ]
    return lines


def _eta_lines(res):
    lines = []
    for est in res.estimates():
        c = est.correction_factors
        lines.append(
            f"eta2_{est.method}: {est.eta2:.12g} +- {est.stat_uncertainty:.12g}"
            f" (prefactor {c['prefactor']:.12g},"
            f" gain_ratio {c['gain_ratio']:.12g},"
            f" excess_noise_factor {c['excess_noise_factor']:.12g})")
    flagged = [est.method for est in res.estimates() if est.flagged]
    lines.append("flagged: " + (",".join(flagged) if flagged else "none"))
    return lines


def cmd_simulate(cfg):
    res = pipeline.run_pipeline(cfg, correlations=False, spectra=False, estimate=False)
    csvio.write_events(os.path.join(cfg.out_dir, "events.csv"), res.stream)
    csvio.write_trace(os.path.join(cfg.out_dir, "trace1.csv"), res.trace1,
                      cfg.max_trace_rows)
    csvio.write_trace(os.path.join(cfg.out_dir, "trace2.csv"), res.trace2,
                      cfg.max_trace_rows)
    text = "\n".join(["run: simulate"] + _summary_lines(cfg, res)) + "\n"
    csvio.write_summary(os.path.join(cfg.out_dir, "summary.txt"), text)
    return 0


def cmd_calibrate(cfg):
    res = pipeline.run_pipeline(cfg)
    csvio.write_correlation(os.path.join(cfg.out_dir, "corr_auto.csv"), res.corr_auto1)
    csvio.write_correlation(os.path.join(cfg.out_dir, "corr_cross.csv"), res.corr_cross)
    csvio.write_spectrum(os.path.join(cfg.out_dir, "spec_auto.csv"), res.spec_auto1)
    csvio.write_spectrum(os.path.join(cfg.out_dir, "spec_cross.csv"), res.spec_cross)
    csvio.write_eta(os.path.join(cfg.out_dir, "eta.csv"), res.estimates())
    text = "\n".join(["run: calibrate"] + _summary_lines(cfg, res)
                     + _eta_lines(res)) + "\n"
    csvio.write_summary(os.path.join(cfg.out_dir, "summary.txt"), text)
    if any(est.flagged for est in res.estimates()):
        print("pdcalib: estimate flagged as suspect (outside [0, 1]); "
              "see eta.csv", file=sys.stderr)
        return 1
    return 0


def cmd_spectrum(cfg):
    res = pipeline.run_pipeline(cfg, correlations=False, spectra=True, estimate=False)
    csvio.write_spectrum(os.path.join(cfg.out_dir, "spec_auto.csv"), res.spec_auto1)
    csvio.write_spectrum(os.path.join(cfg.out_dir, "spec_cross.csv"), res.spec_cross)
    lo, hi = cfg.resolved_band()
    text = "\n".join(
        ["run: spectrum"] + _summary_lines(cfg, res)
        + [f"segments: {res.spec_auto1.n_segments}",
           f"window: {res.spec_auto1.window}",
           f"band_hz: {lo:.12g} .. {hi:.12g}"]) + "\n"
    csvio.write_summary(os.path.join(cfg.out_dir, "summary.txt"), text)
    return 0


def cmd_budget(cfg):
    report = calibration.uncertainty_budget(cfg, cfg.trials)
    csvio.write_budget(os.path.join(cfg.out_dir, "budget.csv"), report)
    comp = dict(report.systematic_components)
    text = "\n".join([
        "run: budget",
        f"mode: {cfg.source.mode}",
        f"duration_s: {cfg.source.duration:.12g}",
        f"seed: {cfg.source.rng_seed}",
        f"trials: {report.trials}",
        f"eta2_mean: {report.eta2_mean:.12g}",
        f"eta2_std: {report.eta2_std:.12g}",
        f"statistical_rel: {report.statistical_relative:.12g}",
        f"nonlinearity_rel: {comp['nonlinearity']:.12g}",
        f"residual_systematics_rel: {comp['residual_systematics']:.12g}",
        f"total_uncertainty_rel: {report.total_uncertainty:.12g}",
    ]) + "\n"
    csvio.write_summary(os.path.join(cfg.out_dir, "summary.txt"), text)
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "calibrate": cmd_calibrate,
    "spectrum": cmd_spectrum,
    "budget": cmd_budget,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides, args.out, args.seed)
        os.makedirs(cfg.out_dir, exist_ok=True)
        return _COMMANDS[args.command](cfg)
    except (ConfigurationError, InputError) as exc:
        print(f"pdcalib: error: {exc}", file=sys.stderr)
        return 2
    except EstimationError as exc:
        print(f"pdcalib: estimation error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"pdcalib: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
