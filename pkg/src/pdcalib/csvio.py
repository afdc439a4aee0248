"""Deterministic CSV and summary writers.

All floats go through one %.12g formatter so that a rerun with the same
configuration and seed reproduces every output byte for byte.
"""

import numpy as np

from .errors import ConfigurationError


def _fmt(x):
    return format(float(x), ".12g")


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        fh.writelines(rows)


def write_events(path, stream):
    """Per-event rows (beam, time_s, link_id); link_id -1 when unlinked."""
    g1, g2 = stream.link_groups()

    def rows():
        for t, g in zip(stream.beam1_times, g1):
            yield f"1,{_fmt(t)},{g}\n"
        for t, g in zip(stream.beam2_times, g2):
            yield f"2,{_fmt(t)},{g}\n"

    _write_rows(path, "beam,time_s,link_id", rows())


def write_trace(path, trace, max_rows):
    if trace.n_samples > max_rows:
        raise ConfigurationError(
            f"trace dump of {trace.n_samples} rows exceeds output.max_trace_rows="
            f"{max_rows}; shorten the run or raise the cap")
    times = trace.times()
    _write_rows(path, "time_s,current",
                (f"{_fmt(t)},{_fmt(v)}\n" for t, v in zip(times, trace.samples)))


def write_correlation(path, est):
    _write_rows(path, "lag_s,value,stderr",
                (f"{_fmt(l)},{_fmt(v)},{_fmt(e)}\n"
                 for l, v, e in zip(est.lags, est.values, est.stderr)))


def write_spectrum(path, est):
    err = est.stderr if est.stderr is not None else np.zeros_like(est.power)
    if est.imag_power is None:
        rows = (f"{_fmt(f)},{_fmt(p)},{_fmt(e)}\n"
                for f, p, e in zip(est.freqs, est.power, err))
        header = "freq_hz,value,stderr"
    else:
        rows = (f"{_fmt(f)},{_fmt(p)},{_fmt(e)},{_fmt(q)}\n"
                for f, p, e, q in zip(est.freqs, est.power, err, est.imag_power))
        header = "freq_hz,value,stderr,imag_value"
    _write_rows(path, header, rows)


def write_eta(path, estimates):
    def rows():
        for e in estimates:
            c = e.correction_factors
            yield (f"{e.method},{e.mode},{_fmt(e.eta2)},{_fmt(e.stat_uncertainty)},"
                   f"{_fmt(c.get('prefactor', 0.0))},{_fmt(c.get('gain_ratio', 1.0))},"
                   f"{_fmt(c.get('excess_noise_factor', 1.0))},{int(e.flagged)}\n")

    _write_rows(path, "method,mode,eta2,stat_uncertainty,prefactor,gain_ratio,"
                      "excess_noise_factor,flagged", rows())


def write_budget(path, report):
    def rows():
        yield f"trials,{report.trials}\n"
        yield f"eta2_mean,{_fmt(report.eta2_mean)}\n"
        yield f"eta2_std,{_fmt(report.eta2_std)}\n"
        yield f"statistical,{_fmt(report.statistical_relative)}\n"
        for name, value in report.systematic_components:
            yield f"{name},{_fmt(value)}\n"
        yield f"total_uncertainty,{_fmt(report.total_uncertainty)}\n"

    _write_rows(path, "quantity,value", rows())


def write_summary(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
