"""Run configuration: a flat sectioned key=value file plus overrides.

The file format is INI-style text with the sections below; every key has
a desk-scale default chosen so a full calibration finishes in seconds
while keeping the pulse width far above the twin-photon jitter. Any
value can be overridden on the command line with repeated
``--set section.key=value`` flags; ``--seed`` and ``--out`` are shorthand
for source.seed and output.directory.
"""

import configparser
from dataclasses import dataclass, replace
from math import isfinite

from .correlator import WINDOWS
from .detector import DetectorParams, GainModel, PulseShape
from .errors import ConfigurationError
from .streams import SourceConfig

DEFAULTS = {
    "source": {
        "mode": "stimulated",
        "pair_rate": "0.0",
        "seed_rate": "1e8",
        "stim_prob": "1e-2",
        "tau_coh": "1e-13",
        "duration": "1e-2",
        "seed": "12345",
    },
    "detector1": {
        "eta": "0.9",
        "pulse": "rectangular",
        "tau_p": "3e-9",
        "gain": "unit_charge",
        "mean_charge": "1.0",
        "nonlinearity_eps": "0.0",
    },
    "detector2": {
        "eta": "0.62",
        "pulse": "rectangular",
        "tau_p": "3e-9",
        "gain": "unit_charge",
        "mean_charge": "1.0",
        "nonlinearity_eps": "0.0",
    },
    "sampling": {
        "dt": "1e-10",
    },
    "analysis": {
        "max_lag": "1.5e-8",
        "segment_len": "8192",
        "window": "rectangular",
        "band_lo": "0.0",
        # <= 0 means: derive the band top as 0.1/tau_p (plateau heuristic)
        "band_hi": "0.0",
    },
    "output": {
        "directory": "pdcalib_out",
        "max_trace_rows": "2000000",
    },
    "budget": {
        "trials": "30",
        "residual_systematic": "1e-3",
        "probe_seeds": "3",
    },
}

_FLOAT_KEYS = {
    ("source", "pair_rate"), ("source", "seed_rate"), ("source", "stim_prob"),
    ("source", "tau_coh"), ("source", "duration"),
    ("detector1", "eta"), ("detector1", "tau_p"), ("detector1", "mean_charge"),
    ("detector1", "nonlinearity_eps"),
    ("detector2", "eta"), ("detector2", "tau_p"), ("detector2", "mean_charge"),
    ("detector2", "nonlinearity_eps"),
    ("sampling", "dt"),
    ("analysis", "max_lag"), ("analysis", "band_lo"), ("analysis", "band_hi"),
    ("budget", "residual_systematic"),
}
_INT_KEYS = {
    ("source", "seed"), ("analysis", "segment_len"), ("output", "max_trace_rows"),
    ("budget", "trials"), ("budget", "probe_seeds"),
}


@dataclass(frozen=True)
class RunConfig:
    source: SourceConfig
    detector1: DetectorParams
    detector2: DetectorParams
    dt: float
    max_lag: float
    segment_len: int
    window: str
    band: tuple
    out_dir: str
    max_trace_rows: int
    trials: int
    residual_systematic: float
    probe_seeds: int

    def __post_init__(self):
        if self.detector1.pulse != self.detector2.pulse:
            raise ConfigurationError(
                "both detectors must share one pulse response "
                f"({self.detector1.pulse} vs {self.detector2.pulse})")
        tau_p = self.detector1.pulse.tau_p
        if not (isfinite(self.dt) and 0.0 < self.dt <= tau_p / 10.0):
            raise ConfigurationError(
                f"sampling.dt must satisfy 0 < dt <= tau_p/10 = {tau_p / 10.0:g} s, "
                f"got {self.dt!r}")
        if not (isfinite(self.max_lag) and 0.0 < self.max_lag < self.source.duration):
            raise ConfigurationError(
                f"analysis.max_lag must lie in (0, duration), got {self.max_lag!r}")
        if self.segment_len < 16:
            raise ConfigurationError(
                f"analysis.segment_len must be >= 16, got {self.segment_len}")
        if self.window not in WINDOWS:
            raise ConfigurationError(
                f"analysis.window must be one of {WINDOWS}, got {self.window!r}")
        lo, hi = self.band
        if not (isfinite(lo) and lo >= 0.0) or not isfinite(hi):
            raise ConfigurationError(f"invalid spectral band {self.band!r}")
        if hi > 0.0 and hi <= lo:
            raise ConfigurationError(
                f"analysis.band_hi must exceed band_lo, got {self.band!r}")
        if not self.out_dir:
            raise ConfigurationError("output.directory must not be empty")
        if self.max_trace_rows < 1:
            raise ConfigurationError(
                f"output.max_trace_rows must be >= 1, got {self.max_trace_rows}")
        if self.trials < 1:
            raise ConfigurationError(f"budget.trials must be >= 1, got {self.trials}")
        if not (isfinite(self.residual_systematic) and self.residual_systematic >= 0.0):
            raise ConfigurationError(
                f"budget.residual_systematic must be >= 0, got {self.residual_systematic!r}")
        if self.probe_seeds < 1:
            raise ConfigurationError(
                f"budget.probe_seeds must be >= 1, got {self.probe_seeds}")

    @property
    def tau_p(self):
        return self.detector1.pulse.tau_p

    def resolved_band(self):
        """Spectral band with the <=0 top edge replaced by 0.1/tau_p."""
        lo, hi = self.band
        if hi <= 0.0:
            hi = 0.1 / self.tau_p
        return lo, hi

    def with_seed(self, seed) -> "RunConfig":
        return replace(self, source=replace(self.source, rng_seed=int(seed)))

    def with_eps(self, eps1, eps2) -> "RunConfig":
        return replace(self,
                       detector1=replace(self.detector1, nonlinearity_eps=eps1),
                       detector2=replace(self.detector2, nonlinearity_eps=eps2))


def default_config_text() -> str:
    lines = []
    for section, keys in DEFAULTS.items():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in keys.items())
        lines.append("")
    return "\n".join(lines)


def _checked(section, key):
    if section not in DEFAULTS or key not in DEFAULTS[section]:
        raise ConfigurationError(f"unknown configuration key {section}.{key}")
    return section, key


def _convert(section, key, raw):
    raw = raw.strip()
    try:
        if (section, key) in _FLOAT_KEYS:
            return float(raw)
        if (section, key) in _INT_KEYS:
            return int(raw)
    except ValueError:
        raise ConfigurationError(
            f"bad value for {section}.{key}: {raw!r} is not a number") from None
    return raw


def _read_file(path, values):
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config file {path}: {exc}") from exc
    for section in parser.sections():
        for key, raw in parser.items(section):
            s, k = _checked(section, key)
            values[s][k] = raw


def _apply_overrides(overrides, values):
    for item in overrides:
        target, sep, raw = item.partition("=")
        section, dot, key = target.strip().partition(".")
        if not sep or not dot or not section or not key:
            raise ConfigurationError(
                f"override {item!r} is not of the form section.key=value")
        s, k = _checked(section, key.strip())
        values[s][k] = raw.strip()


def load_config(path=None, overrides=(), out_dir=None, seed=None) -> RunConfig:
    """Assemble a validated RunConfig from defaults, file, and overrides."""
    values = {section: dict(keys) for section, keys in DEFAULTS.items()}
    if path is not None:
        _read_file(path, values)
    _apply_overrides(overrides, values)
    if seed is not None:
        values["source"]["seed"] = str(seed)
    if out_dir is not None:
        values["output"]["directory"] = str(out_dir)

    v = {s: {k: _convert(s, k, raw) for k, raw in keys.items()}
         for s, keys in values.items()}

    source = SourceConfig(
        mode=v["source"]["mode"],
        duration=v["source"]["duration"],
        rng_seed=v["source"]["seed"],
        pair_rate=v["source"]["pair_rate"],
        seed_rate=v["source"]["seed_rate"],
        stim_prob=v["source"]["stim_prob"],
        tau_coh=v["source"]["tau_coh"],
    )

    def detector(section):
        d = v[section]
        return DetectorParams(
            eta=d["eta"],
            pulse=PulseShape(kind=d["pulse"], tau_p=d["tau_p"]),
            gain=GainModel(kind=d["gain"], mean_charge=d["mean_charge"]),
            nonlinearity_eps=d["nonlinearity_eps"],
        )

    return RunConfig(
        source=source,
        detector1=detector("detector1"),
        detector2=detector("detector2"),
        dt=v["sampling"]["dt"],
        max_lag=v["analysis"]["max_lag"],
        segment_len=v["analysis"]["segment_len"],
        window=v["analysis"]["window"],
        band=(v["analysis"]["band_lo"], v["analysis"]["band_hi"]),
        out_dir=v["output"]["directory"],
        max_trace_rows=v["output"]["max_trace_rows"],
        trials=v["budget"]["trials"],
        residual_systematic=v["budget"]["residual_systematic"],
        probe_seeds=v["budget"]["probe_seeds"],
    )
