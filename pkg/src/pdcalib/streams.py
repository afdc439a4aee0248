"""Timestamped photon event streams for the two detection arms.

Three source models share one container:

* ``coherent``    -- Poisson arrivals into beam 2 only (seed-like baseline).
* ``spontaneous`` -- Poisson pair creation; one photon per beam, twin times
  differ by a small jitter on the scale ``tau_coh``.
* ``stimulated``  -- Poisson seed photons into beam 2; each seed photon
  independently (probability ``stim_prob``) creates an extra photon in each
  beam. Every beam-1 photon therefore has two time-correlated partners in
  beam 2: its twin and the seed photon that triggered it.

All randomness comes from ``numpy.random.Generator(PCG64(rng_seed))``. Draw
order per mode is fixed and documented in each generator so that a given
``SourceConfig`` always yields a bit-identical stream.
"""

from dataclasses import dataclass, replace
from math import isfinite

import numpy as np

from .errors import ConfigurationError

MODES = ("coherent", "spontaneous", "stimulated")

# Twin-time jitter is a zero-mean Gaussian with std tau_coh. In spontaneous
# mode the single relative jitter is truncated at +/-10 tau_coh; in stimulated
# mode the two independent jitters (beam-1 photon and twin, both relative to
# the seed time) are truncated at +/-5 tau_coh each, so any linked pair stays
# within 10 tau_coh.
PAIR_JITTER_MAX_SIGMAS = 10.0
STIM_JITTER_MAX_SIGMAS = 5.0


@dataclass(frozen=True)
class SourceConfig:
    """Parameters of one generated run.

    Rates are photons (or pairs) per second, ``duration`` in seconds.
    ``stim_prob`` is the probability that a seed photon stimulates a pair,
    the event-level stand-in for a small parametric gain. In stimulated mode
    a nonzero ``pair_rate`` adds an independent spontaneous background.
    """

    mode: str
    duration: float
    rng_seed: int
    pair_rate: float = 0.0
    seed_rate: float = 0.0
    stim_prob: float = 0.0
    tau_coh: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown source mode {self.mode!r}")
        if not isinstance(self.rng_seed, (int, np.integer)) or not 0 <= self.rng_seed < 2**64:
            raise ConfigurationError(
                f"rng_seed must be an integer in [0, 2**64), got {self.rng_seed!r}")
        for name in ("pair_rate", "seed_rate", "duration", "tau_coh"):
            v = getattr(self, name)
            if not (isfinite(v) and v >= 0.0):
                raise ConfigurationError(f"{name} must be finite and >= 0, got {v!r}")
        if self.duration <= 0.0:
            raise ConfigurationError("duration must be > 0")
        if not 0.0 <= self.stim_prob <= 1.0:
            raise ConfigurationError(f"stim_prob must be in [0, 1], got {self.stim_prob!r}")
        if self.mode == "stimulated" and self.seed_rate <= 0.0:
            raise ConfigurationError("stimulated mode requires seed_rate > 0")


@dataclass
class PairedEventStream:
    """Sorted arrival times per beam plus the twin linkage.

    ``pair_links`` is an (n, 2) int array of (beam-1 index, beam-2 index)
    rows; a beam-1 photon appears once per linked partner (twice in
    stimulated mode: twin and stimulating seed photon).
    """

    beam1_times: np.ndarray
    beam2_times: np.ndarray
    pair_links: np.ndarray
    duration: float

    def link_groups(self):
        """Per-event link-group ids (beam-1 owner index; -1 if unlinked)."""
        g1 = np.full(self.beam1_times.shape[0], -1, dtype=np.int64)
        g2 = np.full(self.beam2_times.shape[0], -1, dtype=np.int64)
        if self.pair_links.size:
            g1[self.pair_links[:, 0]] = self.pair_links[:, 0]
            g2[self.pair_links[:, 1]] = self.pair_links[:, 0]
        return g1, g2


def _empty_links():
    return np.empty((0, 2), dtype=np.int64)


def _poisson_times(rng, rate, duration):
    # count first, then unordered uniform arrivals, then sort
    n = rng.poisson(rate * duration) if rate > 0.0 else 0
    return np.sort(rng.uniform(0.0, duration, n))


def _truncated_normal(rng, scale, size, max_sigmas):
    if scale == 0.0:
        return np.zeros(size)
    x = rng.normal(0.0, scale, size)
    lim = max_sigmas * scale
    while True:
        bad = np.abs(x) > lim
        if not bad.any():
            return x
        x[bad] = rng.normal(0.0, scale, int(bad.sum()))


def _clip_into_window(times, duration):
    # jitter can push a twin just outside the run window; pull it back in
    return np.clip(times, 0.0, np.nextafter(duration, 0.0))


def _sort_with_map(times):
    """Sort times; return (sorted, old->new index map)."""
    order = np.argsort(times, kind="stable")
    inv = np.empty_like(order)
    inv[order] = np.arange(order.shape[0])
    return times[order], inv


def gen_coherent(rate, duration, rng_seed):
    """Poisson stream at ``rate`` into beam 2; beam 1 empty, no links.

    Draw order: (1) Poisson count, (2) uniform arrival times.
    """
    if not (isfinite(rate) and rate >= 0.0):
        raise ConfigurationError(f"rate must be finite and >= 0, got {rate!r}")
    if not (isfinite(duration) and duration > 0.0):
        raise ConfigurationError(f"duration must be finite and > 0, got {duration!r}")
    rng = np.random.default_rng(rng_seed)
    t2 = _poisson_times(rng, rate, duration)
    return PairedEventStream(np.empty(0), t2, _empty_links(), duration)


def gen_spontaneous(config: SourceConfig) -> PairedEventStream:
    """Spontaneous pair emission: one photon per beam per created pair.

    Draw order: (1) pair count, (2) pair creation times, (3) twin jitters.
    Beam-2 time = beam-1 time + jitter (beam-1 photons sit at the creation
    times).
    """
    if config.mode != "spontaneous":
        raise ConfigurationError(f"gen_spontaneous got mode {config.mode!r}")
    rng = np.random.default_rng(config.rng_seed)
    t1 = _poisson_times(rng, config.pair_rate, config.duration)
    jit = _truncated_normal(rng, config.tau_coh, t1.shape[0], PAIR_JITTER_MAX_SIGMAS)
    t2 = _clip_into_window(t1 + jit, config.duration)
    t2, imap = _sort_with_map(t2)
    n = t1.shape[0]
    links = np.stack([np.arange(n, dtype=np.int64), imap], axis=1) if n else _empty_links()
    return PairedEventStream(t1, t2, links, config.duration)


def gen_stimulated(config: SourceConfig) -> PairedEventStream:
    """Seeded emission: seed photons in beam 2; stimulated pairs on top.

    Each seed photon triggers a pair with probability ``stim_prob``; the
    beam-1 photon and its beam-2 twin are independently jittered around the
    seed time. ``pair_links`` holds two rows per stimulated pair, linking the
    beam-1 photon to the twin and to the stimulating seed photon.

    Draw order: (1) seed count, (2) seed times, (3) per-seed stimulation
    uniforms, (4) beam-1 jitters, (5) twin jitters, then optionally the
    spontaneous-background draws of :func:`gen_spontaneous` on the same
    generator.
    """
    if config.mode != "stimulated":
        raise ConfigurationError(f"gen_stimulated got mode {config.mode!r}")
    if config.seed_rate <= 0.0:
        raise ConfigurationError("stimulated mode requires seed_rate > 0")
    rng = np.random.default_rng(config.rng_seed)
    seeds = _poisson_times(rng, config.seed_rate, config.duration)
    stim = rng.random(seeds.shape[0]) < config.stim_prob
    t_stim = seeds[stim]
    m = t_stim.shape[0]
    j1 = _truncated_normal(rng, config.tau_coh, m, STIM_JITTER_MAX_SIGMAS)
    j2 = _truncated_normal(rng, config.tau_coh, m, STIM_JITTER_MAX_SIGMAS)
    t1 = _clip_into_window(t_stim + j1, config.duration)
    twins = _clip_into_window(t_stim + j2, config.duration)

    # optional spontaneous background on the same generator
    if config.pair_rate > 0.0:
        bg1 = _poisson_times(rng, config.pair_rate, config.duration)
        bgj = _truncated_normal(rng, config.tau_coh, bg1.shape[0], PAIR_JITTER_MAX_SIGMAS)
        bg2 = _clip_into_window(bg1 + bgj, config.duration)
    else:
        bg1 = bg2 = np.empty(0)

    # beam 1: stimulated photons + background; remember provenance
    b1_raw = np.concatenate([t1, bg1])
    b1, map1 = _sort_with_map(b1_raw)
    # beam 2: seeds, twins, background partners
    b2_raw = np.concatenate([seeds, twins, bg2])
    b2, map2 = _sort_with_map(b2_raw)

    n_seeds = seeds.shape[0]
    seed_idx2 = map2[np.flatnonzero(stim)]           # seed partners
    twin_idx2 = map2[n_seeds + np.arange(m)]         # twin partners
    stim_idx1 = map1[np.arange(m)]
    rows = [np.stack([stim_idx1, twin_idx2], axis=1),
            np.stack([stim_idx1, seed_idx2], axis=1)]
    if bg1.shape[0]:
        bg_idx1 = map1[m + np.arange(bg1.shape[0])]
        bg_idx2 = map2[n_seeds + m + np.arange(bg2.shape[0])]
        rows.append(np.stack([bg_idx1, bg_idx2], axis=1))
    links = np.concatenate(rows) if m or bg1.shape[0] else _empty_links()
    return PairedEventStream(b1, b2, links, config.duration)


def generate(config: SourceConfig) -> PairedEventStream:
    """Dispatch on ``config.mode``."""
    if config.mode == "coherent":
        rate = config.seed_rate if config.seed_rate > 0.0 else config.pair_rate
        return gen_coherent(rate, config.duration, config.rng_seed)
    if config.mode == "spontaneous":
        return gen_spontaneous(config)
    return gen_stimulated(config)


def with_seed(config: SourceConfig, rng_seed) -> SourceConfig:
    return replace(config, rng_seed=int(rng_seed))
