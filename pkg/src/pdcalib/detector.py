"""Analog photodetection: thinning, charge gain, pulse-train currents.

A detector with quantum efficiency eta acts as Bernoulli thinning of the
incident event stream (ideal detector behind a beam splitter). Every
surviving event n contributes a pulse q_n f(t - t_n) to the photocurrent

    i(t) = sum_n q_n f(t - t_n),

where f has unit area and characteristic width tau_p, and q_n models the
(possibly stochastic) internal charge gain.
"""

from dataclasses import dataclass
from math import ceil, erf, exp, isfinite, pi, sqrt

import numpy as np

from . import _kernels
from .errors import ConfigurationError

PULSE_KINDS = ("rectangular", "gaussian", "one_sided_exponential")
GAIN_KINDS = ("unit_charge", "exponential_gain")

# effective-support cutoffs, in units of tau_p
GAUSS_CUT = 6.0
EXP_CUT = 20.0

# truncated-tail normalizations (exact closed forms)
_GAUSS_NORM = erf(GAUSS_CUT / sqrt(2.0))   # integral of N(0,1) over +/-6 sigma
_EXP_NORM = 1.0 - exp(-EXP_CUT)

# sampling adequacy: refuse traces that cannot resolve the pulse
MAX_DT_FRACTION = 0.1


@dataclass(frozen=True)
class PulseShape:
    """Unit-area detector response f(t) of width ``tau_p``.

    Supports are finite and half-open at the trailing edge (f = 0 at the
    upper cutoff), so an event covers exactly the samples falling inside
    its support:

    * ``rectangular``            1/tau_p on [0, tau_p)
    * ``gaussian``               sigma = tau_p, truncated to [-6, 6) sigma
    * ``one_sided_exponential``  decay tau_p, truncated to [0, 20 tau_p)

    Truncated kinds are renormalized so the area stays exactly 1.
    """

    kind: str = "rectangular"
    tau_p: float = 3e-9

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise ConfigurationError(f"unknown pulse kind {self.kind!r}")
        if not (isfinite(self.tau_p) and self.tau_p > 0.0):
            raise ConfigurationError(f"tau_p must be finite and > 0, got {self.tau_p!r}")

    @property
    def support(self):
        """(lower, upper) cutoff of f relative to the event time."""
        if self.kind == "rectangular":
            return 0.0, self.tau_p
        if self.kind == "gaussian":
            return -GAUSS_CUT * self.tau_p, GAUSS_CUT * self.tau_p
        return 0.0, EXP_CUT * self.tau_p

    @property
    def amplitude(self):
        """Normalization constant of the (truncated) shape."""
        if self.kind == "rectangular":
            return 1.0 / self.tau_p
        if self.kind == "gaussian":
            return 1.0 / (sqrt(2.0 * pi) * self.tau_p * _GAUSS_NORM)
        return 1.0 / (self.tau_p * _EXP_NORM)


def pulse_value(shape: PulseShape, t):
    """Evaluate f(t); vectorized over ``t``. Zero outside the support."""
    t = np.asarray(t, dtype=np.float64)
    lo, hi = shape.support
    inside = (t >= lo) & (t < hi)
    if shape.kind == "rectangular":
        out = np.where(inside, shape.amplitude, 0.0)
    elif shape.kind == "gaussian":
        out = np.where(inside, shape.amplitude * np.exp(-t * t / (2.0 * shape.tau_p**2)), 0.0)
    else:
        out = np.where(inside, shape.amplitude * np.exp(-np.where(inside, t, 0.0) / shape.tau_p), 0.0)
    return out if out.ndim else float(out)


def pulse_autoconvolution(shape: PulseShape, tau):
    """F(tau) = integral f(t) f(t + tau) dt, closed form per kind.

    Symmetric in tau, peaks at 0, integrates to 1 (since f has unit area).
    Rectangular gives the triangle (1 - |tau|/tau_p)/tau_p on |tau| < tau_p.
    """
    tau = np.asarray(tau, dtype=np.float64)
    a = np.abs(tau)
    tp = shape.tau_p
    if shape.kind == "rectangular":
        out = np.where(a < tp, (1.0 - a / tp) / tp, 0.0)
    elif shape.kind == "gaussian":
        # truncation enters through the overlap erf factor
        amp2 = shape.amplitude**2
        inside = a < 2.0 * GAUSS_CUT * tp
        arg = np.where(inside, GAUSS_CUT - a / (2.0 * tp), 0.0)
        overlap = np.vectorize(erf)(arg) if arg.ndim else erf(float(arg))
        out = np.where(inside, amp2 * tp * sqrt(pi) * np.exp(-a * a / (4.0 * tp**2)) * overlap, 0.0)
    else:
        w = EXP_CUT * tp
        amp2 = shape.amplitude**2
        inside = a < w
        out = np.where(
            inside,
            amp2 * (tp / 2.0) * np.exp(-a / tp) * (1.0 - np.exp(-2.0 * (w - np.minimum(a, w)) / tp)),
            0.0,
        )
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GainModel:
    """Per-event charge law q_n.

    ``unit_charge`` gives every event exactly ``mean_charge`` (excess noise
    factor <q^2>/<q>^2 = 1); ``exponential_gain`` draws from an exponential
    law with that mean (excess noise factor 2), the avalanche-gain stand-in.
    """

    kind: str = "unit_charge"
    mean_charge: float = 1.0

    def __post_init__(self):
        if self.kind not in GAIN_KINDS:
            raise ConfigurationError(f"unknown gain kind {self.kind!r}")
        if not (isfinite(self.mean_charge) and self.mean_charge > 0.0):
            raise ConfigurationError(f"mean_charge must be > 0, got {self.mean_charge!r}")

    @property
    def excess_noise_factor(self):
        return 1.0 if self.kind == "unit_charge" else 2.0

    def draw(self, rng, n):
        if self.kind == "unit_charge":
            return np.full(n, self.mean_charge)
        return rng.exponential(self.mean_charge, n)


@dataclass(frozen=True)
class DetectorParams:
    eta: float = 1.0
    pulse: PulseShape = PulseShape()
    gain: GainModel = GainModel()
    nonlinearity_eps: float = 0.0

    def __post_init__(self):
        if not (isfinite(self.eta) and 0.0 <= self.eta <= 1.0):
            raise ConfigurationError(f"eta must be in [0, 1], got {self.eta!r}")
        if not (isfinite(self.nonlinearity_eps) and abs(self.nonlinearity_eps) <= 0.1):
            raise ConfigurationError(
                f"|nonlinearity_eps| must be <= 0.1, got {self.nonlinearity_eps!r}")


@dataclass
class DetectionRecord:
    """Surviving event times and their charges, in time order."""

    times: np.ndarray
    charges: np.ndarray

    @property
    def n_events(self):
        return self.times.shape[0]

    @property
    def total_charge(self):
        return float(self.charges.sum())


def detect(times, params: DetectorParams, rng_seed) -> DetectionRecord:
    """Bernoulli-thin ``times`` at probability eta and assign charges.

    Draw order: (1) one uniform per incident event, (2) charges for the
    survivors. Ordering is preserved.
    """
    times = np.asarray(times, dtype=np.float64)
    rng = np.random.default_rng(rng_seed)
    keep = rng.random(times.shape[0]) < params.eta
    kept = times[keep]
    charges = params.gain.draw(rng, kept.shape[0])
    return DetectionRecord(kept, charges)


@dataclass
class CurrentTrace:
    """Uniformly sampled photocurrent, samples[k] = i(t0 + k dt).

    ``detected_charges`` keeps the (times, charges) pair that generated the
    trace, for pulse-height analysis downstream.
    """

    samples: np.ndarray
    dt: float
    t0: float = 0.0
    detected_charges: DetectionRecord | None = None

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def span(self):
        return self.n_samples * self.dt

    def times(self):
        return self.t0 + self.dt * np.arange(self.n_samples)

    def scaled(self, c):
        return CurrentTrace(self.samples * c, self.dt, self.t0, self.detected_charges)


def synthesize_current(record: DetectionRecord, pulse: PulseShape, dt,
                       duration) -> CurrentTrace:
    """Point-sample the pulse train onto a grid of spacing ``dt``.

    The grid starts at the pulse support minimum and extends past
    ``duration`` by the support maximum so every pulse is fully contained;
    the integrated trace then equals the total detected charge up to
    round-off. Requires dt <= tau_p/10; coarser sampling is refused.
    """
    if not (isfinite(dt) and dt > 0.0):
        raise ConfigurationError(f"dt must be finite and > 0, got {dt!r}")
    if dt > pulse.tau_p * MAX_DT_FRACTION:
        raise ConfigurationError(
            f"dt = {dt:g} s too coarse for tau_p = {pulse.tau_p:g} s "
            f"(need dt <= tau_p/{1.0 / MAX_DT_FRACTION:.0f})")
    if not (isfinite(duration) and duration > 0.0):
        raise ConfigurationError(f"duration must be finite and > 0, got {duration!r}")
    lo, hi = pulse.support
    t0 = min(0.0, lo)
    n = int(ceil((duration + hi - t0) / dt)) + 1
    out = np.zeros(n)
    times = np.ascontiguousarray(record.times, dtype=np.float64)
    charges = np.ascontiguousarray(record.charges, dtype=np.float64)
    if times.shape[0]:
        if pulse.kind == "rectangular":
            _kernels.deposit_rectangular(times, charges, t0, dt, pulse.tau_p,
                                         pulse.amplitude, out)
        elif pulse.kind == "gaussian":
            _kernels.deposit_gaussian(times, charges, t0, dt, pulse.tau_p,
                                      pulse.amplitude, GAUSS_CUT * pulse.tau_p, out)
        else:
            _kernels.deposit_exponential(times, charges, t0, dt, pulse.tau_p,
                                         pulse.amplitude, EXP_CUT * pulse.tau_p, out)
    return CurrentTrace(out, dt, t0, record)


def stationary_segment(trace: CurrentTrace, pulse: PulseShape, duration) -> CurrentTrace:
    """Slice off the ramp-up/ramp-down edges of a synthesized trace.

    The pulse train is statistically stationary only where the window of
    events feeding a sample, (t - hi, t - lo], lies entirely within the
    source interval [0, duration): i.e. t in [hi, duration + lo]. Keeping
    only that region removes the O(tau_p/duration) edge bias from means
    and correlations.
    """
    lo, hi = pulse.support
    j0 = int(ceil((hi - trace.t0) / trace.dt - 1e-9))
    j1 = int((duration + lo - trace.t0) / trace.dt + 1e-9) + 1
    j0 = max(j0, 0)
    j1 = min(j1, trace.n_samples)
    if j1 - j0 < 2:
        raise ConfigurationError(
            f"duration {duration:g} s too short for pulse support [{lo:g}, {hi:g}] s")
    return CurrentTrace(trace.samples[j0:j1].copy(), trace.dt,
                        trace.t0 + j0 * trace.dt, trace.detected_charges)


def apply_nonlinearity(trace: CurrentTrace, eps) -> CurrentTrace:
    """Quadratic amplifier departure x -> x (1 + eps x / x_ref), x_ref = trace mean.

    eps = 0 is the identity. The trace-mean reference point is a modeling
    choice (the physical reference level of a product amplifier is not
    pinned down by anything we simulate).
    """
    if not (isfinite(eps) and abs(eps) <= 0.1):
        raise ConfigurationError(f"|eps| must be <= 0.1, got {eps!r}")
    x = trace.samples
    if eps == 0.0 or x.size == 0:
        return CurrentTrace(x.copy(), trace.dt, trace.t0, trace.detected_charges)
    x_ref = x.mean()
    if x_ref == 0.0:
        return CurrentTrace(x.copy(), trace.dt, trace.t0, trace.detected_charges)
    return CurrentTrace(x * (1.0 + eps * x / x_ref), trace.dt, trace.t0,
                        trace.detected_charges)
