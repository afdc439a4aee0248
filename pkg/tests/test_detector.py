"""Detector model: pulse shapes, thinning, gain, trace synthesis."""

import numpy as np
import pytest

from pdcalib.detector import (CurrentTrace, DetectionRecord, DetectorParams,
                              GainModel, PulseShape, apply_nonlinearity, detect,
                              pulse_autoconvolution, pulse_value,
                              stationary_segment, synthesize_current)
from pdcalib.errors import ConfigurationError
from pdcalib.streams import gen_coherent

KINDS = ["rectangular", "gaussian", "one_sided_exponential"]
TAU = 3e-9


def gauss_legendre(f, a, b, n=160):
    x, w = np.polynomial.legendre.leggauss(n)
    xm = 0.5 * (b - a) * x + 0.5 * (b + a)
    return 0.5 * (b - a) * np.sum(w * f(xm))


# ------------------------------------------------------------- validation

def test_shape_and_gain_validation():
    with pytest.raises(ConfigurationError):
        PulseShape("sawtooth", TAU)
    with pytest.raises(ConfigurationError):
        PulseShape("rectangular", 0.0)
    with pytest.raises(ConfigurationError):
        GainModel("geiger", 1.0)
    with pytest.raises(ConfigurationError):
        GainModel("unit_charge", -1.0)
    with pytest.raises(ConfigurationError):
        DetectorParams(eta=1.1)
    with pytest.raises(ConfigurationError):
        DetectorParams(eta=0.5, nonlinearity_eps=0.2)


# ------------------------------------------------------------ pulse shapes

@pytest.mark.parametrize("kind", KINDS)
def test_pulse_has_unit_area(kind):
    """The response must integrate to exactly 1 so that the DC current is
    eta <q> F with no shape-dependent factor; quadrature to 1e-12."""
    shape = PulseShape(kind, TAU)
    lo, hi = shape.support
    area = gauss_legendre(lambda t: pulse_value(shape, t), lo, hi)
    assert abs(area - 1.0) < 1e-12


@pytest.mark.parametrize("kind", KINDS)
def test_pulse_vanishes_outside_support(kind):
    shape = PulseShape(kind, TAU)
    lo, hi = shape.support
    assert pulse_value(shape, hi) == 0.0            # half-open upper edge
    assert pulse_value(shape, lo - 1e-12) == 0.0
    assert pulse_value(shape, hi + TAU) == 0.0
    assert pulse_value(shape, lo) > 0.0 or kind == "gaussian"


def test_rectangular_pulse_values():
    shape = PulseShape("rectangular", TAU)
    assert pulse_value(shape, 0.0) == 1.0 / TAU
    assert pulse_value(shape, 0.5 * TAU) == 1.0 / TAU
    assert pulse_value(shape, TAU) == 0.0
    assert pulse_value(shape, -1e-15) == 0.0


def test_exponential_pulse_decay_constant():
    shape = PulseShape("one_sided_exponential", TAU)
    v0 = pulse_value(shape, 0.0)
    assert v0 > 0.0
    assert abs(pulse_value(shape, TAU) / v0 - np.exp(-1.0)) < 1e-12
    assert pulse_value(shape, -1e-15) == 0.0


def test_gaussian_pulse_is_symmetric():
    shape = PulseShape("gaussian", TAU)
    t = np.linspace(0.0, 5.9 * TAU, 50)
    np.testing.assert_allclose(pulse_value(shape, t), pulse_value(shape, -t),
                               rtol=1e-14)


# ------------------------------------------------------- autoconvolution

@pytest.mark.parametrize("kind", KINDS)
def test_autoconvolution_is_symmetric_peaked_and_normalized(kind):
    shape = PulseShape(kind, TAU)
    lo, hi = shape.support
    w = hi - lo
    tau = np.linspace(-w, w, 401)
    f = pulse_autoconvolution(shape, tau)
    np.testing.assert_allclose(f, f[::-1], rtol=1e-12, atol=1e-16 / TAU)
    assert np.argmax(f) == 200
    area = (gauss_legendre(lambda u: pulse_autoconvolution(shape, u), -w, 0.0, 256)
            + gauss_legendre(lambda u: pulse_autoconvolution(shape, u), 0.0, w, 256))
    assert abs(area - 1.0) < 1e-9


def test_rectangular_autoconvolution_is_the_triangle():
    shape = PulseShape("rectangular", TAU)
    assert abs(pulse_autoconvolution(shape, 0.0) - 1.0 / TAU) < 1e-20 / TAU
    assert abs(pulse_autoconvolution(shape, 0.5 * TAU) - 0.5 / TAU) < 1e-12 / TAU
    assert pulse_autoconvolution(shape, TAU) == 0.0
    assert pulse_autoconvolution(shape, -TAU) == 0.0
    a = np.linspace(-0.999 * TAU, 0.999 * TAU, 101)
    np.testing.assert_allclose(pulse_autoconvolution(shape, a),
                               (1.0 - np.abs(a) / TAU) / TAU, rtol=1e-12)


@pytest.mark.parametrize("kind", ["gaussian", "one_sided_exponential"])
def test_autoconvolution_matches_numeric_convolution(kind):
    """Closed forms (including the truncated-tail factors) against a dense
    trapezoidal overlap integral, to 1e-6 of the peak."""
    shape = PulseShape(kind, TAU)
    lo, hi = shape.support
    t = np.linspace(lo, hi, 200001)
    f = pulse_value(shape, t)
    for a in np.linspace(0.0, 0.9 * (hi - lo), 13):
        g = pulse_value(shape, t + a)
        numeric = np.trapezoid(f * g, t)
        closed = pulse_autoconvolution(shape, a)
        assert abs(closed - numeric) < 1e-6 / TAU


# ------------------------------------------------------------------- gain

def test_unit_charge_draws_are_constant():
    gm = GainModel("unit_charge", 2.5)
    rng = np.random.default_rng(1)
    q = gm.draw(rng, 1000)
    assert np.all(q == 2.5)
    assert gm.excess_noise_factor == 1.0


def test_exponential_gain_moments():
    gm = GainModel("exponential_gain", 2.0)
    assert gm.excess_noise_factor == 2.0
    rng = np.random.default_rng(2)
    q = gm.draw(rng, 200000)
    n = q.size
    assert abs(q.mean() / 2.0 - 1.0) < 4.0 / np.sqrt(n)
    m2 = (q * q).mean()
    assert abs(m2 / 8.0 - 1.0) < 4.0 * np.sqrt(20.0) / np.sqrt(n)


# ------------------------------------------------------------------ detect

def test_detect_eta_zero_and_one():
    times = np.sort(np.random.default_rng(3).uniform(0, 1e-3, 1000))
    none = detect(times, DetectorParams(eta=0.0), 7)
    assert none.n_events == 0
    all_ = detect(times, DetectorParams(eta=1.0), 7)
    np.testing.assert_array_equal(all_.times, times)
    np.testing.assert_array_equal(all_.charges, np.ones(1000))
    assert all_.total_charge == 1000.0


def test_detect_is_binomial_thinning():
    times = np.arange(1_000_000) * 1e-9
    rec = detect(times, DetectorParams(eta=0.5), 11)
    mu = 500_000.0
    assert abs(rec.n_events - mu) < 5.0 * np.sqrt(mu * 0.5)
    assert np.all(np.diff(rec.times) > 0)       # order preserved


def test_detect_composes_like_a_single_thinning():
    """detect(eta1) then detect(eta2) has the same counting law as
    detect(eta1*eta2); compare means over 300 seed pairs."""
    times = np.arange(3000) * 1e-9
    a = np.empty(300)
    b = np.empty(300)
    for i in range(300):
        first = detect(times, DetectorParams(eta=0.7), 100 + i)
        second = detect(first.times, DetectorParams(eta=0.6), 10_000 + i)
        a[i] = second.n_events
        b[i] = detect(times, DetectorParams(eta=0.42), 20_000 + i).n_events
    se = np.sqrt(a.var(ddof=1) / 300 + b.var(ddof=1) / 300)
    assert abs(a.mean() - b.mean()) < 4.0 * se
    assert abs(a.mean() - 0.42 * 3000) < 4.0 * np.sqrt(a.var(ddof=1) / 300)


def test_detect_is_reproducible():
    times = np.sort(np.random.default_rng(5).uniform(0, 1e-3, 5000))
    p = DetectorParams(eta=0.3, gain=GainModel("exponential_gain", 1.5))
    r1 = detect(times, p, 99)
    r2 = detect(times, p, 99)
    np.testing.assert_array_equal(r1.times, r2.times)
    np.testing.assert_array_equal(r1.charges, r2.charges)


# ------------------------------------------------------- trace synthesis

def test_sampling_step_is_checked():
    rec = DetectionRecord(np.array([1e-6]), np.array([1.0]))
    shape = PulseShape("rectangular", TAU)
    with pytest.raises(ConfigurationError):
        synthesize_current(rec, shape, 0.5 * TAU, 1e-5)
    synthesize_current(rec, shape, TAU / 10.0, 1e-5)    # boundary is allowed


def test_empty_record_gives_zero_trace():
    rec = DetectionRecord(np.empty(0), np.empty(0))
    tr = synthesize_current(rec, PulseShape("rectangular", TAU), TAU / 10, 1e-6)
    assert np.all(tr.samples == 0.0)
    assert tr.n_samples > 0


def test_single_rectangular_pulse_integral_and_height():
    shape = PulseShape("rectangular", TAU)
    dt = TAU / 10.0
    rec = DetectionRecord(np.array([50.0 * dt]), np.array([3.0]))
    tr = synthesize_current(rec, shape, dt, 1e-6)
    assert abs(tr.samples.sum() * dt - 3.0) < 1e-12
    assert abs(tr.samples.max() - 3.0 / TAU) < 1e-12 / TAU


def test_trace_grid_covers_the_pulse_support():
    rec = DetectionRecord(np.array([0.0]), np.array([1.0]))
    gauss = PulseShape("gaussian", TAU)
    tr = synthesize_current(rec, gauss, TAU / 10, 1e-7)
    assert tr.t0 == -6.0 * TAU                   # grid starts at the support lower edge
    assert abs(tr.samples.sum() * tr.dt - 1.0) < 1e-6
    rect = synthesize_current(rec, PulseShape("rectangular", TAU), TAU / 10, 1e-7)
    assert rect.t0 == 0.0


def test_synthesis_is_additive_over_event_subsets():
    rng = np.random.default_rng(6)
    t = np.sort(rng.uniform(0, 1e-6, 400))
    q = rng.exponential(1.0, 400)
    shape = PulseShape("one_sided_exponential", TAU)
    dt = TAU / 10.0
    whole = synthesize_current(DetectionRecord(t, q), shape, dt, 1e-6)
    part1 = synthesize_current(DetectionRecord(t[:150], q[:150]), shape, dt, 1e-6)
    part2 = synthesize_current(DetectionRecord(t[150:], q[150:]), shape, dt, 1e-6)
    np.testing.assert_allclose(whole.samples, part1.samples + part2.samples,
                               rtol=1e-10, atol=1e-10 * whole.samples.max())


@pytest.mark.parametrize("kind", KINDS)
def test_mean_current_law(kind):
    """Trimmed-trace mean equals eta <q> F within 3 combined standard errors
    (Poisson count noise dominates)."""
    rate = 1e8
    duration = 2e-4
    eta = 0.62
    stream = gen_coherent(rate, duration, 909)
    params = DetectorParams(eta=eta, pulse=PulseShape(kind, TAU))
    rec = detect(stream.beam2_times, params, 910)
    tr = synthesize_current(rec, params.pulse, TAU / 10.0, duration)
    tr = stationary_segment(tr, params.pulse, duration)
    expect = eta * 1.0 * rate
    se = expect / np.sqrt(eta * rate * duration)
    assert abs(tr.samples.mean() - expect) < 3.0 * se


def test_stationary_segment_keeps_only_the_filled_region():
    shape = PulseShape("rectangular", TAU)
    dt = TAU / 10.0
    duration = 100.0 * TAU
    rec = DetectionRecord(np.array([0.0, duration * 0.5]), np.array([1.0, 1.0]))
    tr = synthesize_current(rec, shape, dt, duration)
    cut = stationary_segment(tr, shape, duration)
    t = cut.times()
    assert t[0] >= TAU - 1e-15
    assert t[-1] <= duration + 1e-15
    assert cut.n_samples < tr.n_samples


def test_stationary_segment_rejects_too_short_runs():
    shape = PulseShape("gaussian", TAU)
    rec = DetectionRecord(np.array([TAU]), np.array([1.0]))
    tr = synthesize_current(rec, shape, TAU / 10, 5.0 * TAU)
    with pytest.raises(ConfigurationError):
        stationary_segment(tr, shape, 5.0 * TAU)     # 12 tau_p of edges > run


# ---------------------------------------------------------- nonlinearity

def make_trace(samples, dt=1e-9):
    return CurrentTrace(np.asarray(samples, dtype=np.float64), dt)


def test_nonlinearity_zero_eps_is_identity():
    tr = make_trace([1.0, 2.0, 3.0])
    out = apply_nonlinearity(tr, 0.0)
    np.testing.assert_array_equal(out.samples, tr.samples)


def test_nonlinearity_hand_computed_values():
    # x (1 + eps x / mean): mean([1,2,3]) = 2
    out = apply_nonlinearity(make_trace([1.0, 2.0, 3.0]), 0.1)
    np.testing.assert_allclose(out.samples, [1.05, 2.2, 3.45], rtol=1e-15)


def test_nonlinearity_scales_a_constant_trace_uniformly():
    out = apply_nonlinearity(make_trace(np.full(64, 5.0)), 0.02)
    np.testing.assert_allclose(out.samples, np.full(64, 5.0 * 1.02), rtol=1e-15)


def test_nonlinearity_guards():
    with pytest.raises(ConfigurationError):
        apply_nonlinearity(make_trace([1.0]), 0.5)
    out = apply_nonlinearity(make_trace(np.zeros(8)), 0.05)
    np.testing.assert_array_equal(out.samples, np.zeros(8))
    empty = apply_nonlinearity(make_trace(np.empty(0)), 0.05)
    assert empty.samples.size == 0


def test_trace_helpers():
    tr = CurrentTrace(np.arange(5, dtype=float), 0.5, t0=1.0)
    np.testing.assert_allclose(tr.times(), [1.0, 1.5, 2.0, 2.5, 3.0])
    assert tr.span == 2.5
    np.testing.assert_allclose(tr.scaled(2.0).samples, [0, 2, 4, 6, 8])
