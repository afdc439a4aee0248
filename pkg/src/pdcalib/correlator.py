"""Second-order statistics of sampled photocurrent traces.

Time domain: fluctuation auto- and cross-correlation versus lag,

    C_ab(k dt) = (1/(M - |k|)) sum_m da[m] db[m + k],   da = a - mean(a),

with the per-lag 1/(M - |k|) normalization (unbiased given the mean), the
global sample mean removed once per trace, and standard errors taken from
the scatter of the same estimator over contiguous sub-segments.

Frequency domain: Welch averaging of one-sided (cross-)periodograms over
non-overlapping segments with per-segment mean removal, scaled as a
density so that for the rectangular window sum(power) * df reproduces the
fluctuation variance exactly (discrete Parseval identity).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, InputError

WINDOWS = ("rectangular", "hann")
ERROR_SEGMENTS = 16
MIN_SPECTRUM_SEGMENT = 16


@dataclass
class CorrelationEstimate:
    """Lag-resolved correlation with per-lag standard errors.

    Lags run symmetrically from -max_lag to +max_lag in steps of dt;
    values carry (current^2) units.
    """

    lags: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    n_samples: int
    dc_removed: bool = True

    @property
    def dt(self):
        return float(self.lags[1] - self.lags[0]) if self.lags.size > 1 else 0.0

    def zero_lag(self):
        """(value, stderr) at lag 0."""
        k0 = self.lags.size // 2
        return float(self.values[k0]), float(self.stderr[k0])


@dataclass
class SpectrumEstimate:
    """One-sided (cross-)power spectral density of current fluctuations.

    ``power`` is in current^2/Hz; for cross spectra it is the real part,
    with the imaginary part kept in ``imag_power`` as a diagnostic.
    ``stderr`` comes from segment-to-segment scatter (zeros when only one
    segment was available).
    """

    freqs: np.ndarray
    power: np.ndarray
    n_segments: int
    window: str
    stderr: np.ndarray | None = None
    imag_power: np.ndarray | None = None

    @property
    def df(self):
        return float(self.freqs[1] - self.freqs[0]) if self.freqs.size > 1 else 0.0


def mean_current(trace) -> float:
    if trace.samples.size == 0:
        raise InputError("cannot take the mean of an empty trace")
    return float(trace.samples.mean())


def _lag_count(max_lag, dt, span):
    if not np.isfinite(max_lag) or max_lag < 0.0:
        raise InputError(f"max_lag must be finite and >= 0, got {max_lag!r}")
    if max_lag >= span:
        raise InputError(f"max_lag {max_lag:g} s must be smaller than the trace span {span:g} s")
    return int(max_lag / dt + 1e-9)


def _segment_plan(n_samples, kmax, n_error_segments):
    n_seg = min(int(n_error_segments), n_samples // (kmax + 1))
    if n_seg < 2:
        raise InputError(
            f"trace of {n_samples} samples too short for {kmax} lags plus error segmentation")
    return n_seg, n_samples // n_seg


def _per_lag(sums, length):
    k = np.arange(sums.shape[0])
    return sums / (length - k)


def _mirror(pos, neg=None):
    """Assemble the symmetric lag axis from k >= 0 arrays (neg defaults to pos)."""
    if neg is None:
        neg = pos
    return np.concatenate([neg[:0:-1], pos])


def autocorrelation(trace, max_lag, n_error_segments=ERROR_SEGMENTS) -> CorrelationEstimate:
    """<di(t) di(t+tau)> for tau = -max_lag..max_lag on the trace's grid.

    For a pulse train of rate lambda this estimates eta <q^2> lambda F(tau)
    (Campbell's theorem), the shot-noise correlation profile.
    """
    x = np.ascontiguousarray(trace.samples, dtype=np.float64)
    m = x.shape[0]
    if m == 0:
        raise InputError("cannot correlate an empty trace")
    kmax = _lag_count(max_lag, trace.dt, trace.span)
    n_seg, seg_len = _segment_plan(m, kmax, n_error_segments)
    x = x - x.mean()

    values = _per_lag(_kernels.lag_sums(x, x, kmax), m)
    seg_vals = np.empty((n_seg, kmax + 1))
    for s in range(n_seg):
        seg = x[s * seg_len:(s + 1) * seg_len]
        seg_vals[s] = _per_lag(_kernels.lag_sums(seg, seg, kmax), seg_len)
    stderr = seg_vals.std(axis=0, ddof=1) / np.sqrt(n_seg)

    lags = trace.dt * np.arange(-kmax, kmax + 1)
    return CorrelationEstimate(lags, _mirror(values), _mirror(stderr), m)


def _check_pair(trace1, trace2):
    if trace1.samples.shape[0] != trace2.samples.shape[0]:
        raise InputError(
            f"traces differ in length ({trace1.samples.shape[0]} vs {trace2.samples.shape[0]})")
    if not np.isclose(trace1.dt, trace2.dt, rtol=1e-12, atol=0.0):
        raise InputError(f"traces differ in dt ({trace1.dt:g} vs {trace2.dt:g})")
    if abs(trace1.t0 - trace2.t0) > 1e-6 * trace1.dt:
        raise InputError(f"traces are misaligned (t0 {trace1.t0:g} vs {trace2.t0:g})")


def crosscorrelation(trace1, trace2, max_lag,
                     n_error_segments=ERROR_SEGMENTS) -> CorrelationEstimate:
    """<di1(t) di2(t+tau)>; positive tau means trace2 lags trace1.

    No symmetry is imposed: the negative-lag side is estimated
    independently from the same sample pairs read in the other order.
    """
    _check_pair(trace1, trace2)
    x = np.ascontiguousarray(trace1.samples, dtype=np.float64)
    y = np.ascontiguousarray(trace2.samples, dtype=np.float64)
    m = x.shape[0]
    if m == 0:
        raise InputError("cannot correlate empty traces")
    kmax = _lag_count(max_lag, trace1.dt, trace1.span)
    n_seg, seg_len = _segment_plan(m, kmax, n_error_segments)
    x = x - x.mean()
    y = y - y.mean()

    pos = _per_lag(_kernels.lag_sums(x, y, kmax), m)
    neg = _per_lag(_kernels.lag_sums(y, x, kmax), m)
    seg_pos = np.empty((n_seg, kmax + 1))
    seg_neg = np.empty((n_seg, kmax + 1))
    for s in range(n_seg):
        sl = slice(s * seg_len, (s + 1) * seg_len)
        seg_pos[s] = _per_lag(_kernels.lag_sums(x[sl], y[sl], kmax), seg_len)
        seg_neg[s] = _per_lag(_kernels.lag_sums(y[sl], x[sl], kmax), seg_len)
    err_pos = seg_pos.std(axis=0, ddof=1) / np.sqrt(n_seg)
    err_neg = seg_neg.std(axis=0, ddof=1) / np.sqrt(n_seg)

    lags = trace1.dt * np.arange(-kmax, kmax + 1)
    return CorrelationEstimate(lags, _mirror(pos, neg), _mirror(err_pos, err_neg),
                               m)


def _window_values(window, length):
    if window == "rectangular":
        return None, 1.0
    if window == "hann":
        w = np.hanning(length)
        return w, float((w * w).mean())
    raise ConfigurationError(f"unknown window {window!r} (choose from {WINDOWS})")


def _segment_spectra(samples, segment_len, window):
    """Per-segment one-sided rFFTs with segment means removed; returns (X, c, U)."""
    m = samples.shape[0]
    if segment_len < MIN_SPECTRUM_SEGMENT:
        raise InputError(f"segment_len must be >= {MIN_SPECTRUM_SEGMENT}, got {segment_len}")
    if segment_len > m:
        raise InputError(f"segment_len {segment_len} exceeds trace length {m}")
    w, u = _window_values(window, segment_len)
    n_seg = m // segment_len
    segs = samples[:n_seg * segment_len].reshape(n_seg, segment_len)
    segs = segs - segs.mean(axis=1, keepdims=True)
    if w is not None:
        segs = segs * w
    x = np.fft.rfft(segs, axis=1)
    c = np.full(x.shape[1], 2.0)
    c[0] = 1.0
    if segment_len % 2 == 0:
        c[-1] = 1.0
    return x, c, u


def _scatter(per_segment):
    n_seg = per_segment.shape[0]
    if n_seg < 2:
        return np.zeros(per_segment.shape[1])
    return per_segment.std(axis=0, ddof=1) / np.sqrt(n_seg)


def noise_power_spectrum(trace, segment_len, window="rectangular") -> SpectrumEstimate:
    """Welch one-sided PSD of the current fluctuations.

    A shot-noise pulse train gives the flat plateau 2 eta <q^2> lambda
    rolling off with the squared pulse transfer function for f near 1/tau_p.
    """
    x = np.asarray(trace.samples, dtype=np.float64)
    ft, c, u = _segment_spectra(x, int(segment_len), window)
    scale = c * trace.dt / (segment_len * u)
    per_seg = scale * (ft.real**2 + ft.imag**2)
    freqs = np.fft.rfftfreq(int(segment_len), trace.dt)
    return SpectrumEstimate(freqs, per_seg.mean(axis=0), ft.shape[0], window,
                            stderr=_scatter(per_seg))


def cross_power_spectrum(trace1, trace2, segment_len,
                         window="rectangular") -> SpectrumEstimate:
    """Welch one-sided cross PSD; the real part is the calibration signal.

    With trace2 = trace1 this reduces exactly to noise_power_spectrum.
    """
    _check_pair(trace1, trace2)
    x = np.asarray(trace1.samples, dtype=np.float64)
    y = np.asarray(trace2.samples, dtype=np.float64)
    ft1, c, u = _segment_spectra(x, int(segment_len), window)
    ft2, _, _ = _segment_spectra(y, int(segment_len), window)
    scale = c * trace1.dt / (segment_len * u)
    cross = np.conj(ft1) * ft2
    per_seg_re = scale * cross.real
    per_seg_im = scale * cross.imag
    freqs = np.fft.rfftfreq(int(segment_len), trace1.dt)
    return SpectrumEstimate(freqs, per_seg_re.mean(axis=0), ft1.shape[0], window,
                            stderr=_scatter(per_seg_re),
                            imag_power=per_seg_im.mean(axis=0))
