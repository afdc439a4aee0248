"""Absolute quantum-efficiency estimation from correlation ratios.

The arm-2 efficiency follows from the measured fluctuation statistics of
the two photocurrents alone:

    eta2_hat = prefactor * (<q1>/<q2>) * (<q1^2>/<q1>^2) * C12(0) / C11(0)

with prefactor 1/2 for a seeded (stimulated) source, where every arm-1
photon has two time-correlated partners in arm 2 (its twin and the seed
photon that triggered it), and prefactor 1 for a spontaneous pair source
with one partner. The charge-moment factors, measured from the pulse
heights, make the estimator independent of the gain law: the combined
correction is <q1^2>/(<q1><q2>), which cancels the arm-1 second moment in
the autocorrelation against the first moments in the cross-correlation.
No knowledge of the arm-1 efficiency or of the absolute photon flux is
required. The same ratio on the flat low-frequency plateau of the noise
power spectra gives the spectral variant, free of any absolute spectral
calibration.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EstimationError, InputError

ETA_METHODS = ("time_domain", "spectral")
_PREFACTOR = {"stimulated": 0.5, "spontaneous": 1.0}

MIN_ENF_SAMPLES = 1000
MIN_BAND_BINS = 8
MIN_BUDGET_TRIALS = 30

# flatness gate for the spectral band: halves of the band may differ by at
# most this fraction of the band mean (plus statistical allowance)
PLATEAU_REL_TOL = 0.10


@dataclass(frozen=True)
class GainStats:
    """Charge-moment summary of the two detectors' pulse heights."""

    mean1: float
    mean2: float
    second_moment1: float
    n1: int = 0
    n2: int = 0

    @classmethod
    def from_charges(cls, charges1, charges2):
        q1 = np.asarray(charges1, dtype=np.float64)
        q2 = np.asarray(charges2, dtype=np.float64)
        if q1.size == 0 or q2.size == 0:
            raise InputError("need detected events on both arms to measure gain moments")
        return cls(float(q1.mean()), float(q2.mean()), float((q1 * q1).mean()),
                   q1.size, q2.size)

    @classmethod
    def ideal(cls):
        """Unit charges on both arms (correction factors exactly 1)."""
        return cls(1.0, 1.0, 1.0)

    @property
    def gain_ratio(self):
        return self.mean1 / self.mean2

    @property
    def excess_noise1(self):
        return self.second_moment1 / self.mean1**2


@dataclass
class EtaEstimate:
    eta2: float
    stat_uncertainty: float
    method: str
    mode: str
    correction_factors: dict = field(default_factory=dict)
    flagged: bool = False

    def __post_init__(self):
        # out-of-range estimates diagnose a broken configuration; they are
        # reported as-is but flagged, never clamped
        if not (0.0 <= self.eta2 <= 1.0):
            self.flagged = True


@dataclass
class BudgetReport:
    trials: int
    eta2_mean: float
    eta2_std: float
    systematic_components: list
    total_uncertainty: float

    @property
    def statistical_relative(self):
        return self.eta2_std / abs(self.eta2_mean) if self.eta2_mean else float("inf")


def _prefactor(mode):
    try:
        return _PREFACTOR[mode]
    except KeyError:
        raise ConfigurationError(
            f"mode must be one of {tuple(_PREFACTOR)}, got {mode!r}") from None


def _ratio_estimate(num, num_err, den, den_err, factor, method, mode):
    if den <= 0.0:
        raise EstimationError(
            f"non-positive arm-1 fluctuation power ({den:g}); cannot form the ratio")
    eta2 = factor * num / den
    stat = factor * np.sqrt(num_err**2 + (num * den_err / den) ** 2) / den
    return eta2, float(stat)


def estimate_eta_time_domain(auto1, cross12, gain_stats: GainStats, mode) -> EtaEstimate:
    """Arm-2 efficiency from the zero-lag correlation ratio.

    The lag-0 bin is used directly (no peak fitting); the statistical
    uncertainty is the first-order ratio propagation of the two zero-lag
    standard errors, treating them as independent.
    """
    pref = _prefactor(mode)
    if auto1.lags.shape != cross12.lags.shape or not np.allclose(
            auto1.lags, cross12.lags, rtol=1e-9, atol=0.0):
        raise InputError("auto- and cross-correlation lag grids differ")
    a0, a_err = auto1.zero_lag()
    c0, c_err = cross12.zero_lag()
    corr = gain_stats.gain_ratio * gain_stats.excess_noise1
    eta2, stat = _ratio_estimate(c0, c_err, a0, a_err, pref * corr,
                                 "time_domain", mode)
    return EtaEstimate(eta2, stat, "time_domain", mode, {
        "prefactor": pref,
        "gain_ratio": gain_stats.gain_ratio,
        "excess_noise_factor": gain_stats.excess_noise1,
    })


def _band_bins(spec, band):
    f_lo, f_hi = band
    if not (np.isfinite(f_lo) and np.isfinite(f_hi)) or f_lo < 0.0 or f_hi <= f_lo:
        raise InputError(f"invalid frequency band [{f_lo!r}, {f_hi!r}]")
    if f_hi > spec.freqs[-1] * (1.0 + 1e-9):
        raise InputError(
            f"band upper edge {f_hi:g} Hz exceeds the Nyquist frequency {spec.freqs[-1]:g} Hz")
    mask = (spec.freqs > 0.0) & (spec.freqs >= f_lo) & (spec.freqs <= f_hi)
    if int(mask.sum()) < MIN_BAND_BINS:
        raise InputError(
            f"band [{f_lo:g}, {f_hi:g}] Hz holds {int(mask.sum())} bins, "
            f"need >= {MIN_BAND_BINS}")
    return mask


def _check_plateau(values, band):
    """Require the auto spectrum to be flat across the band halves."""
    n = values.size
    lo, hi = values[:n // 2], values[n // 2:]
    mean = values.mean()
    droop = lo.mean() - hi.mean()
    allowance = 4.0 * np.sqrt(lo.var(ddof=1) / lo.size + hi.var(ddof=1) / hi.size)
    tol = max(PLATEAU_REL_TOL * abs(mean), allowance)
    if abs(droop) > tol:
        raise EstimationError(
            f"band [{band[0]:g}, {band[1]:g}] Hz is not on the shot-noise plateau: "
            f"halves differ by {droop:.3g} against a mean of {mean:.3g} "
            f"({abs(droop / mean):.1%}, tolerance {tol / abs(mean):.1%}); "
            "lower the band below the pulse-response rolloff")


def estimate_eta_spectral(autospec1, crossspec12, band, gain_stats: GainStats,
                          mode) -> EtaEstimate:
    """Arm-2 efficiency from band-averaged spectral ratios.

    Both spectra are averaged over the bins inside ``band`` (DC excluded)
    and the same prefactor and charge-moment corrections as the
    time-domain estimator are applied. Because the squared pulse transfer
    function divides out of the ratio bin by bin, the result needs no
    absolute spectral calibration; the band is still required to sit on
    the flat plateau of the arm-1 spectrum so that the flatness of both
    numerator and denominator backs the band average. Bin-to-bin scatter
    supplies the statistical uncertainty.
    """
    pref = _prefactor(mode)
    if autospec1.freqs.shape != crossspec12.freqs.shape or not np.allclose(
            autospec1.freqs, crossspec12.freqs, rtol=1e-9, atol=0.0):
        raise InputError("auto- and cross-spectrum frequency grids differ")
    mask = _band_bins(autospec1, band)
    a = autospec1.power[mask]
    c = crossspec12.power[mask]
    if a.mean() <= 0.0:
        raise EstimationError("band-averaged arm-1 spectral power is not positive")
    _check_plateau(a, band)
    n = a.size
    a_err = float(a.std(ddof=1) / np.sqrt(n))
    c_err = float(c.std(ddof=1) / np.sqrt(n))
    corr = gain_stats.gain_ratio * gain_stats.excess_noise1
    eta2, stat = _ratio_estimate(float(c.mean()), c_err, float(a.mean()), a_err,
                                 pref * corr, "spectral", mode)
    return EtaEstimate(eta2, stat, "spectral", mode, {
        "prefactor": pref,
        "gain_ratio": gain_stats.gain_ratio,
        "excess_noise_factor": gain_stats.excess_noise1,
        "band_lo_hz": float(band[0]),
        "band_hi_hz": float(band[1]),
        "band_bins": n,
    })


def excess_noise_factor(charges):
    """Sample <q^2>/<q>^2 of a pulse-height list, with jackknife stderr.

    Returns (value, stderr). The leave-one-out replicates are formed in
    closed form from the running sums, so the cost is linear in the
    sample size.
    """
    q = np.asarray(charges, dtype=np.float64)
    n = q.size
    if n < MIN_ENF_SAMPLES:
        raise InputError(f"need >= {MIN_ENF_SAMPLES} pulse heights, got {n}")
    s1 = q.sum()
    s2 = (q * q).sum()
    value = (s2 / n) / (s1 / n) ** 2
    loo = (n - 1) * (s2 - q * q) / (s1 - q) ** 2
    stderr = np.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum())
    return float(value), float(stderr)


def _probe_component(config, trial_seeds, trial_etas, n_probe):
    """Paired nonlinearity probe: same seeds rerun with eps at 0 and -eps.

    With the configured eps the trial results double as the +eps branch,
    so each probe seed costs two extra pipeline runs. Returns the mean
    over probe seeds of the two-sided relative shift.
    """
    from . import pipeline

    e1 = config.detector1.nonlinearity_eps
    e2 = config.detector2.nonlinearity_eps
    if e1 == 0.0 and e2 == 0.0:
        return 0.0
    shifts = []
    for i in range(n_probe):
        seed = trial_seeds[i]
        base = pipeline.run_pipeline(
            config.with_seed(seed).with_eps(0.0, 0.0), spectra=False)
        eta0 = base.eta_time.eta2
        plus = trial_etas[i]
        minus = pipeline.run_pipeline(
            config.with_seed(seed).with_eps(-e1, -e2), spectra=False)
        shifts.append((abs(plus - eta0) + abs(minus.eta_time.eta2 - eta0))
                      / (2.0 * abs(eta0)))
    return float(np.mean(shifts))


def uncertainty_budget(run_config, n_trials) -> BudgetReport:
    """Monte Carlo uncertainty budget of the time-domain estimator.

    Repeats the full pipeline ``n_trials`` times with fresh seeds derived
    from the configured one and reports the per-run statistical spread
    plus two systematic components: the amplifier-nonlinearity shift
    measured by paired reruns at eps = {+configured, 0, -configured} on
    shared seeds, and a fixed configured allowance for residual effects
    that are not simulated mechanistically (optical losses, alignment,
    background, dark current). The total combines statistical and
    systematic parts in quadrature.
    """
    from . import pipeline

    if n_trials < MIN_BUDGET_TRIALS:
        raise InputError(f"need >= {MIN_BUDGET_TRIALS} trials, got {n_trials}")
    n_probe = min(run_config.probe_seeds, n_trials)
    seeds = [int(s) for s in np.random.SeedSequence(
        run_config.source.rng_seed).generate_state(n_trials, dtype=np.uint64)]
    etas = np.empty(n_trials)
    for i, seed in enumerate(seeds):
        result = pipeline.run_pipeline(run_config.with_seed(seed), spectra=False)
        etas[i] = result.eta_time.eta2

    mean = float(etas.mean())
    std = float(etas.std(ddof=1))
    nl = _probe_component(run_config, seeds, etas, n_probe)
    residual = float(run_config.residual_systematic)
    components = [("nonlinearity", nl), ("residual_systematics", residual)]
    stat_rel = std / abs(mean) if mean else float("inf")
    total = float(np.sqrt(stat_rel**2 + nl**2 + residual**2))
    return BudgetReport(n_trials, mean, std, components, total)
