"""Pure-numpy fallback for the compiled kernels.

Used when the Cython extension is unavailable or when the environment
variable ``PDCALIB_KERNELS=python`` forces it. Results agree with the
compiled path to floating-point round-off (not bit-identically: summation
orders differ).
"""

import numpy as np

# events per vectorized block for the sampled-kernel shapes
_CHUNK = 2048


def _start_index(x):
    # smallest integer j with j >= x, as int64
    return np.ceil(x).astype(np.int64)


def deposit_rectangular(times, charges, t0, dt, width, height, out):
    """Add q*height to every sample with t0 + j*dt in [t_n, t_n + width).

    Implemented as a cumulative sum of +/- edges, O(n_events + n_samples).
    """
    n = out.shape[0]
    j0 = np.clip(_start_index((times - t0) / dt), 0, n)
    j1 = np.clip(_start_index((times + width - t0) / dt), 0, n)
    edges = np.zeros(n + 1)
    np.add.at(edges, j0, charges * height)
    np.add.at(edges, j1, -(charges * height))
    out += np.cumsum(edges[:-1])


def _deposit_sampled(times, charges, t0, dt, lo, hi, value_fn, out):
    # generic deposition: evaluate value_fn on each event's covered samples
    n = out.shape[0]
    width = int(np.ceil((hi - lo) / dt)) + 1
    for a in range(0, times.shape[0], _CHUNK):
        t = times[a:a + _CHUNK]
        q = charges[a:a + _CHUNK]
        j0 = np.clip(_start_index((t + lo - t0) / dt), 0, n)
        jend = np.clip(_start_index((t + hi - t0) / dt), 0, n)
        idx = j0[:, None] + np.arange(width)[None, :]
        valid = idx < jend[:, None]
        idx = np.where(valid, idx, 0)
        d = np.where(valid, t0 + idx * dt - t[:, None], 0.0)
        vals = np.where(valid, q[:, None] * value_fn(d), 0.0)
        out += np.bincount(idx.ravel(), weights=vals.ravel(), minlength=n)[:n]


def deposit_gaussian(times, charges, t0, dt, sigma, amp, cut, out):
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    _deposit_sampled(times, charges, t0, dt, -cut, cut,
                     lambda d: amp * np.exp(-d * d * inv2s2), out)


def deposit_exponential(times, charges, t0, dt, tau, amp, cut, out):
    _deposit_sampled(times, charges, t0, dt, 0.0, cut,
                     lambda d: amp * np.exp(-d / tau), out)


def lag_sums(x, y, kmax):
    """s[k] = sum_j x[j] * y[j + k] for k = 0..kmax (indices kept in range)."""
    nx = x.shape[0]
    ny = y.shape[0]
    out = np.zeros(kmax + 1)
    for k in range(kmax + 1):
        jmax = min(nx, ny - k)
        if jmax > 0:
            out[k] = np.dot(x[:jmax], y[k:k + jmax])
    return out
