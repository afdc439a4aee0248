# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: pulse deposition onto a sample grid and direct
lag-domain correlation sums.

Semantics must match :mod:`pdcalib._kernels_py` (pure-numpy fallback);
``tests/test_detector.py`` and the benchmark check both backends against
each other.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, exp

cnp.import_array()


cdef inline Py_ssize_t _clip_index(double x, Py_ssize_t n) nogil:
    cdef Py_ssize_t i
    if x <= 0.0:
        return 0
    i = <Py_ssize_t>ceil(x)
    if i > n:
        return n
    return i


def deposit_rectangular(double[::1] times, double[::1] charges, double t0,
                        double dt, double width, double height,
                        double[::1] out):
    """Add q*height to every sample with t0 + j*dt in [t_n, t_n + width)."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t m = times.shape[0]
    cdef Py_ssize_t e, j, j0, j1
    cdef double t, v
    with nogil:
        for e in range(m):
            t = times[e]
            j0 = _clip_index((t - t0) / dt, n)
            j1 = _clip_index((t + width - t0) / dt, n)
            v = charges[e] * height
            for j in range(j0, j1):
                out[j] += v


def deposit_gaussian(double[::1] times, double[::1] charges, double t0,
                     double dt, double sigma, double amp, double cut,
                     double[::1] out):
    """Add q*amp*exp(-d^2/(2 sigma^2)) for d = sample_time - t_n, |d| < cut."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t m = times.shape[0]
    cdef Py_ssize_t e, j, j0, j1
    cdef double t, q, d, inv2s2 = 1.0 / (2.0 * sigma * sigma)
    with nogil:
        for e in range(m):
            t = times[e]
            q = charges[e] * amp
            j0 = _clip_index((t - cut - t0) / dt, n)
            j1 = _clip_index((t + cut - t0) / dt, n)
            for j in range(j0, j1):
                d = t0 + j * dt - t
                out[j] += q * exp(-d * d * inv2s2)


def deposit_exponential(double[::1] times, double[::1] charges, double t0,
                        double dt, double tau, double amp, double cut,
                        double[::1] out):
    """Add q*amp*exp(-d/tau) for d = sample_time - t_n in [0, cut)."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t m = times.shape[0]
    cdef Py_ssize_t e, j, j0, j1
    cdef double t, q, inv_tau = 1.0 / tau
    with nogil:
        for e in range(m):
            t = times[e]
            q = charges[e] * amp
            j0 = _clip_index((t - t0) / dt, n)
            j1 = _clip_index((t + cut - t0) / dt, n)
            for j in range(j0, j1):
                out[j] += q * exp(-(t0 + j * dt - t) * inv_tau)


def lag_sums(double[::1] x, double[::1] y, Py_ssize_t kmax):
    """s[k] = sum_j x[j] * y[j + k] for k = 0..kmax (indices kept in range).

    Blocked over j so each block of x and y stays cache-resident across
    all kmax+1 lags instead of streaming the arrays once per lag.
    """
    cdef Py_ssize_t nx = x.shape[0]
    cdef Py_ssize_t ny = y.shape[0]
    cdef Py_ssize_t block = 16384
    cdef Py_ssize_t k, j, b0, b1, jmax
    out_arr = np.zeros(kmax + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double a0, a1, a2, a3
    with nogil:
        b0 = 0
        while b0 < nx:
            b1 = b0 + block
            if b1 > nx:
                b1 = nx
            for k in range(kmax + 1):
                jmax = ny - k
                if jmax > b1:
                    jmax = b1
                a0 = a1 = a2 = a3 = 0.0
                j = b0
                while j + 3 < jmax:
                    a0 += x[j] * y[j + k]
                    a1 += x[j + 1] * y[j + 1 + k]
                    a2 += x[j + 2] * y[j + 2 + k]
                    a3 += x[j + 3] * y[j + 3 + k]
                    j += 4
                while j < jmax:
                    a0 += x[j] * y[j + k]
                    j += 1
                out[k] += (a0 + a1) + (a2 + a3)
            b0 = b1
    return out_arr
