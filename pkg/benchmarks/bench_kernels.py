"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the two hot paths (pulse deposition onto the sample grid, direct
lag-domain correlation sums) on both backends and reports the speedup and
the maximum relative deviation between their outputs.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --events 2000000 --samples 20000000
"""

import argparse
import time

import numpy as np

from pdcalib import _kernels_cy, _kernels_py


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def rel_dev(a, b):
    scale = np.abs(a).max()
    return float(np.abs(a - b).max() / scale) if scale else 0.0


def bench_deposit(n_events, n_samples, dt, tau_p, rng, rows):
    duration = n_samples * dt
    times = np.sort(rng.uniform(0.0, duration - 25.0 * tau_p, n_events))
    charges = rng.exponential(1.0, n_events)
    cases = [
        ("deposit_rectangular", (times, charges, 0.0, dt, tau_p, 1.0 / tau_p)),
        ("deposit_gaussian", (times, charges, 0.0, dt, tau_p,
                              1.0 / (np.sqrt(2.0 * np.pi) * tau_p), 6.0 * tau_p)),
        ("deposit_exponential", (times, charges, 0.0, dt, tau_p,
                                 1.0 / tau_p, 20.0 * tau_p)),
    ]
    for name, args in cases:
        out_c = np.zeros(n_samples)
        out_p = np.zeros(n_samples)
        t_c = timeit(getattr(_kernels_cy, name), *args, out_c)
        t_p = timeit(getattr(_kernels_py, name), *args, out_p)
        # the timing loop re-adds deposits; deviation needs a clean pair
        out_c[:] = 0.0
        out_p[:] = 0.0
        getattr(_kernels_cy, name)(*args, out_c)
        getattr(_kernels_py, name)(*args, out_p)
        rows.append((name, t_c, t_p, rel_dev(out_c, out_p)))


def bench_lag_sums(n_samples, kmax, rng, rows):
    x = rng.normal(size=n_samples)
    y = rng.normal(size=n_samples)
    t_c = timeit(_kernels_cy.lag_sums, x, y, kmax)
    t_p = timeit(_kernels_py.lag_sums, x, y, kmax)
    dev = rel_dev(_kernels_cy.lag_sums(x, y, kmax), _kernels_py.lag_sums(x, y, kmax))
    rows.append((f"lag_sums (kmax={kmax})", t_c, t_p, dev))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=500_000)
    ap.add_argument("--samples", type=int, default=5_000_000)
    ap.add_argument("--kmax", type=int, default=150)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    bench_deposit(args.events, args.samples, 1e-10, 3e-9, rng, rows)
    bench_lag_sums(args.samples, args.kmax, rng, rows)

    print(f"{args.events} events onto {args.samples} samples; best of 3")
    print(f"{'kernel':<28}{'cython':>10}{'python':>10}{'speedup':>9}{'max rel dev':>14}")
    for name, t_c, t_p, dev in rows:
        print(f"{name:<28}{t_c:>9.3f}s{t_p:>9.3f}s{t_p / t_c:>8.1f}x{dev:>14.2e}")


if __name__ == "__main__":
    main()
