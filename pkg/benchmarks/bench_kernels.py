#!/usr/bin/env python3
"""Benchmark the compiled shrink kernel against the pure-numpy fallback.

The kernel is the inner loop of every S-update (it runs on a vector with one
entry per matrix cell), so both backends are timed on the post-sort solve and
on the full prox including canonicalization.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from srpcp import _kernels_py

try:
    from srpcp import _kernels
except ImportError:
    _kernels = None


def timeit(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernel(sizes=(1_000, 100_000, 1_000_000, 4_000_000), tau=0.01):
    rng = np.random.default_rng(0)
    print(f"{'n':>9}  {'python':>10}  {'cython':>10}  {'speedup':>7}")
    for n in sizes:
        b = np.sort(np.abs(rng.standard_normal(n)))[::-1].copy()
        t_py = timeit(_kernels_py.canonical_solve, b, tau)
        if _kernels is None:
            print(f"{n:>9}  {t_py * 1e3:>9.2f}ms  {'n/a':>10}")
            continue
        t_cy = timeit(_kernels.canonical_solve, b, tau)
        s_py = _kernels_py.canonical_solve(b, tau)[0]
        s_cy = _kernels.canonical_solve(b, tau)[0]
        assert np.array_equal(s_py, s_cy), "backends disagree"
        print(f"{n:>9}  {t_py * 1e3:>9.2f}ms  {t_cy * 1e3:>9.2f}ms  {t_py / t_cy:>6.2f}x")


def bench_small_calls(n_calls=20_000, length=6, tau=0.8):
    """Small-vector regime: per-call overhead dominates (the acceptance grid)."""
    rng = np.random.default_rng(1)
    vecs = [np.sort(np.abs(rng.standard_normal(length)))[::-1].copy() for _ in range(64)]

    def run(backend):
        for i in range(n_calls):
            backend.canonical_solve(vecs[i % 64], tau)

    t_py = timeit(run, _kernels_py, repeat=3)
    line = f"{n_calls} calls of length {length}:  python {t_py * 1e3:.1f}ms"
    if _kernels is not None:
        t_cy = timeit(run, _kernels, repeat=3)
        line += f"  cython {t_cy * 1e3:.1f}ms  speedup {t_py / t_cy:.2f}x"
    print(line)


if __name__ == "__main__":
    if _kernels is None:
        print("compiled kernel not built; timing the fallback only")
    bench_kernel()
    print()
    bench_small_calls()
