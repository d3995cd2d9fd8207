#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 3]

The same functions are importable through metriclab.kernels with the backend
chosen by METRICLAB_BACKEND; here both implementations are loaded explicitly
so a single process can time them side by side.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from metriclab.kernels import _numpy_impl  # noqa: E402

try:
    from metriclab.kernels import _numba_impl
except ImportError:
    _numba_impl = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def ring_graph(n, d):
    nbr = np.empty(n * d, dtype=np.int64)
    for k in range(d):
        off = k // 2 + 1
        nbr[k::d] = (np.arange(n) + (off if k % 2 == 0 else -off)) % n
    indptr = np.arange(0, (n + 1) * d, d, dtype=np.int64)
    return indptr, nbr


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n, d = args.n, 12
    indptr, nbr = ring_graph(n, d)
    x = rng.standard_normal(n)
    X = rng.standard_normal((400, 8))
    indptr_s, nbr_s = ring_graph(400, 6)
    A_mat = rng.integers(0, 2, (n, 18)).astype(np.uint8)
    b_mat = rng.integers(0, 2, 18).astype(np.uint8)
    A_perm = np.stack([rng.permutation(64) for _ in range(n)]).astype(np.uint16)
    b_perm = rng.permutation(64).astype(np.uint16)

    cases = [
        ("bfs_distances", (indptr, nbr, n, 0)),
        ("adj_matvec", (indptr, nbr, x)),
        ("matp_mul_batch", (A_mat, b_mat, 2, 2)),
        ("perm_apply_batch", (A_perm, b_perm)),
        ("pair_scan_graph", (indptr_s, nbr_s, X, 40)),
    ]

    if _numba_impl is not None:
        for name, call in cases:      # trigger JIT outside the timings
            getattr(_numba_impl, name)(*call)

    print(f"{'kernel':<18} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, call in cases:
        t_np = timeit(getattr(_numpy_impl, name), *call, repeat=args.repeat)
        if _numba_impl is None:
            print(f"{name:<18} {t_np * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
            continue
        t_nb = timeit(getattr(_numba_impl, name), *call, repeat=args.repeat)
        print(f"{name:<18} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
              f"{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
