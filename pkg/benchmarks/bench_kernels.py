"""Benchmark the compiled clustering kernels against the pure-NumPy fallback.

Run with:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from sagrade.kernels import _py as py_kernels

try:
    from sagrade.kernels import _ck as ck_kernels
except ImportError:
    ck_kernels = None


def bench(fn, *args, repeats=20):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def lloyd_iteration(mod, points, centroids):
    labels = mod.assign(points, centroids)
    mod.update_centroids(points, labels, centroids.shape[0])
    mod.distortion(points, centroids, labels)


def main():
    rng = np.random.default_rng(0)
    cases = [
        ("small (29 x 20, k=3)", 29, 20, 3),
        ("medium (500 x 50, k=8)", 500, 50, 8),
        ("large (5000 x 100, k=16)", 5000, 100, 16),
    ]
    mods = [("python", py_kernels)]
    if ck_kernels is not None:
        mods.append(("cython", ck_kernels))
    else:
        print("compiled extension not available; benchmarking fallback only")

    print(f"{'case':<28} {'backend':<8} {'best (ms)':>10}")
    for name, n, d, k in cases:
        points = np.ascontiguousarray(rng.normal(size=(n, d)))
        centroids = np.ascontiguousarray(rng.normal(size=(k, d)))
        times = {}
        for backend, mod in mods:
            t = bench(lloyd_iteration, mod, points, centroids)
            times[backend] = t
            print(f"{name:<28} {backend:<8} {t * 1e3:>10.3f}")
        if len(times) == 2:
            print(f"{'':<28} speedup  {times['python'] / times['cython']:>9.2f}x")


if __name__ == "__main__":
    main()
