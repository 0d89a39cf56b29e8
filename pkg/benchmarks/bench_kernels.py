"""Benchmark the jitted hot kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
Set FRACSPDE_NO_NUMBA=1 before importing to check the fallback is the
one being selected (it will then benchmark numpy against numpy).
"""

import time

import numpy as np

from fracspde import _kernels


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm (jit compile / cache load)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(label, n_modes, n_int, order):
    rng = np.random.default_rng(1)
    mu = rng.uniform(0.1, 5.0, n_modes)
    dt = np.sort(rng.uniform(0.0, 1.0, n_int))[::-1].copy()
    coef = rng.standard_normal((n_int, order + 1))
    w = rng.standard_normal((n_modes, n_int, order + 1))

    rows = []
    if _kernels.USING_NUMBA:
        t_nb = timeit(_kernels._path_accumulate_nb, mu, dt, coef, w)
        rows.append(("numba", t_nb))
    t_np = timeit(_kernels._path_accumulate_np, mu, dt, coef, w)
    rows.append(("numpy", t_np))

    print(f"\npath_accumulate {label}: M={n_modes}, N={n_int}, m={order}")
    for name, t in rows:
        print(f"  {name:<6} {t * 1e3:9.3f} ms")
    if len(rows) == 2:
        print(f"  speedup numba/numpy: {rows[1][1] / rows[0][1]:.2f}x")


def main():
    print(f"numba available and enabled: {_kernels.USING_NUMBA}")
    bench_case("spectral-experiment size", 4096, 1280, 1)
    bench_case("temporal-replica size", 100, 16384, 1)
    bench_case("sphere size", 1024, 50, 1)


if __name__ == "__main__":
    main()
