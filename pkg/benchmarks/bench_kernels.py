"""Compiled vs numpy kernels for the batched secular function and its roots.

Run with ``python benchmarks/bench_kernels.py [--n 64 96] [--repeat 5]``.
The workload is the lower root of ``delta3`` at every ``(p, q)`` node of the
symmetric preset, the hot loop behind the three-particle branch.
"""

import argparse
import timeit

import numpy as np

from fockband import kernels, preset


def workload(n):
    P = preset("symmetric", n=n)
    N = P.N
    w2 = P.w2.ravel()
    w3 = P.w3.reshape(N * N, N)
    vw = P.weight * P.v3**2
    hi = w3.min(axis=1) - 1e-12
    lo = hi - 1.0
    # expand until delta3(lo) > 0 everywhere
    while True:
        f = kernels.delta3_many(w2, w3, vw, lo)
        if np.all(f > 0):
            break
        lo = np.where(f > 0, lo, lo - 2 * (hi - lo))
    return w2, w3, vw, lo, hi


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[32, 64, 96])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled extension not built; only the numpy backend is timed")
    print(f"{'n':>4} {'rows':>7} {'kernel':>8} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8} {'max diff':>9}")
    for n in args.n:
        w2, w3, vw, lo, hi = workload(n)
        z = 0.5 * (lo + hi)
        cases = {
            "delta3": lambda b: kernels.delta3_many(w2, w3, vw, z, backend=b),
            "bisect": lambda b: kernels.bisect_delta3(w2, w3, vw, lo, hi, backend=b),
        }
        for name, fn in cases.items():
            t_py = min(timeit.repeat(lambda: fn("python"), number=1, repeat=args.repeat))
            if kernels.BACKEND == "cython":
                t_c = min(timeit.repeat(lambda: fn(None), number=1, repeat=args.repeat))
                diff = float(np.max(np.abs(fn("python") - fn(None))))
                print(f"{n:4d} {w2.size:7d} {name:>8} {1e3 * t_py:11.2f} {1e3 * t_c:12.2f} {t_py / t_c:8.1f} {diff:9.1e}")
            else:
                print(f"{n:4d} {w2.size:7d} {name:>8} {1e3 * t_py:11.2f} {'-':>12} {'-':>8} {'-':>9}")


if __name__ == "__main__":
    main()
