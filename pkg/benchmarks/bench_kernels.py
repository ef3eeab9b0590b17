"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is called once untimed (JIT compilation, caches), then timed
with timeit; the table reports the best per-call time and the speedup.
"""

import argparse
import math
import timeit

import numpy as np

from levyedge import _kernels
from levyedge.partitions import solution_table


def partition_inputs(nu, seed=0):
    lam = np.random.default_rng(seed).normal(size=nu)
    weights = np.array([lam[m - 1] / math.factorial(m + 2) for m in range(1, nu + 1)])
    mant, expo = np.frexp(weights)
    fmant, fexp = np.frexp(np.array([1.0 / math.factorial(k) for k in range(nu + 2)]))
    mult, ls = solution_table(nu)
    return mult, ls, mant, expo.astype(np.int64), fmant, fexp.astype(np.int64)


def cases():
    xs = np.linspace(-6, 6, 2000)
    yield "hermite_table n=120, 2000 pts", "hermite_table", (120, xs)
    for nu in (20, 30, 40):
        yield f"partition_coefficients nu={nu}", "partition_coefficients", partition_inputs(nu)
    rng = np.random.default_rng(1)
    counts = rng.poisson(25.0, 1 << 18)
    values = rng.random(int(counts.sum()))
    yield "segment_sums 2^18 paths", "segment_sums", (values, counts)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':36s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for label, name, inputs in cases():
        timings = {}
        for backend in ("numpy", "jit"):
            fn = getattr(_kernels, f"{name}_{backend}")
            fn(*inputs)
            number = 3
            best = min(timeit.repeat(lambda: fn(*inputs), number=number, repeat=args.repeat))
            timings[backend] = 1e3 * best / number
        speedup = timings["numpy"] / timings["jit"]
        print(f"{label:36s} {timings['numpy']:12.3f} {timings['jit']:12.3f} {speedup:8.1f}x")


if __name__ == "__main__":
    main()
