#!/usr/bin/env python3
"""Compare the compiled kernels with the pure-numpy fallback.

Runs the two hot kernels (composite marking for the segmented sieve and
the maximum-drop scan) over identical inputs on both backends, checks the
results agree, and prints per-backend timings.

    python3 benchmarks/bench_kernels.py [--size 4000000] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from primequot._kernels import BACKEND, pykernels

try:
    from primequot._kernels import ckernels
except ImportError:
    ckernels = None


def time_call(fn, *args, repeat=3):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_mark_composites(impl, lo, size, base_primes, repeat):
    def run():
        flags = np.ones(size, dtype=bool)
        impl.mark_composites(flags, lo, base_primes)
        return flags

    best, flags = time_call(run, repeat=repeat)
    return best, flags


def small_primes(limit):
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=4_000_000,
                    help="segment length / array length")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"active backend: {BACKEND}")
    backends = [("python", pykernels)]
    if ckernels is not None:
        backends.append(("cython", ckernels))
    else:
        print("compiled extension unavailable; timing the fallback only")

    lo = 10 ** 9
    base = small_primes(math.isqrt(lo + args.size) + 1)
    print(f"\nmark_composites on [{lo}, {lo + args.size}) "
          f"({len(base)} base primes):")
    reference = None
    for name, impl in backends:
        best, flags = bench_mark_composites(impl, lo, args.size, base,
                                            args.repeat)
        count = int(flags.sum())
        if reference is None:
            reference = count
        assert count == reference, "backends disagree on prime counts"
        print(f"  {name:>7}: {best * 1000:8.1f} ms   "
              f"({count} survivors)")

    rng = np.random.default_rng(2026)
    values = np.cumsum(rng.integers(-1, 3, size=args.size)).astype(np.int64)
    values -= values.min()
    print(f"\nmax_drop on a random walk of length {args.size}:")
    reference = None
    for name, impl in backends:
        best, out = time_call(impl.max_drop, values, repeat=args.repeat)
        if reference is None:
            reference = out[0]
        assert out[0] == reference, "backends disagree on the max drop"
        print(f"  {name:>7}: {best * 1000:8.1f} ms   (drop {out[0]} "
              f"at {out[1]} -> {out[2]})")


if __name__ == "__main__":
    main()
