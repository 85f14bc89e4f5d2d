"""Compare the compiled and pure-numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]

Times the two hot kernels — pairwise Euclidean distances and the SMOE
channel-dispersion map — at sizes matching real runs (hundreds of samples,
13-channel pyramids), and prints per-backend timings with the speedup.
"""

import argparse
import time

import numpy as np

from texlens._kernels import available_backends, get_backend


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def bench(repeats):
    rng = np.random.Generator(np.random.PCG64(7))
    cases = [
        (
            "pairwise_distances 400x400, d=32",
            "pairwise_distances",
            (rng.standard_normal((400, 32)), rng.standard_normal((400, 32))),
        ),
        (
            "pairwise_distances 2000x500, d=13",
            "pairwise_distances",
            (rng.standard_normal((2000, 13)), rng.standard_normal((500, 13))),
        ),
        (
            "smoe_map 13x256x256",
            "smoe_map",
            (rng.uniform(0.0, 4.0, size=(13, 256, 256)), 1e-7),
        ),
        (
            "smoe_map 64x64x64",
            "smoe_map",
            (rng.uniform(0.0, 4.0, size=(64, 64, 64)), 1e-7),
        ),
    ]
    backends = available_backends()
    print(f"backends: {', '.join(backends)} (best of {repeats})")
    width = max(len(label) for label, _, _ in cases)
    for label, name, args in cases:
        times = {}
        for backend in backends:
            kernel = getattr(get_backend(backend), name)
            kernel(*args)  # warm-up outside the timed region
            times[backend] = best_of(repeats, kernel, *args)
        row = "  ".join(f"{b}: {times[b] * 1e3:8.3f} ms" for b in backends)
        note = ""
        if "compiled" in times and "fallback" in times:
            note = f"  ({times['fallback'] / times['compiled']:.2f}x)"
        print(f"{label:<{width}}  {row}{note}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    bench(args.repeats)


if __name__ == "__main__":
    main()
