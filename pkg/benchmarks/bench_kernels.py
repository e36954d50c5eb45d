"""Benchmark the compiled kernels against the pure-numpy fallback.

Run from the repository root after an editable install::

    python3 benchmarks/bench_kernels.py [--paths 256] [--steps 4096] [--repeat 5]

Both backends are bit-identical (the test suite asserts it); this script
only reports speed, plus an end-to-end engine timing so the kernel share
of the total is visible.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from stickybm._backend import available_backends
from stickybm.paths import exit_time_mc
from stickybm.sampling import RngStream


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(mod, paths: int, steps: int, repeat: int) -> dict:
    rng = RngStream(7, 0)
    dt = 1e-3
    incr = rng.normals(paths * steps).reshape(paths, steps) * np.sqrt(2.0 * dt)
    b0 = np.zeros(paths)
    g0 = np.zeros(paths)
    t_sk = _time(lambda: mod.skorokhod_block(incr, b0.copy(), g0.copy()), repeat)

    _, gam = mod.skorokhod_block(incr, b0.copy(), g0.copy())
    dgam = np.maximum(np.diff(gam, axis=1, prepend=0.0), 0.0)
    cj0 = np.zeros(paths)
    t_tl = _time(lambda: mod.boundary_tally_block(dgam, cj0.copy(), 0, dt, 1.0),
                 repeat)
    return {"skorokhod_s": t_sk, "tally_s": t_tl,
            "steps_per_s": paths * steps / t_sk}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=256)
    ap.add_argument("--steps", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}  "
          f"(block {args.paths} paths x {args.steps} steps, best of {args.repeat})")
    results = {}
    for name, mod in backends.items():
        results[name] = bench_backend(mod, args.paths, args.steps, args.repeat)
        r = results[name]
        print(f"  {name:>6}: skorokhod {r['skorokhod_s'] * 1e3:8.2f} ms   "
              f"tally {r['tally_s'] * 1e3:8.2f} ms   "
              f"({r['steps_per_s'] / 1e6:.1f} M steps/s)")
    if {"numpy", "cython"} <= results.keys():
        speedup = results["numpy"]["skorokhod_s"] / results["cython"]["skorokhod_s"]
        print(f"  cython skorokhod speedup: {speedup:.1f}x")

    t0 = time.perf_counter()
    exit_time_mc(0.3, 1.0, 1e-4, 2000, master_seed=11)
    print(f"end-to-end: exit_time_mc(n=2000, dt=1e-4) in "
          f"{time.perf_counter() - t0:.2f}s with active backend")


if __name__ == "__main__":
    main()
