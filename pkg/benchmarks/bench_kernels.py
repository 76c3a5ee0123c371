#!/usr/bin/env python3
"""Timing comparison between the compiled kernels and the numpy fallback.

Runs each hot kernel on identical inputs for both implementations and
reports per-call times plus the speedup. With --end-to-end it also times
full simulation runs in subprocesses (the implementation is chosen at
import, so each variant needs a fresh interpreter).

Usage: python3 benchmarks/bench_kernels.py [--n 513] [--repeat 200] [--end-to-end]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from mleachsim import _kernels_py

try:
    from mleachsim import _speedups
except ImportError:
    _speedups = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pairwise(impl, n, repeat, rng):
    pos = rng.uniform(0.0, 7500.0, size=(n, 2))
    return timeit(lambda: impl.pairwise_distances(pos), repeat)


def bench_charge(impl, n, repeat, rng):
    energy0 = rng.uniform(1.0, 2.0, n)
    ids = np.arange(n, dtype=np.int64)

    def run():
        energy = energy0.copy()
        impl.charge_uniform(energy, np.zeros(n), np.zeros(n), ids, 1e-4)

    return timeit(run, repeat)


def bench_merge(impl, n, repeat, rng):
    dests = n + 1
    metric0 = rng.integers(1, 10, size=(n, dests)).astype(np.int32)
    seq0 = rng.integers(0, 50, size=(n, dests)).astype(np.int64) * 2
    nh0 = rng.integers(-1, n, size=(n, dests)).astype(np.int32)
    receivers = np.arange(0, n, 2, dtype=np.int64)
    adv_metric = rng.integers(0, 8, size=dests).astype(np.int32)
    adv_seq = rng.integers(0, 60, size=dests).astype(np.int64) * 2
    adv_mask = rng.random(dests) < 0.8

    def run():
        impl.dsdv_merge(
            metric0.copy(), seq0.copy(), nh0.copy(),
            receivers, 1, adv_metric, adv_seq, adv_mask,
        )

    return timeit(run, repeat)


BENCHES = [
    ("pairwise_distances", bench_pairwise),
    ("charge_uniform", bench_charge),
    ("dsdv_merge", bench_merge),
]


def end_to_end(duration_s):
    code = (
        "import time\n"
        "from dataclasses import replace\n"
        "from importlib import resources\n"
        "from mleachsim import load_config, run_simulation, validate_config\n"
        "from mleachsim.kernels import IMPLEMENTATION\n"
        "path = resources.files('mleachsim').joinpath('data/table1.cfg')\n"
        f"cfg = validate_config(replace(load_config(str(path)), sim_duration_s={duration_s}))\n"
        "t0 = time.perf_counter()\n"
        "for proto in ('mleach', 'dsdv'):\n"
        "    run_simulation(cfg, proto)\n"
        "print(IMPLEMENTATION, time.perf_counter() - t0)\n"
    )
    out = {}
    for pure in ("0", "1"):
        env = dict(os.environ, MLEACH_SIM_PURE=pure)
        res = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
        )
        impl, elapsed = res.stdout.split()
        out[impl] = float(elapsed)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=513, help="matrix dimension (nodes + sink)")
    parser.add_argument("--repeat", type=int, default=200, help="calls per measurement")
    parser.add_argument(
        "--end-to-end", action="store_true",
        help="also time full runs of the packaged scenario in both modes",
    )
    parser.add_argument(
        "--duration", type=int, default=60, help="end-to-end horizon in seconds"
    )
    args = parser.parse_args()

    if _speedups is None:
        print("compiled extension not available; showing the fallback only")
    print(f"n={args.n}, best of {args.repeat} calls\n")
    print(f"{'kernel':<20} {'python':>12} {'compiled':>12} {'speedup':>9}")
    rng_seed = 12345
    for name, bench in BENCHES:
        py = bench(_kernels_py, args.n, args.repeat, np.random.default_rng(rng_seed))
        if _speedups is None:
            print(f"{name:<20} {py * 1e3:>10.3f}ms {'-':>12} {'-':>9}")
            continue
        cy = bench(_speedups, args.n, args.repeat, np.random.default_rng(rng_seed))
        print(f"{name:<20} {py * 1e3:>10.3f}ms {cy * 1e3:>10.3f}ms {py / cy:>8.2f}x")

    if args.end_to_end:
        print(f"\nfull runs, both protocols, {args.duration} s horizon:")
        for impl, elapsed in sorted(end_to_end(args.duration).items()):
            print(f"  {impl:<10} {elapsed:8.2f} s")


if __name__ == "__main__":
    main()
