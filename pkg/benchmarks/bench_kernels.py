"""Compiled kernels against their pure-Python twins.

    python3 benchmarks/bench_kernels.py [--repeat N] [--sim-seconds S]

Each kernel runs on identical inputs under both backends; outputs are
checked for equality before timings are reported. The last row times a
short default-scenario simulation end to end under each backend.
"""

from __future__ import annotations

import argparse
import random
import sys
import timeit

from convergelab import kernels
from convergelab.crypto import ec
from convergelab.netsim import default_scenario, run_simulation


def cases(rng: random.Random):
    c = ec.P256
    ks = [c.random_scalar(rng) for _ in range(20)]
    times, t = [], 0.0
    for _ in range(50_000):
        t += rng.uniform(0.01, 1.0)
        times.append(t)
    values = [rng.uniform(0, 1e6) for _ in times]
    keys = [rng.getrandbits(64) for _ in range(20_000)]
    return {
        "scalar_mul P-256 x20": lambda: [kernels.scalar_mul_jacobian(k, c.gx, c.gy, c.a, c.p) for k in ks],
        "contention_slots x20000": lambda: [kernels.contention_slots(k, 0.6, 31, 1023) for k in keys],
        "zoh_running_mean n=50000": lambda: kernels.zoh_running_mean(times, values),
        "splitmix_uniforms n=100000": lambda: kernels.splitmix_uniforms(12345, 100_000),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sim-seconds", type=float, default=60.0)
    args = ap.parse_args(argv)
    if not kernels.compiled_available():
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    work = cases(random.Random(1))
    scen = default_scenario().with_overrides({"sim.duration_s": str(args.sim_seconds)})
    work[f"simulation {args.sim_seconds:g} s"] = lambda: run_simulation(scen).trace_digest

    print(f"{'kernel':<30}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, fn in work.items():
        out, best = {}, {}
        for backend in ("python", "compiled"):
            kernels.use_backend(backend)
            out[backend] = fn()
            best[backend] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        kernels.use_backend("compiled")
        if out["python"] != out["compiled"]:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 2
        print(f"{name:<30}{best['python']:>12.4f}{best['compiled']:>12.4f}{best['python'] / best['compiled']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
