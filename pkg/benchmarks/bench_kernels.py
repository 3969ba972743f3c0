"""Compare the numba-compiled kernels against the plain-Python fallback.

The path is chosen at import time by ``RVRSIM_NO_NUMBA``, so the script
re-executes itself in a subprocess with the flag set and reports both
timings side by side.

    python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def make_inputs(steps: int):
    rng = np.random.default_rng(7)
    n = 3
    prices = np.exp(np.cumsum(rng.normal(0.0, 1e-3, (steps, n)), axis=0))
    prices *= np.array([4e4, 2.5e3, 1.0])
    weights = np.full((steps, n), 1.0 / n)
    R0 = weights[0] * 1e7 / prices[0]
    spreads = np.array([2e-4, 2e-4, 1e-4])
    return prices, weights, R0, spreads


def bench(steps: int, repeat: int) -> None:
    import rvrsim.kernels as k

    label = "numba" if k.USE_NUMBA else "fallback"
    prices, weights, R0, spreads = make_inputs(steps)

    # warm-up triggers compilation on the numba path
    k.amm_loop(prices[:64], weights[:64], R0, 0.997, 0.5, 1, 0.0, False)
    k.cex_loop(prices[:64], weights[:64], 1e7, 1e-3, spreads)

    for name, call in (
        ("amm_loop", lambda: k.amm_loop(prices, weights, R0, 0.997, 0.5, 1, 0.0, False)),
        ("cex_loop", lambda: k.cex_loop(prices, weights, 1e7, 1e-3, spreads)),
    ):
        best = min(_time(call) for _ in range(repeat))
        rate = steps / best / 1e6
        print(f"{label:>8}  {name}: {best * 1e3:8.2f} ms  ({rate:6.2f} M steps/s)")


def _time(call) -> float:
    start = time.perf_counter()
    call()
    return time.perf_counter() - start


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--single", action="store_true",
                        help="bench only the path selected by the current env")
    args = parser.parse_args()

    if args.single:
        bench(args.steps, args.repeat)
        return 0

    for no_numba in (False, True):
        env = dict(os.environ)
        env.pop("RVRSIM_NO_NUMBA", None)
        if no_numba:
            env["RVRSIM_NO_NUMBA"] = "1"
        cmd = [sys.executable, __file__, "--single",
               "--steps", str(args.steps), "--repeat", str(args.repeat)]
        rc = subprocess.run(cmd, env=env).returncode
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
