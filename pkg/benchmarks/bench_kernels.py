"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py --paths 2000 --horizon 250 --gains 101
"""
import argparse
import time

import numpy as np

from ddcontrol import _accel, kernels
from ddcontrol.drawdown import DrawdownSpec, GammaInterval
from ddcontrol.optimizer import GammaGrid, objective_curve


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--horizon", type=int, default=250)
    ap.add_argument("--gains", type=int, default=101)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    x = rng.uniform(-0.05, 0.05, (args.paths, args.horizon))
    rf = np.full(args.horizon, 1e-4)
    gammas = rng.uniform(-19, 19, args.paths)
    grid = GammaGrid(GammaInterval(-19.0, 19.0), args.gains).points()
    long_path = rng.uniform(-0.05, 0.05, 100_000)
    long_rf = np.full(long_path.size, 1e-4)
    spec = DrawdownSpec(0.1)

    cases = {
        f"batch {args.paths}x{args.horizon}": lambda numba: (
            kernels.modulation_batch_numba if numba else kernels.modulation_batch_numpy
        )(gammas, x, rf, 0.1, True),
        f"gain curve {len(grid)} gains": lambda numba: objective_curve(grid, x, rf, spec),
        f"backtest 1x{long_path.size}": lambda numba: kernels.backtest_path(
            long_path, long_rf, kernels.POLICY_MODULATION, 8.0, 0.5, 0.1, 0.01, True, True,
            0.001, 1.0, False, -1.0, 1.0, use_numba=numba),
    }
    print(f"{'case':<28} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}")
    for name, fn in cases.items():
        timings = {}
        for numba in (False, True):
            _accel.USE_NUMBA = numba
            fn(numba)  # warm up (compilation, caches)
            timings[numba] = best_of(lambda: fn(numba), args.repeat)
        print(f"{name:<28} {timings[False]:>10.4f} {timings[True]:>10.4f} "
              f"{timings[False] / timings[True]:>7.1f}x")


if __name__ == "__main__":
    main()
