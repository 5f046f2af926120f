"""Pair-kernel timings: numba loop vs vectorised numpy.

    python benchmarks/bench_kernels.py --sizes 100 400 1600 --repeat 5

The numba column is empty when numba is missing or ELLIPSELAW_DISABLE_NUMBA=1.
"""

import argparse
import time

import numpy as np

from ellipselaw._jit import HAVE_NUMBA
from ellipselaw._kernels import pair_sums
from ellipselaw.anisotropy import make_preset
from ellipselaw.particles import initial_config


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 400, 1600])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--preset", default="elastic", choices=["dislocation", "elastic"])
    args = ap.parse_args(argv)

    kernel = make_preset(args.preset, **({"alpha": 0.5} if args.preset == "dislocation" else {"a": 0.5, "b": 1.0}))
    a, b = kernel.series.a, kernel.series.b
    print(f"preset={args.preset} harmonics={kernel.series.N} numba={'yes' if HAVE_NUMBA else 'no'}")
    print(f"{'n':>6} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8} {'max |diff|':>11}")
    if HAVE_NUMBA:
        pair_sums(initial_config(4).positions, 1.0, a, b, "numba")  # compile
    for n in args.sizes:
        X = initial_config(n, seed=1).positions
        t_np = best_of(lambda: pair_sums(X, 1.0, a, b, "numpy"), args.repeat)
        if HAVE_NUMBA:
            t_nb = best_of(lambda: pair_sums(X, 1.0, a, b, "numba"), args.repeat)
            g1 = pair_sums(X, 1.0, a, b, "numpy")[1]
            g2 = pair_sums(X, 1.0, a, b, "numba")[1]
            diff = float(np.max(np.abs(g1 - g2)))
            print(f"{n:>6} {1e3 * t_np:>12.2f} {1e3 * t_nb:>12.2f} {t_np / t_nb:>8.1f} {diff:>11.2e}")
        else:
            print(f"{n:>6} {1e3 * t_np:>12.2f} {'-':>12} {'-':>8} {'-':>11}")


if __name__ == "__main__":
    main()
