"""Time the numba and pure-numpy filter-bank paths.

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 5]

Reports the best-of-N wall time of the row kernels and of a full
forward + inverse transform for every kind, on each path.
"""

import argparse
import os
import time

import numpy as np

from oversparse import _accel, forward, inverse
from oversparse.filters import builtin_filters
from oversparse.transforms import TransformKind


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run_path(no_numba, size, repeat):
    os.environ["OVERSPARSE_NO_NUMBA"] = "1" if no_numba else "0"
    rng = np.random.default_rng(0)
    x = rng.standard_normal((size, size))
    bank = builtin_filters(TransformKind.DD_DT_REAL).bank(2, "a")
    y = _accel.analysis_rows(x, bank)  # also triggers JIT compilation
    _accel.synthesis_rows(y, bank, size)
    out = {
        "analysis_rows": best_of(lambda: _accel.analysis_rows(x, bank), repeat),
        "synthesis_rows": best_of(lambda: _accel.synthesis_rows(y, bank, size), repeat),
    }
    for kind in TransformKind:
        inverse(forward(x, kind, 3))
        out[f"roundtrip {kind.value}"] = best_of(lambda: inverse(forward(x, kind, 3)), repeat)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _accel.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")
    fast = run_path(False, args.size, args.repeat)
    slow = run_path(True, args.size, args.repeat)
    print(f"{'case':28s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for case in fast:
        print(f"{case:28s} {fast[case] * 1e3:10.2f} {slow[case] * 1e3:10.2f} "
              f"{slow[case] / fast[case]:8.2f}")


if __name__ == "__main__":
    main()
