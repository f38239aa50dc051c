"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from stabpath import _kernels_py
from stabpath.kernels import BACKEND

try:
    from stabpath import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(rng):
    n = 20000
    # a consistent track, so the whole grid is unwrapped
    theta = np.cumsum(np.concatenate([[0.0], rng.uniform(-1, 1, n - 1)]))
    d_im = np.zeros(n - 1)
    arg_w = np.angle(np.exp(1j * theta))
    arg_mid = np.angle(np.exp(0.5j * (theta[:-1] + theta[1:])))
    out = np.empty(n - 1)
    psi_i = rng.uniform(0, 5, 200)
    psi_j = rng.uniform(0, 5, 200)
    pa = rng.uniform(-2, 2, 60)
    pb = pa + rng.normal(0, 0.1, 60)
    return {
        "unwrap_increments": lambda m: m.unwrap_increments(arg_w, arg_mid, d_im, out),
        "shift_gap": lambda m: m.shift_gap(psi_i, psi_j, 2.0, 1e-3),
        "slice_distance": lambda m: m.slice_distance(pa, pb, 3),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"active backend: {BACKEND}")
    print(f"{'kernel':<20}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for name, fn in cases(rng).items():
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:<20}{tp:>14.3f}{'n/a':>14}{'':>10}")
            continue
        tc = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<20}{tp:>14.3f}{tc:>14.3f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
