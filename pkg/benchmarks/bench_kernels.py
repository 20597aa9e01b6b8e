"""Benchmark the Hough vote-accumulation kernels: compiled vs NumPy.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats N]

Also verifies that both implementations produce identical accumulators on
the benchmark inputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from irisauth import _voting_np

try:
    from irisauth import _voting_cy
except ImportError:
    _voting_cy = None


def timed(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def bench(name, args, repeats):
    np_fn = getattr(_voting_np, name)
    out_np, t_np = timed(np_fn, args, repeats)
    print(f"{name:16s} numpy    {t_np * 1e3:8.2f} ms")
    if _voting_cy is None:
        print(f"{name:16s} compiled     (extension not built)")
        return
    out_cy, t_cy = timed(getattr(_voting_cy, name), args, repeats)
    same = np.array_equal(out_np, out_cy)
    print(f"{name:16s} compiled {t_cy * 1e3:8.2f} ms   "
          f"speedup {t_np / t_cy:5.1f}x   identical={same}")
    if not same:
        raise SystemExit(f"{name}: compiled and NumPy accumulators differ")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--points", type=int, default=4000,
                    help="number of edge points to vote")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    # edge offsets typical of a 352x288 eye with pupil radius ~40
    r = 40.0
    theta = rng.uniform(0, 2 * np.pi, args.points)
    rad = rng.uniform(1.2 * r, 2.4 * r, args.points)
    dx = np.ascontiguousarray(rad * np.cos(theta))
    dy = np.ascontiguousarray(rad * np.sin(theta))
    bench("ellipse_votes", (dx, dy, 1.2 * r, 2.4 * r, 1.0), args.repeats)

    rdist = np.ascontiguousarray(np.hypot(dx, dy))
    phi = np.ascontiguousarray(np.arctan2(dy, dx))
    theta_v = np.ascontiguousarray(
        -np.pi / 2 + np.radians(np.arange(-14, 15, 2, dtype=np.float64)))
    bench("parabola_votes", (rdist, phi, theta_v, 2 * r, 8 * r, 2.0),
          args.repeats)


if __name__ == "__main__":
    main()
