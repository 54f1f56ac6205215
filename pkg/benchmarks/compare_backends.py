#!/usr/bin/env python3
"""Compare the compiled kernel extension against the pure-Python fallback.

The python back end walks one voxel per interpreter iteration, so it runs
with a smaller default workload; per-ray microseconds are the comparable
number.  Usage:

    python benchmarks/compare_backends.py [--points N] [--iters K] [--workers W]
"""

import argparse

from voxelvis import GridConfig, kernels, run_bench
from voxelvis.raycast import default_workers


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=30_000,
                        help="rays per sweep for the compiled back end")
    parser.add_argument("--python-points", type=int, default=2_000,
                        help="rays per sweep for the python back end")
    parser.add_argument("--iters", type=int, default=20)
    parser.add_argument("--python-iters", type=int, default=3)
    parser.add_argument("--workers", type=int, default=default_workers())
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    config = GridConfig()
    rows = []
    plan = [("python", args.python_points, args.python_iters)]
    if "compiled" in kernels.available():
        plan.insert(0, ("compiled", args.points, args.iters))
    else:
        print("note: compiled extension unavailable, timing python only")
    for impl, points, iters in plan:
        result = run_bench(points, iters, config, args.workers, args.seed, impl)
        rows.append(result)
        print(result.summary_line())

    if len(rows) == 2:
        fast, slow = rows
        per_ray_fast = fast.mean_ms * 1e3 / fast.points
        per_ray_slow = slow.mean_ms * 1e3 / slow.points
        print(f"per_ray_us compiled={per_ray_fast:.3f} python={per_ray_slow:.3f} "
              f"speedup={per_ray_slow / per_ray_fast:.0f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
