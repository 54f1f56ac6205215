"""Benchmark harness: synthetic 32-beam sweeps and visibility timing."""

import time
from dataclasses import dataclass

import numpy as np

from .grid import GridConfig
from .io import Sweep
from .raycast import compute_visibility, default_workers

N_BEAMS = 32
ELEVATION_RANGE_DEG = (-30.0, 10.0)
RANGE_BOUNDS_M = (2.0, 70.0)


def synthetic_sweep(n_points: int, seed: int = 0,
                    origin=(0.0, 0.0, 0.0)) -> Sweep:
    """Spinning-LiDAR stand-in: n_points on 32 elevation rings.

    Elevations are uniform over [-30, +10] degrees, azimuths advance by
    360/(n/32) degrees per ring step, and ranges draw uniformly from
    [2, 70] m with the given seed.
    """
    if n_points < 0:
        raise ValueError(f"n_points must be >= 0, got {n_points}")
    origin = np.asarray(origin, dtype=np.float64)
    if n_points == 0:
        return Sweep(origin, 0.0, np.zeros((0, 4)))
    rng = np.random.default_rng(seed)
    idx = np.arange(n_points)
    elevations = np.deg2rad(np.linspace(*ELEVATION_RANGE_DEG, N_BEAMS))[idx % N_BEAMS]
    azimuth_step = 2.0 * np.pi / (n_points / N_BEAMS)
    azimuths = (idx // N_BEAMS) * azimuth_step
    ranges = rng.uniform(*RANGE_BOUNDS_M, size=n_points)
    cos_el = np.cos(elevations)
    dirs = np.column_stack([
        cos_el * np.cos(azimuths),
        cos_el * np.sin(azimuths),
        np.sin(elevations),
    ])
    pts = origin + ranges[:, None] * dirs
    return Sweep(origin, 0.0, np.column_stack([pts, np.zeros(n_points)]))


@dataclass(frozen=True)
class BenchResult:
    points: int
    iters: int
    workers: int
    impl: str
    mean_ms: float
    std_ms: float
    min_ms: float

    def summary_line(self) -> str:
        return (f"points={self.points} iters={self.iters} "
                f"workers={self.workers} impl={self.impl} "
                f"mean_ms={self.mean_ms:.3f} std_ms={self.std_ms:.3f} "
                f"min_ms={self.min_ms:.3f}")


def run_bench(n_points: int = 30_000, iters: int = 50,
              config: GridConfig | None = None,
              workers: int | None = None, seed: int = 0,
              impl: str | None = None) -> BenchResult:
    """Time compute_visibility over a synthetic sweep, excluding generation."""
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    config = config or GridConfig()
    workers = workers or default_workers()
    sweep = synthetic_sweep(n_points, seed)
    from . import kernels
    impl_name = kernels.BACKEND if impl in (None, "auto") else impl
    samples_ms = []
    for _ in range(iters):
        start = time.perf_counter()
        compute_visibility(sweep, config, workers, impl=impl_name)
        samples_ms.append((time.perf_counter() - start) * 1e3)
    arr = np.asarray(samples_ms)
    return BenchResult(n_points, iters, workers, impl_name,
                       float(arr.mean()), float(arr.std()), float(arr.min()))
