"""Per-sweep visibility through voxel raycasting.

A ray is cast from the sensor origin to every return; voxels crossed on the
way are freespace, the voxel enclosing an in-grid return is occupied, and
everything untouched stays unknown.  Aggregation across the sweep updates
each voxel at most once, occupied winning over free, which makes the result
independent of ray order and worker count.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import GridConfig, VoxelIndex, world_to_voxel
from .io import Sweep

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

_NO_MASK = np.zeros(0, dtype=np.uint8)


@dataclass(frozen=True)
class RayTrace:
    """Ordered voxel visit record for one ray."""

    visited: np.ndarray                 # (n, 3) int32, entry order
    reached_endpoint: bool
    endpoint_voxel: VoxelIndex | None   # None when the endpoint is off-grid


@dataclass(frozen=True)
class VisibilityVolume:
    """Dense ternary visibility states for one sweep."""

    config: GridConfig
    states: np.ndarray                  # (nx, ny, nz) uint8 of {0, 1, 2}
    skipped_degenerate: int = 0

    def census(self) -> tuple[int, int, int]:
        """(unknown, free, occupied) cell counts; always sums to nx*ny*nz."""
        counts = np.bincount(self.states.ravel(), minlength=3)
        return int(counts[0]), int(counts[1]), int(counts[2])

    @classmethod
    def empty(cls, config: GridConfig) -> "VisibilityVolume":
        return cls(config, np.zeros(config.dims, dtype=np.uint8))


def _geom(config: GridConfig) -> tuple:
    nx, ny, nz = config.dims
    return (config.x_min, config.y_min, config.z_min, config.voxel_size,
            nx, ny, nz)


def _as_point(p) -> tuple[float, float, float]:
    return float(p[0]), float(p[1]), float(p[2])


def _flat_mask(blocked, config: GridConfig) -> np.ndarray:
    mask = np.asarray(blocked)
    if mask.shape != config.dims:
        raise ValueError(f"blocked mask shape {mask.shape} != grid dims {config.dims}")
    return np.ascontiguousarray(mask, dtype=np.uint8).ravel()


def _run_traverse(origin, endpoint, config, mask, impl) -> RayTrace:
    kern = kernels.resolve(impl)
    nx, ny, nz = config.dims
    buf = np.empty((nx + ny + nz + 3, 3), dtype=np.int32)
    ox, oy, oz = _as_point(origin)
    ex, ey, ez = _as_point(endpoint)
    n, reached, _, status = kern.traverse(ox, oy, oz, ex, ey, ez,
                                          *_geom(config), mask, buf)
    if status == 2:
        raise ValueError("degenerate ray: origin and endpoint coincide within 1e-12 m")
    return RayTrace(buf[:n].copy(), reached, world_to_voxel(endpoint, config))


def traverse_ray(origin, endpoint, config: GridConfig, *,
                 impl: str | None = None) -> RayTrace:
    """Voxels crossed by the segment origin->endpoint, clipped to the grid.

    Visits are in travel order; consecutive entries share a face (boundary
    corners are crossed as separate x-then-y-then-z single-axis steps).
    """
    return _run_traverse(origin, endpoint, config, _NO_MASK, impl)


def traverse_until_preoccupied(origin, endpoint, blocked, config: GridConfig,
                               *, impl: str | None = None) -> RayTrace:
    """Like traverse_ray but stops on entering a blocked voxel before the
    endpoint voxel; the endpoint's own voxel never blocks its own ray."""
    return _run_traverse(origin, endpoint, config,
                         _flat_mask(blocked, config), impl)


def default_workers() -> int:
    return os.cpu_count() or 1


def compute_visibility(sweep: Sweep, config: GridConfig,
                       workers: int | None = None, *,
                       impl: str | None = None) -> VisibilityVolume:
    """Raycast every sweep point and aggregate one ternary volume.

    Points outside the grid still carve freespace along their clipped rays.
    The output is cell-identical for any workers >= 1 and any permutation of
    the input points.
    """
    if workers is None:
        workers = default_workers()
    workers = int(workers)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    kern = kernels.resolve(impl)
    out = np.empty(config.n_voxels, dtype=np.uint8)
    ox, oy, oz = _as_point(sweep.sensor_origin)
    skipped = kern.visibility(sweep.points, ox, oy, oz, *_geom(config),
                              workers, out)
    return VisibilityVolume(config, out.reshape(config.dims), int(skipped))


def occlusion_keep_mask(points: np.ndarray, origin, blocked, config: GridConfig,
                        workers: int | None = None, *,
                        impl: str | None = None) -> np.ndarray:
    """Boolean per-point mask: True where the ray origin->point reaches its
    endpoint voxel without entering a blocked voxel first."""
    if workers is None:
        workers = default_workers()
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64)[:, :3])
    keep = np.ones(len(pts), dtype=np.uint8)
    if len(pts):
        kern = kernels.resolve(impl)
        ox, oy, oz = _as_point(origin)
        kern.blocked_filter(pts, ox, oy, oz, *_geom(config),
                            _flat_mask(blocked, config), keep, int(workers))
    return keep.astype(bool)
