"""Voxel grid geometry: extents, world<->voxel transforms, linear indexing.

Every other module discretizes through this one.  Voxels are cubic,
intervals are half-open per axis ([min, min+voxel_size) owns the cell), and
the linear layout is k-major within (i, j) row-major so a BEV pixel's
z-column is contiguous.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

VoxelIndex = tuple[int, int, int]

# NuScenes-style defaults: 100 m x 100 m x 8 m box at 0.25 m resolution.
DEFAULT_EXTENTS = (-50.0, 50.0, -50.0, 50.0, -5.0, 3.0)
DEFAULT_VOXEL_SIZE = 0.25

_SPAN_RTOL = 1e-9


def _axis_dim(lo: float, hi: float, voxel_size: float, axis: str) -> int:
    span = hi - lo
    if span <= 0:
        raise ConfigError(f"{axis}-extent must be positive, got [{lo}, {hi}]")
    n = span / voxel_size
    n_round = round(n)
    if n_round < 1 or abs(n - n_round) > _SPAN_RTOL * max(1.0, abs(n)):
        raise ConfigError(
            f"{axis}-span {span} is not an integer multiple of voxel_size {voxel_size}"
        )
    return int(n_round)


@dataclass(frozen=True)
class GridConfig:
    """Cubic-voxel grid over an axis-aligned box.

    Derived dims are validated at construction: each extent span must be an
    exact integer multiple of ``voxel_size`` (1e-9 relative tolerance).
    """

    x_min: float = DEFAULT_EXTENTS[0]
    x_max: float = DEFAULT_EXTENTS[1]
    y_min: float = DEFAULT_EXTENTS[2]
    y_max: float = DEFAULT_EXTENTS[3]
    z_min: float = DEFAULT_EXTENTS[4]
    z_max: float = DEFAULT_EXTENTS[5]
    voxel_size: float = DEFAULT_VOXEL_SIZE

    def __post_init__(self):
        if not all(
            np.isfinite(v)
            for v in (self.x_min, self.x_max, self.y_min, self.y_max,
                      self.z_min, self.z_max, self.voxel_size)
        ):
            raise ConfigError("grid extents and voxel_size must be finite")
        if self.voxel_size <= 0:
            raise ConfigError(f"voxel_size must be positive, got {self.voxel_size}")
        # Triggers span validation for all three axes.
        self.dims

    @property
    def nx(self) -> int:
        return _axis_dim(self.x_min, self.x_max, self.voxel_size, "x")

    @property
    def ny(self) -> int:
        return _axis_dim(self.y_min, self.y_max, self.voxel_size, "y")

    @property
    def nz(self) -> int:
        return _axis_dim(self.z_min, self.z_max, self.voxel_size, "z")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def n_voxels(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def mins(self) -> np.ndarray:
        return np.array([self.x_min, self.y_min, self.z_min], dtype=np.float64)

    @property
    def maxs(self) -> np.ndarray:
        return np.array([self.x_max, self.y_max, self.z_max], dtype=np.float64)


def grid_dims(config: GridConfig) -> tuple[int, int, int]:
    """Grid dimensions (nx, ny, nz); raises ConfigError on invalid extents."""
    return config.dims


def world_to_voxel(p, config: GridConfig) -> VoxelIndex | None:
    """Voxel index owning point ``p``, or None when outside the half-open box."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    if not (config.x_min <= x < config.x_max
            and config.y_min <= y < config.y_max
            and config.z_min <= z < config.z_max):
        return None
    h = config.voxel_size
    nx, ny, nz = config.dims
    # floor arithmetic can land exactly on the upper dim for points one ulp
    # below max; clamp keeps the index in range without moving interior points
    i = min(int(np.floor((x - config.x_min) / h)), nx - 1)
    j = min(int(np.floor((y - config.y_min) / h)), ny - 1)
    k = min(int(np.floor((z - config.z_min) / h)), nz - 1)
    return (i, j, k)


def voxel_center(v: VoxelIndex, config: GridConfig) -> tuple[float, float, float]:
    """World coordinates of the center of voxel ``v``."""
    i, j, k = v
    nx, ny, nz = config.dims
    if not (0 <= i < nx and 0 <= j < ny and 0 <= k < nz):
        raise ValueError(f"voxel index {v} out of range for dims {(nx, ny, nz)}")
    h = config.voxel_size
    return (
        config.x_min + (i + 0.5) * h,
        config.y_min + (j + 0.5) * h,
        config.z_min + (k + 0.5) * h,
    )


def linear_index(v: VoxelIndex, config: GridConfig) -> int:
    """Flat offset of voxel ``v``: (i*ny + j)*nz + k."""
    _, ny, nz = config.dims
    i, j, k = v
    return (i * ny + j) * nz + k


def voxelize_points(points: np.ndarray, config: GridConfig) -> tuple[np.ndarray, np.ndarray]:
    """Map an (N, >=3) point array to voxel indices.

    Returns (indices, in_grid): ``indices`` is (N, 3) int64, valid only where
    ``in_grid`` is True.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] < 3:
        raise ValueError(f"expected (N, >=3) point array, got shape {pts.shape}")
    xyz = pts[:, :3]
    mins = config.mins
    maxs = config.maxs
    in_grid = np.all((xyz >= mins) & (xyz < maxs), axis=1)
    idx = np.floor((xyz - mins) / config.voxel_size).astype(np.int64)
    np.minimum(idx, np.array(config.dims, dtype=np.int64) - 1, out=idx)
    np.maximum(idx, 0, out=idx)
    return idx, in_grid
