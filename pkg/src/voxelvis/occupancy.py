"""Temporal fusion of per-sweep visibility via clamped log-odds filtering.

Each sweep contributes at most one update per voxel: occupied cells add the
hit log-odds, free cells add the miss log-odds, unknown cells leave the
posterior untouched.  Values are clamped after every sweep, matching the
online-mapping convention, so saturated cells can recover quickly when the
scene changes.  A 4D space-time volume is never materialized; fusion is
strictly streaming, one sweep resident at a time.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridConfig
from .io import Pose, Sweep, motion_compensate
from .raycast import FREE, OCCUPIED, VisibilityVolume, compute_visibility

# Octomap's stock sensor-model parameters: p_hit = 0.7, p_miss = 0.4,
# posterior clamped into [0.12, 0.97].
DEFAULT_P_HIT = 0.7
DEFAULT_P_MISS = 0.4
DEFAULT_CLAMP_MIN = math.log(0.12 / 0.88)
DEFAULT_CLAMP_MAX = math.log(0.97 / 0.03)


def logodds(p: float) -> float:
    return math.log(p / (1.0 - p))


@dataclass(frozen=True)
class OccupancyParams:
    p_hit: float = DEFAULT_P_HIT
    p_miss: float = DEFAULT_P_MISS
    clamp_min: float = DEFAULT_CLAMP_MIN
    clamp_max: float = DEFAULT_CLAMP_MAX

    def __post_init__(self):
        if not (0.0 < self.p_miss < 0.5 < self.p_hit < 1.0):
            raise ValueError(
                f"need p_hit > 0.5 > p_miss within (0, 1); got "
                f"p_hit={self.p_hit}, p_miss={self.p_miss}"
            )
        if not (self.clamp_min < 0.0 < self.clamp_max):
            raise ValueError(
                f"need clamp_min < 0 < clamp_max; got "
                f"[{self.clamp_min}, {self.clamp_max}]"
            )

    @property
    def logodds_hit(self) -> float:
        return logodds(self.p_hit)

    @property
    def logodds_miss(self) -> float:
        return logodds(self.p_miss)


@dataclass
class OccupancyGrid:
    """Dense clamped log-odds over the grid; 0 everywhere until updated."""

    config: GridConfig
    logodds: np.ndarray                  # (nx, ny, nz) float64
    params: OccupancyParams = field(default_factory=OccupancyParams)

    @classmethod
    def fresh(cls, config: GridConfig,
              params: OccupancyParams | None = None) -> "OccupancyGrid":
        return cls(config, np.zeros(config.dims, dtype=np.float64),
                   params or OccupancyParams())

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.config, self.logodds.copy(), self.params)


def update_with_sweep(grid: OccupancyGrid, vis: VisibilityVolume) -> OccupancyGrid:
    """Fold one sweep's visibility into the grid (in place) and return it."""
    if vis.config != grid.config:
        raise ValueError("visibility volume and occupancy grid configs differ")
    lo = grid.logodds
    p = grid.params
    lo[vis.states == OCCUPIED] += p.logodds_hit
    lo[vis.states == FREE] += p.logodds_miss
    np.clip(lo, p.clamp_min, p.clamp_max, out=lo)
    return grid


def posterior(grid: OccupancyGrid) -> np.ndarray:
    """Per-voxel occupancy probability 1/(1 + exp(-logodds))."""
    return 1.0 / (1.0 + np.exp(-grid.logodds))


def build_temporal_occupancy(sweeps: list[Sweep], poses: list[Pose],
                             config: GridConfig,
                             params: OccupancyParams | None = None,
                             workers: int | None = None) -> OccupancyGrid:
    """Fuse timestamp-ordered sweeps into one posterior grid.

    The final sweep defines the reference frame; each sweep is rigidly
    mapped into it (with its own transformed sensor origin) before its
    visibility is computed and folded in order.
    """
    if not sweeps:
        raise ValueError("need at least one sweep")
    if len(sweeps) != len(poses):
        raise ValueError(f"{len(sweeps)} sweeps but {len(poses)} poses")
    stamps = [s.timestamp for s in sweeps]
    if any(b < a for a, b in zip(stamps, stamps[1:])):
        raise ValueError(f"sweep timestamps must be non-decreasing, got {stamps}")
    grid = OccupancyGrid.fresh(config, params)
    pose_ref = poses[-1]
    t_ref = sweeps[-1].timestamp
    for sweep, pose in zip(sweeps, poses):
        compensated = motion_compensate(sweep, pose, pose_ref, t_ref)
        vis = compute_visibility(compensated, config, workers)
        update_with_sweep(grid, vis)
    return grid
