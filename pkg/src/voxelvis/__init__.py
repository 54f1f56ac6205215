"""voxelvis: LiDAR visibility raycasting over a voxel grid.

Recreates per-sweep sensor visibility (occupied / free / unknown) with fast
voxel traversal, fuses sweeps into a Bayesian occupancy grid, performs
visibility-consistent virtual-object augmentation, and exports multi-channel
bird's-eye-view maps.
"""

__version__ = "0.1.0"

from .augment import (AugmentReport, OrientedBox, VirtualObject, augment_scene,
                      cull, drill, insert_naive, read_virtual_object,
                      write_virtual_object)
from .bench import BenchResult, run_bench, synthetic_sweep
from .bev import (BevMap, bev_slice_render, decode_bev_states,
                  occupancy_to_bev, visibility_to_bev)
from .config import EngineConfig, config_from_mapping, load_config
from .errors import ConfigError, ParseError
from .grid import GridConfig, grid_dims, linear_index, voxel_center, world_to_voxel
from .io import (Pose, Sweep, aggregate_sweeps, motion_compensate, read_poses,
                 read_sweep, write_sweep)
from .kernels import BACKEND
from .occupancy import (OccupancyGrid, OccupancyParams,
                        build_temporal_occupancy, posterior, update_with_sweep)
from .raycast import (FREE, OCCUPIED, UNKNOWN, RayTrace, VisibilityVolume,
                      compute_visibility, traverse_ray,
                      traverse_until_preoccupied)

__all__ = [
    "__version__", "BACKEND",
    "GridConfig", "grid_dims", "world_to_voxel", "voxel_center", "linear_index",
    "EngineConfig", "load_config", "config_from_mapping",
    "ConfigError", "ParseError",
    "Sweep", "Pose", "read_sweep", "write_sweep", "read_poses",
    "motion_compensate", "aggregate_sweeps",
    "UNKNOWN", "FREE", "OCCUPIED",
    "RayTrace", "VisibilityVolume", "traverse_ray",
    "traverse_until_preoccupied", "compute_visibility",
    "OccupancyParams", "OccupancyGrid", "update_with_sweep", "posterior",
    "build_temporal_occupancy",
    "OrientedBox", "VirtualObject", "AugmentReport", "insert_naive", "cull",
    "drill", "augment_scene", "read_virtual_object", "write_virtual_object",
    "BevMap", "visibility_to_bev", "occupancy_to_bev", "decode_bev_states",
    "bev_slice_render",
    "synthetic_sweep", "run_bench", "BenchResult",
]
