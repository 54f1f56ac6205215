"""Array-call bindings to the voxelvis engine for dataloader pre-processing.

Three functions move dense numpy arrays in and out of the engine with one
marshaling step each way, so ML pipelines can compute visibility volumes,
visibility-consistent augmentation, and temporal occupancy while batching.
The engine's compiled kernels release the GIL for the duration of the
native computation, so concurrent calls from interpreter threads overlap.

Point arrays follow the sweep record layout: (N, 4) float32 rows of
(x, y, z, t).  Configs are plain mappings with the engine's config-file keys
(all optional).  Outputs are byte-identical to the engine CLI's VVOL / VSWP /
OVOL payloads for identical inputs.
"""

import numpy as np

import voxelvis
from voxelvis import Pose, Sweep, augment_scene, build_temporal_occupancy
from voxelvis.config import config_from_mapping
from voxelvis.augment import OrientedBox, VirtualObject
from voxelvis.raycast import compute_visibility

__version__ = voxelvis.__version__

__all__ = ["py_compute_visibility", "py_augment", "py_temporal_occupancy",
           "__version__"]

_MODES = ("naive", "culling", "drilling")


def _check_points(arr, name: str) -> np.ndarray:
    pts = np.asarray(arr)
    if pts.ndim != 2 or pts.shape[1] != 4:
        raise ValueError(f"{name}: expected an (N, 4) array of (x, y, z, t), "
                         f"got shape {pts.shape}")
    if not np.issubdtype(pts.dtype, np.floating):
        raise ValueError(f"{name}: expected a float array, got dtype {pts.dtype}")
    return np.ascontiguousarray(pts, dtype=np.float64)


def _check_origin(origin, name: str = "origin") -> np.ndarray:
    o = np.asarray(origin, dtype=np.float64)
    if o.shape != (3,):
        raise ValueError(f"{name}: expected 3 values, got shape {o.shape}")
    return o


def _engine_config(config):
    try:
        return config_from_mapping(dict(config or {}))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"config: {exc}") from exc


def py_compute_visibility(points, origin, config=None, workers: int = 1) -> np.ndarray:
    """Ternary visibility states for one sweep.

    Returns a (nx, ny, nz) uint8 array of {0 unknown, 1 free, 2 occupied};
    its buffer equals the engine's VVOL payload for the same sweep.
    """
    pts = _check_points(points, "points")
    o = _check_origin(origin)
    cfg = _engine_config(config)
    if int(workers) < 1:
        raise ValueError(f"workers: must be >= 1, got {workers}")
    vol = compute_visibility(Sweep(o, 0.0, pts), cfg.grid, int(workers))
    return vol.states


def _fitted_object(pts: np.ndarray, index: int) -> VirtualObject:
    xyz = pts[:, :3]
    lo = xyz.min(axis=0)
    hi = xyz.max(axis=0)
    size = np.maximum(hi - lo, 1e-3)
    return VirtualObject(f"object_{index}", xyz,
                         OrientedBox((lo + hi) / 2.0, size, 0.0))


def py_augment(scene_points, object_points_list, mode: str,
               config=None) -> tuple[np.ndarray, dict]:
    """Insert virtual objects into a scene under naive/culling/drilling.

    Returns (points, report): an (M, 4) float32 array matching the engine's
    augmented VSWP payload, and a report mapping mirroring the CLI report.
    """
    scene = _check_points(scene_points, "scene_points")
    if mode not in _MODES:
        raise ValueError(f"mode: unknown mode {mode!r}; choices: {', '.join(_MODES)}")
    objects = []
    for idx, obj_pts in enumerate(object_points_list):
        arr = _check_points(obj_pts, f"object_points_list[{idx}]")
        if len(arr) == 0:
            raise ValueError(f"object_points_list[{idx}]: object has no points")
        objects.append(_fitted_object(arr, idx))
    cfg = _engine_config(config)
    out, report = augment_scene(Sweep(np.zeros(3), 0.0, scene), objects, mode,
                                cfg.grid, cfg.cull_drop_fraction)
    report_map = {
        "mode": report.mode,
        "object_labels": list(report.object_labels),
        "object_points": list(report.object_points),
        "object_kept": list(report.object_kept),
        "objects_dropped": list(report.objects_dropped),
        "scene_points_removed": report.scene_points_removed,
    }
    return out.points.astype(np.float32), report_map


def py_temporal_occupancy(sweeps, config=None) -> np.ndarray:
    """Fuse (points, origin, timestamp) tuples into clamped log-odds.

    Sweeps must already be in a common frame (identity poses everywhere);
    returns a (nx, ny, nz) float32 array equal to the engine's OVOL payload.
    """
    if not sweeps:
        raise ValueError("sweeps: need at least one (points, origin, timestamp) tuple")
    parsed = []
    for idx, (points, origin, timestamp) in enumerate(sweeps):
        pts = _check_points(points, f"sweeps[{idx}].points")
        o = _check_origin(origin, f"sweeps[{idx}].origin")
        parsed.append(Sweep(o, float(timestamp), pts))
    cfg = _engine_config(config)
    grid = build_temporal_occupancy(parsed, [Pose() for _ in parsed],
                                    cfg.grid, cfg.occupancy)
    return grid.logodds.astype(np.float32)
