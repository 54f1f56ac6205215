"""Visibility-consistent insertion of virtual objects into a scene sweep.

Three modes:

  naive     paste every object point, visibility be damned.
  culling   pre-occupy scene voxels; drop virtual points whose sensor ray is
            blocked before its endpoint, and whole objects whose occluded
            fraction exceeds the drop fraction.
  drilling  pre-occupy virtual-object voxels; drop scene points whose sensor
            ray is blocked before its endpoint.

Blocking masks are always built from the other population, so an object's
own voxels never occlude its sibling points.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .grid import GridConfig, voxelize_points
from .io import Sweep, read_sweep, write_sweep
from .raycast import occlusion_keep_mask

MODES = ("naive", "culling", "drilling")

BOX_INFLATION = 0.5  # meters of slack around the object box


@dataclass(frozen=True)
class OrientedBox:
    """Axis-aligned box rotated by yaw about +z through its center."""

    center: np.ndarray   # (3,)
    size: np.ndarray     # (3,) full extents
    yaw: float           # radians

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64).reshape(3)
        size = np.asarray(self.size, dtype=np.float64).reshape(3)
        if not (np.isfinite(center).all() and np.isfinite(size).all()
                and math.isfinite(self.yaw)):
            raise ValueError("box center/size/yaw must be finite")
        if (size <= 0).any():
            raise ValueError(f"box size must be positive, got {size}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "size", size)

    def contains(self, points: np.ndarray, slack: float = 0.0) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)[:, :3] - self.center
        c, s = math.cos(-self.yaw), math.sin(-self.yaw)
        local = pts.copy()
        local[:, 0] = c * pts[:, 0] - s * pts[:, 1]
        local[:, 1] = s * pts[:, 0] + c * pts[:, 1]
        half = self.size / 2.0 + slack
        return (np.abs(local) <= half).all(axis=1)


@dataclass(frozen=True)
class VirtualObject:
    """Labeled point cluster, already in the target scene frame."""

    label: str
    points: np.ndarray   # (M, 3)
    box: OrientedBox

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] < 3 or len(pts) == 0:
            raise ValueError(f"object points must be a non-empty (M, >=3) array, got {pts.shape}")
        pts = np.ascontiguousarray(pts[:, :3])
        if not np.isfinite(pts).all():
            raise ValueError("object points must be finite")
        if not self.box.contains(pts, slack=BOX_INFLATION).all():
            raise ValueError(
                f"object {self.label!r} has points outside its box inflated by {BOX_INFLATION} m"
            )
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class AugmentReport:
    mode: str
    object_labels: list[str] = field(default_factory=list)
    object_points: list[int] = field(default_factory=list)
    object_kept: list[int] = field(default_factory=list)
    objects_dropped: list[int] = field(default_factory=list)
    scene_points_removed: int = 0

    def to_text(self) -> str:
        lines = [f"mode={self.mode}", f"objects={len(self.object_labels)}"]
        for idx, label in enumerate(self.object_labels):
            lines.append(f"object_{idx}_label={label}")
            lines.append(f"object_{idx}_points={self.object_points[idx]}")
            lines.append(f"object_{idx}_kept={self.object_kept[idx]}")
        lines.append("objects_dropped=" + ",".join(str(i) for i in self.objects_dropped))
        lines.append(f"scene_points_removed={self.scene_points_removed}")
        return "\n".join(lines) + "\n"


def _object_rows(obj: VirtualObject) -> np.ndarray:
    # inserted points carry the scene's reference timestamp (relative t = 0)
    return np.column_stack([obj.points, np.zeros(len(obj))])


def _occupied_mask(points: np.ndarray, config: GridConfig) -> np.ndarray:
    mask = np.zeros(config.dims, dtype=np.uint8)
    if len(points):
        idx, in_grid = voxelize_points(points, config)
        idx = idx[in_grid]
        mask[idx[:, 0], idx[:, 1], idx[:, 2]] = 1
    return mask


def insert_naive(scene: Sweep, objects: list[VirtualObject]) -> Sweep:
    """Paste all object points into the scene, keeping every scene point."""
    rows = [scene.points] + [_object_rows(o) for o in objects]
    return Sweep(scene.sensor_origin, scene.timestamp, np.vstack(rows))


def cull(scene: Sweep, objects: list[VirtualObject], config: GridConfig,
         drop_fraction: float = 0.5,
         workers: int | None = None) -> tuple[Sweep, AugmentReport]:
    """Remove virtual points occluded by the scene.

    A virtual point is dropped when its sensor ray enters a scene-occupied
    voxel strictly before the point's own voxel; a whole object is dropped
    when its occluded fraction exceeds ``drop_fraction``.
    """
    if not (0.0 <= drop_fraction <= 1.0):
        raise ValueError(f"drop_fraction must be in [0, 1], got {drop_fraction}")
    report = AugmentReport(mode="culling")
    blocked = _occupied_mask(scene.points, config)
    rows = [scene.points]
    for idx, obj in enumerate(objects):
        keep = occlusion_keep_mask(obj.points, scene.sensor_origin, blocked,
                                   config, workers)
        occluded_fraction = 1.0 - keep.sum() / len(obj)
        report.object_labels.append(obj.label)
        report.object_points.append(len(obj))
        if occluded_fraction > drop_fraction:
            report.objects_dropped.append(idx)
            report.object_kept.append(0)
        else:
            report.object_kept.append(int(keep.sum()))
            rows.append(_object_rows(obj)[keep])
    out = Sweep(scene.sensor_origin, scene.timestamp, np.vstack(rows))
    return out, report


def drill(scene: Sweep, objects: list[VirtualObject], config: GridConfig,
          workers: int | None = None) -> tuple[Sweep, AugmentReport]:
    """Remove scene points whose sensor ray crosses a virtual-object voxel
    strictly before the point's own voxel; all virtual points are kept."""
    report = AugmentReport(mode="drilling")
    if objects:
        virtual = np.vstack([o.points for o in objects])
        blocked = _occupied_mask(virtual, config)
        keep = occlusion_keep_mask(scene.points, scene.sensor_origin, blocked,
                                   config, workers)
    else:
        keep = np.ones(len(scene.points), dtype=bool)
    report.scene_points_removed = int((~keep).sum())
    rows = [scene.points[keep]] + [_object_rows(o) for o in objects]
    for obj in objects:
        report.object_labels.append(obj.label)
        report.object_points.append(len(obj))
        report.object_kept.append(len(obj))
    out = Sweep(scene.sensor_origin, scene.timestamp, np.vstack(rows))
    return out, report


def augment_scene(scene: Sweep, objects: list[VirtualObject], mode: str,
                  config: GridConfig, drop_fraction: float = 0.5,
                  workers: int | None = None) -> tuple[Sweep, AugmentReport]:
    """Mode dispatcher used by the CLI and bindings."""
    if mode == "naive":
        out = insert_naive(scene, objects)
        report = AugmentReport(
            mode="naive",
            object_labels=[o.label for o in objects],
            object_points=[len(o) for o in objects],
            object_kept=[len(o) for o in objects],
        )
        return out, report
    if mode == "culling":
        return cull(scene, objects, config, drop_fraction, workers)
    if mode == "drilling":
        return drill(scene, objects, config, workers)
    raise ValueError(f"unknown augmentation mode {mode!r}; choices: {', '.join(MODES)}")


# ---------------------------------------------------------------------------
# object files: VSWP points plus a "<file>.meta" text sidecar


def write_virtual_object(obj: VirtualObject, path) -> None:
    path = Path(path)
    write_sweep(Sweep(np.zeros(3), 0.0, _object_rows(obj)), path)
    c, s = obj.box.center, obj.box.size
    meta = (
        f"label={obj.label}\n"
        f"center={float(c[0])!r} {float(c[1])!r} {float(c[2])!r}\n"
        f"size={float(s[0])!r} {float(s[1])!r} {float(s[2])!r}\n"
        f"yaw={float(obj.box.yaw)!r}\n"
    )
    Path(f"{path}.meta").write_text(meta)


def read_virtual_object(path) -> VirtualObject:
    path = Path(path)
    meta_path = Path(f"{path}.meta")
    if not meta_path.exists():
        raise ParseError(f"{path}: missing object sidecar {meta_path}")
    fields = {}
    for lineno, line in enumerate(meta_path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{meta_path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    missing = {"label", "center", "size", "yaw"} - fields.keys()
    if missing:
        raise ParseError(f"{meta_path}: missing keys {sorted(missing)}")
    try:
        center = [float(v) for v in fields["center"].split()]
        size = [float(v) for v in fields["size"].split()]
        yaw = float(fields["yaw"])
    except ValueError as exc:
        raise ParseError(f"{meta_path}: {exc}") from exc
    if len(center) != 3 or len(size) != 3:
        raise ParseError(f"{meta_path}: center and size need exactly 3 values")
    sweep = read_sweep(path)
    try:
        return VirtualObject(fields["label"], sweep.points[:, :3],
                             OrientedBox(np.array(center), np.array(size), yaw))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
