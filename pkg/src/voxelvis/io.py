"""Sweep/pose ingestion, rigid motion compensation, and binary volume formats.

Formats (all little-endian):

  VSWP  magic "VSWP", u16 version, f64 origin xyz, f64 timestamp, u64 count,
        then count records of four f32 (x, y, z, t).  A whitespace-delimited
        text variant (one point per line, optional "# origin x y z" and
        "# timestamp t" header comments) is auto-detected by extension .txt.
  VVOL  magic "VVOL", u16 version, u32 nx ny nz, f64 x_min y_min z_min
        voxel_size, then nx*ny*nz state bytes in (i*ny + j)*nz + k order.
  OVOL  same header as VVOL with magic "OVOL", then f32 log-odds values.
  BEVF  magic "BEVF", u32 width height channels, then f32 values in
        (i, j, channel) order.

Pose files are text: one "timestamp tx ty tz qw qx qy qz" line per pose.
"""

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError
from .grid import GridConfig

FORMAT_VERSION = 1

_VSWP_MAGIC = b"VSWP"
_VVOL_MAGIC = b"VVOL"
_OVOL_MAGIC = b"OVOL"
_BEVF_MAGIC = b"BEVF"

_VSWP_HEADER = struct.Struct("<4sH3ddQ")
_VOL_HEADER = struct.Struct("<4sH3I4d")
_BEVF_HEADER = struct.Struct("<4s3I")


@dataclass(frozen=True)
class Sweep:
    """One LiDAR capture: sensor origin, absolute timestamp, (N, 4) points.

    Point columns are x, y, z in meters and t in seconds relative to the
    owning sweep (0 until motion compensation assigns it).  Points are held
    as float64 in memory; the VSWP payload stores float32.
    """

    sensor_origin: np.ndarray
    timestamp: float
    points: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.sensor_origin, dtype=np.float64).reshape(3)
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 4)
        if pts.ndim != 2 or pts.shape[1] not in (3, 4):
            raise ValueError(f"points must be (N, 3) or (N, 4), got {pts.shape}")
        if pts.shape[1] == 3:
            pts = np.column_stack([pts, np.zeros(len(pts))])
        if not np.isfinite(origin).all():
            raise ValueError("sensor_origin must be finite")
        if not np.isfinite(self.timestamp):
            raise ValueError("timestamp must be finite")
        if not np.isfinite(pts).all():
            bad = int(np.flatnonzero(~np.isfinite(pts).all(axis=1))[0])
            raise ValueError(f"non-finite coordinate in point record {bad}")
        object.__setattr__(self, "sensor_origin", origin)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Pose:
    """Rigid transform: translation (3,) plus unit quaternion (w, x, y, z)."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0, 0, 0]))

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        q = np.asarray(self.rotation, dtype=np.float64).reshape(4)
        norm = float(np.linalg.norm(q))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"quaternion norm {norm} deviates from 1 by more than 1e-6")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", q / norm)

    def inverse(self) -> "Pose":
        q_inv = _quat_conjugate(self.rotation)
        return Pose(-_quat_rotate(q_inv, self.translation[None, :])[0], q_inv)

    def compose(self, other: "Pose") -> "Pose":
        """self after other: (self * other)(p) = self(other(p))."""
        q = _quat_multiply(self.rotation, other.rotation)
        t = _quat_rotate(self.rotation, other.translation[None, :])[0] + self.translation
        return Pose(t, q)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return _quat_rotate(self.rotation, pts) + self.translation


def _quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def _quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def _quat_rotate(q: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Rotate (N, 3) points by unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    rot = np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
    return points @ rot.T


def motion_compensate(sweep: Sweep, pose_sweep: Pose, pose_ref: Pose,
                      t_ref: float) -> Sweep:
    """Map a sweep into the reference frame and stamp relative timestamps.

    Geometry goes through pose_ref^-1 o pose_sweep; every point's t becomes
    sweep.timestamp - t_ref (<= 0 for past sweeps).
    """
    relative = pose_ref.inverse().compose(pose_sweep)
    xyz = relative.apply(sweep.points[:, :3])
    t_rel = sweep.timestamp - t_ref
    pts = np.column_stack([xyz, np.full(len(xyz), t_rel)])
    origin = relative.apply(sweep.sensor_origin[None, :])[0]
    return Sweep(origin, sweep.timestamp, pts)


def aggregate_sweeps(sweeps: list[Sweep]) -> Sweep:
    """Concatenate already-compensated sweeps; the last one is the reference."""
    if not sweeps:
        raise ValueError("aggregate_sweeps needs at least one sweep")
    ref = sweeps[-1]
    pts = np.vstack([s.points for s in sweeps])
    return Sweep(ref.sensor_origin, ref.timestamp, pts)


# ---------------------------------------------------------------------------
# sweep files


def write_sweep(sweep: Sweep, path) -> None:
    path = Path(path)
    if path.suffix == ".txt":
        _write_sweep_text(sweep, path)
    else:
        _write_sweep_binary(sweep, path)


def read_sweep(path) -> Sweep:
    path = Path(path)
    if path.suffix == ".txt":
        return _read_sweep_text(path)
    return _read_sweep_binary(path)


def _write_sweep_binary(sweep: Sweep, path: Path) -> None:
    header = _VSWP_HEADER.pack(
        _VSWP_MAGIC, FORMAT_VERSION,
        sweep.sensor_origin[0], sweep.sensor_origin[1], sweep.sensor_origin[2],
        sweep.timestamp, len(sweep),
    )
    payload = np.ascontiguousarray(sweep.points, dtype="<f4")
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload.tobytes())


def _read_sweep_binary(path: Path) -> Sweep:
    raw = Path(path).read_bytes()
    if len(raw) < _VSWP_HEADER.size:
        raise ParseError(f"{path}: truncated sweep header", offset=len(raw))
    magic, version, ox, oy, oz, ts, count = _VSWP_HEADER.unpack_from(raw)
    if magic != _VSWP_MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}, expected {_VSWP_MAGIC!r}", offset=0)
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported sweep format version {version}", offset=4)
    expected = _VSWP_HEADER.size + count * 16
    if len(raw) < expected:
        raise ParseError(
            f"{path}: truncated payload, expected {expected} bytes got {len(raw)}",
            offset=len(raw),
        )
    pts = np.frombuffer(raw, dtype="<f4", count=count * 4,
                        offset=_VSWP_HEADER.size).reshape(count, 4)
    finite = np.isfinite(pts).all(axis=1)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise ParseError(
            f"{path}: non-finite coordinate in record {bad}",
            offset=_VSWP_HEADER.size + bad * 16,
        )
    if not (math.isfinite(ox) and math.isfinite(oy) and math.isfinite(oz)
            and math.isfinite(ts)):
        raise ParseError(f"{path}: non-finite sweep header values", offset=6)
    return Sweep(np.array([ox, oy, oz]), ts, pts.astype(np.float64))


def _fmt(*values) -> str:
    # shortest repr that round-trips the exact double
    return " ".join(repr(float(v)) for v in values)


def _write_sweep_text(sweep: Sweep, path: Path) -> None:
    with open(path, "w") as f:
        f.write(f"# origin {_fmt(*sweep.sensor_origin)}\n")
        f.write(f"# timestamp {_fmt(sweep.timestamp)}\n")
        for x, y, z, t in sweep.points:
            f.write(_fmt(x, y, z, t) + "\n")


def _read_sweep_text(path: Path) -> Sweep:
    origin = np.zeros(3)
    timestamp = 0.0
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if fields[:1] == ["origin"] and len(fields) == 4:
                    origin = np.array([float(v) for v in fields[1:]])
                elif fields[:1] == ["timestamp"] and len(fields) == 2:
                    timestamp = float(fields[1])
                continue
            parts = line.split()
            if len(parts) not in (3, 4):
                raise ParseError(f"{path}:{lineno}: expected 3 or 4 columns, got {len(parts)}")
            try:
                vals = [float(v) for v in parts]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if len(vals) == 3:
                vals.append(0.0)
            if not all(math.isfinite(v) for v in vals):
                raise ParseError(f"{path}:{lineno}: non-finite coordinate in record {len(rows)}")
            rows.append(vals)
    pts = np.array(rows, dtype=np.float64).reshape(len(rows), 4)
    return Sweep(origin, timestamp, pts)


def read_poses(path) -> list[tuple[float, Pose]]:
    """Parse a pose file into (timestamp, Pose) tuples in file order."""
    out = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 8:
                raise ParseError(f"{path}:{lineno}: expected 8 fields, got {len(parts)}")
            try:
                ts, tx, ty, tz, qw, qx, qy, qz = (float(v) for v in parts)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            try:
                pose = Pose(np.array([tx, ty, tz]), np.array([qw, qx, qy, qz]))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            out.append((ts, pose))
    return out


def write_poses(poses: list[tuple[float, Pose]], path) -> None:
    with open(path, "w") as f:
        for ts, pose in poses:
            f.write(_fmt(ts, *pose.translation, *pose.rotation) + "\n")


# ---------------------------------------------------------------------------
# volume files


def _pack_vol_header(magic: bytes, config: GridConfig) -> bytes:
    nx, ny, nz = config.dims
    return _VOL_HEADER.pack(magic, FORMAT_VERSION, nx, ny, nz,
                            config.x_min, config.y_min, config.z_min,
                            config.voxel_size)


def _unpack_vol_header(raw: bytes, magic: bytes, path) -> tuple[GridConfig, int]:
    if len(raw) < _VOL_HEADER.size:
        raise ParseError(f"{path}: truncated volume header", offset=len(raw))
    got, version, nx, ny, nz, x_min, y_min, z_min, h = _VOL_HEADER.unpack_from(raw)
    if got != magic:
        raise ParseError(f"{path}: bad magic {got!r}, expected {magic!r}", offset=0)
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported volume format version {version}", offset=4)
    config = GridConfig(x_min, x_min + nx * h, y_min, y_min + ny * h,
                        z_min, z_min + nz * h, h)
    if config.dims != (nx, ny, nz):
        raise ParseError(f"{path}: inconsistent dims {(nx, ny, nz)} in header")
    return config, _VOL_HEADER.size


def write_vvol(states: np.ndarray, config: GridConfig, path) -> None:
    payload = np.ascontiguousarray(states, dtype=np.uint8)
    if payload.shape != config.dims:
        raise ValueError(f"states shape {payload.shape} != grid dims {config.dims}")
    with open(path, "wb") as f:
        f.write(_pack_vol_header(_VVOL_MAGIC, config))
        f.write(payload.tobytes())


def read_vvol(path) -> tuple[np.ndarray, GridConfig]:
    raw = Path(path).read_bytes()
    config, off = _unpack_vol_header(raw, _VVOL_MAGIC, path)
    n = config.n_voxels
    if len(raw) < off + n:
        raise ParseError(f"{path}: truncated state payload", offset=len(raw))
    states = np.frombuffer(raw, dtype=np.uint8, count=n, offset=off)
    if states.max(initial=0) > 2:
        bad = int(np.flatnonzero(states > 2)[0])
        raise ParseError(f"{path}: invalid state byte at cell {bad}", offset=off + bad)
    return states.reshape(config.dims).copy(), config


def write_ovol(logodds: np.ndarray, config: GridConfig, path) -> None:
    payload = np.ascontiguousarray(logodds, dtype="<f4")
    if payload.shape != config.dims:
        raise ValueError(f"logodds shape {payload.shape} != grid dims {config.dims}")
    with open(path, "wb") as f:
        f.write(_pack_vol_header(_OVOL_MAGIC, config))
        f.write(payload.tobytes())


def read_ovol(path) -> tuple[np.ndarray, GridConfig]:
    raw = Path(path).read_bytes()
    config, off = _unpack_vol_header(raw, _OVOL_MAGIC, path)
    n = config.n_voxels
    if len(raw) < off + 4 * n:
        raise ParseError(f"{path}: truncated log-odds payload", offset=len(raw))
    values = np.frombuffer(raw, dtype="<f4", count=n, offset=off)
    return values.reshape(config.dims).copy(), config


def write_bevf(values: np.ndarray, path) -> None:
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"BEV map must be 3-d (width, height, channels), got {arr.shape}")
    with open(path, "wb") as f:
        f.write(_BEVF_HEADER.pack(_BEVF_MAGIC, *arr.shape))
        f.write(arr.tobytes())


def read_bevf(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _BEVF_HEADER.size:
        raise ParseError(f"{path}: truncated BEV header", offset=len(raw))
    magic, w, h, c = _BEVF_HEADER.unpack_from(raw)
    if magic != _BEVF_MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}, expected {_BEVF_MAGIC!r}", offset=0)
    n = w * h * c
    if len(raw) < _BEVF_HEADER.size + 4 * n:
        raise ParseError(f"{path}: truncated BEV payload", offset=len(raw))
    values = np.frombuffer(raw, dtype="<f4", count=n, offset=_BEVF_HEADER.size)
    return values.reshape(w, h, c).copy()
