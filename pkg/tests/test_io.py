import struct

import numpy as np
import pytest

from voxelvis import (GridConfig, ParseError, Pose, Sweep, aggregate_sweeps,
                      motion_compensate, read_poses, read_sweep, write_sweep)
from voxelvis.io import (read_bevf, read_ovol, read_vvol, write_bevf,
                         write_ovol, write_poses, write_vvol)


def _random_sweep(rng, n=None):
    n = int(rng.integers(0, 20)) if n is None else n
    # values drawn as float32 so the f32 payload round-trips exactly
    pts = rng.uniform(-80, 80, size=(n, 4)).astype(np.float32).astype(np.float64)
    origin = rng.uniform(-5, 5, size=3)
    return Sweep(origin, float(rng.uniform(0, 100)), pts)


def test_binary_round_trip_many(tmp_path):
    rng = np.random.default_rng(11)
    path = tmp_path / "sweep.vswp"
    for _ in range(1000):
        sweep = _random_sweep(rng)
        write_sweep(sweep, path)
        back = read_sweep(path)
        assert back.timestamp == sweep.timestamp
        assert np.array_equal(back.sensor_origin, sweep.sensor_origin)
        assert np.array_equal(back.points, sweep.points)


def test_write_is_bit_stable(tmp_path):
    rng = np.random.default_rng(5)
    sweep = _random_sweep(rng, 50)
    a, b = tmp_path / "a.vswp", tmp_path / "b.vswp"
    write_sweep(sweep, a)
    write_sweep(read_sweep(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_empty_sweep(tmp_path):
    path = tmp_path / "empty.vswp"
    write_sweep(Sweep(np.zeros(3), 0.0, np.zeros((0, 4))), path)
    back = read_sweep(path)
    assert len(back) == 0


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.vswp"
    path.write_bytes(b"NOPE" + bytes(60))
    with pytest.raises(ParseError, match="magic"):
        read_sweep(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "trunc.vswp"
    sweep = Sweep(np.zeros(3), 0.0, np.ones((4, 4)))
    write_sweep(sweep, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(ParseError, match="truncated"):
        read_sweep(path)


def test_nan_record_names_index(tmp_path):
    path = tmp_path / "nan.vswp"
    header = struct.pack("<4sH3ddQ", b"VSWP", 1, 0.0, 0.0, 0.0, 0.0, 3)
    pts = np.zeros((3, 4), dtype="<f4")
    pts[2, 1] = np.nan
    path.write_bytes(header + pts.tobytes())
    with pytest.raises(ParseError, match="record 2"):
        read_sweep(path)


def test_text_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    sweep = _random_sweep(rng, 25)
    path = tmp_path / "sweep.txt"
    write_sweep(sweep, path)
    back = read_sweep(path)
    assert np.array_equal(back.points, sweep.points)
    assert np.array_equal(back.sensor_origin, sweep.sensor_origin)
    assert back.timestamp == sweep.timestamp


def test_text_three_columns_default_t(tmp_path):
    path = tmp_path / "sweep.txt"
    path.write_text("1.0 2.0 3.0\n4.0 5.0 6.0\n")
    back = read_sweep(path)
    assert np.array_equal(back.points,
                          [[1.0, 2.0, 3.0, 0.0], [4.0, 5.0, 6.0, 0.0]])
    assert back.timestamp == 0.0


def test_text_bad_column_count(tmp_path):
    path = tmp_path / "sweep.txt"
    path.write_text("1.0 2.0\n")
    with pytest.raises(ParseError, match="columns"):
        read_sweep(path)


def test_sweep_validation():
    with pytest.raises(ValueError, match="record 1"):
        Sweep(np.zeros(3), 0.0, np.array([[0, 0, 0, 0], [np.inf, 0, 0, 0]]))
    with pytest.raises(ValueError):
        Sweep(np.array([np.nan, 0, 0]), 0.0, np.zeros((1, 4)))
    with pytest.raises(ValueError):
        Sweep(np.zeros(3), 0.0, np.zeros((2, 5)))


# ---------------------------------------------------------------------------
# poses and motion compensation


def test_pose_file_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    poses = []
    for ts in (0.0, 0.5, 1.0):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        poses.append((ts, Pose(rng.uniform(-3, 3, 3), q)))
    path = tmp_path / "poses.txt"
    write_poses(poses, path)
    back = read_poses(path)
    assert [ts for ts, _ in back] == [ts for ts, _ in poses]
    for (_, a), (_, b) in zip(back, poses):
        assert np.allclose(a.translation, b.translation, atol=0)
        assert np.allclose(a.rotation, b.rotation, atol=1e-15)


def test_pose_file_errors(tmp_path):
    path = tmp_path / "poses.txt"
    path.write_text("0.0 1 2 3\n")
    with pytest.raises(ParseError, match="8 fields"):
        read_poses(path)
    path.write_text("0.0 0 0 0 2 0 0 0\n")
    with pytest.raises(ParseError, match="quaternion"):
        read_poses(path)


def test_non_unit_quaternion_rejected():
    with pytest.raises(ValueError, match="quaternion"):
        Pose(np.zeros(3), np.array([1.0, 0.1, 0.0, 0.0]))


def _random_pose(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return Pose(rng.uniform(-5, 5, 3), q)


def test_motion_compensate_identity():
    rng = np.random.default_rng(4)
    sweep = _random_sweep(rng, 40)
    pose = _random_pose(rng)
    out = motion_compensate(sweep, pose, pose, sweep.timestamp)
    assert np.allclose(out.points[:, :3], sweep.points[:, :3], atol=1e-9)
    assert np.all(out.points[:, 3] == 0.0)
    assert np.allclose(out.sensor_origin, sweep.sensor_origin, atol=1e-9)


def test_motion_compensate_pure_translation():
    sweep = Sweep(np.zeros(3), 2.0, np.array([[1.0, 2.0, 3.0, 0.0]]))
    pose = Pose(np.array([1.0, 0.0, 0.0]), np.array([1.0, 0, 0, 0]))
    out = motion_compensate(sweep, pose, Pose(), t_ref=5.0)
    assert np.allclose(out.points[0, :3], [2.0, 2.0, 3.0])
    assert out.points[0, 3] == -3.0
    assert np.allclose(out.sensor_origin, [1.0, 0.0, 0.0])


def test_motion_compensate_inverse_composition():
    rng = np.random.default_rng(9)
    for _ in range(20):
        sweep = _random_sweep(rng, 30)
        a, b = _random_pose(rng), _random_pose(rng)
        there = motion_compensate(sweep, a, b, t_ref=sweep.timestamp)
        back = motion_compensate(there, b, a, t_ref=sweep.timestamp)
        assert np.allclose(back.points[:, :3], sweep.points[:, :3], atol=1e-9)
        assert np.allclose(back.sensor_origin, sweep.sensor_origin, atol=1e-9)


def test_rigid_transform_preserves_distances():
    rng = np.random.default_rng(10)
    sweep = _random_sweep(rng, 60)
    out = motion_compensate(sweep, _random_pose(rng), _random_pose(rng), 0.0)
    before = np.linalg.norm(sweep.points[None, :, :3] - sweep.points[:, None, :3], axis=-1)
    after = np.linalg.norm(out.points[None, :, :3] - out.points[:, None, :3], axis=-1)
    np.testing.assert_allclose(after, before, rtol=1e-9, atol=1e-9)


def test_relative_timestamps_translation_invariant():
    rng = np.random.default_rng(12)
    sweep = _random_sweep(rng, 10)
    pose = _random_pose(rng)
    ref = _random_pose(rng)
    t0 = motion_compensate(sweep, pose, ref, t_ref=sweep.timestamp + 0.4)
    shifted = Sweep(sweep.sensor_origin, sweep.timestamp + 100.0, sweep.points)
    t1 = motion_compensate(shifted, pose, ref, t_ref=shifted.timestamp + 0.4)
    assert np.array_equal(t0.points[:, 3], t1.points[:, 3])


def test_aggregate_sweeps():
    rng = np.random.default_rng(13)
    sweeps = [_random_sweep(rng, 5) for _ in range(10)]
    agg = aggregate_sweeps(sweeps)
    assert len(agg) == 50
    assert np.array_equal(agg.sensor_origin, sweeps[-1].sensor_origin)
    assert agg.timestamp == sweeps[-1].timestamp
    assert np.array_equal(agg.points[:5], sweeps[0].points)
    one = aggregate_sweeps([sweeps[0]])
    assert np.array_equal(one.points, sweeps[0].points)
    with pytest.raises(ValueError):
        aggregate_sweeps([])


# ---------------------------------------------------------------------------
# volume containers


def test_vvol_round_trip(tmp_path):
    cfg = GridConfig(0, 2, 0, 2, 0, 1, 0.5)
    rng = np.random.default_rng(14)
    states = rng.integers(0, 3, size=cfg.dims).astype(np.uint8)
    path = tmp_path / "vis.vvol"
    write_vvol(states, cfg, path)
    back, back_cfg = read_vvol(path)
    assert back_cfg == cfg
    assert np.array_equal(back, states)


def test_vvol_rejects_bad_state_byte(tmp_path):
    cfg = GridConfig(0, 1, 0, 1, 0, 1, 0.5)
    path = tmp_path / "vis.vvol"
    write_vvol(np.zeros(cfg.dims, np.uint8), cfg, path)
    raw = bytearray(path.read_bytes())
    raw[-1] = 7
    path.write_bytes(bytes(raw))
    with pytest.raises(ParseError, match="state byte"):
        read_vvol(path)


def test_ovol_round_trip(tmp_path):
    cfg = GridConfig(0, 2, 0, 2, 0, 1, 0.5)
    rng = np.random.default_rng(15)
    lo = rng.normal(size=cfg.dims).astype(np.float32)
    path = tmp_path / "occ.ovol"
    write_ovol(lo, cfg, path)
    back, back_cfg = read_ovol(path)
    assert back_cfg == cfg
    assert np.array_equal(back, lo)


def test_volume_magic_mismatch(tmp_path):
    cfg = GridConfig(0, 1, 0, 1, 0, 1, 0.5)
    path = tmp_path / "occ.ovol"
    write_ovol(np.zeros(cfg.dims, np.float32), cfg, path)
    with pytest.raises(ParseError, match="magic"):
        read_vvol(path)


def test_bevf_round_trip(tmp_path):
    rng = np.random.default_rng(16)
    values = rng.uniform(0, 1, size=(6, 5, 4)).astype(np.float32)
    path = tmp_path / "map.bevf"
    write_bevf(values, path)
    assert np.array_equal(read_bevf(path), values)


def test_bevf_truncated(tmp_path):
    path = tmp_path / "map.bevf"
    write_bevf(np.zeros((2, 2, 2), np.float32), path)
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(ParseError, match="truncated"):
        read_bevf(path)
