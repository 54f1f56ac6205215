import numpy as np
import pytest

from voxelvis import ConfigError, GridConfig, grid_dims, voxel_center, world_to_voxel
from voxelvis.grid import linear_index, voxelize_points

UNIT_CUBE = GridConfig(0, 1, 0, 1, 0, 1, 0.25)


def test_default_dims():
    assert grid_dims(GridConfig()) == (400, 400, 32)


def test_unit_cube_dims():
    assert grid_dims(UNIT_CUBE) == (4, 4, 4)


def test_non_multiple_span_rejected():
    with pytest.raises(ConfigError):
        GridConfig(0, 1, 0, 1, 0, 1, 0.3)


@pytest.mark.parametrize("bad", [
    dict(x_min=1.0, x_max=0.0),
    dict(y_min=0.0, y_max=0.0),
    dict(voxel_size=-0.25),
    dict(voxel_size=0.0),
    dict(z_max=float("nan")),
])
def test_invalid_configs_rejected(bad):
    with pytest.raises(ConfigError):
        GridConfig(**{**dict(x_min=0, x_max=1, y_min=0, y_max=1,
                             z_min=0, z_max=1, voxel_size=0.25), **bad})


def test_world_to_voxel_min_corner():
    assert world_to_voxel((-50.0, -50.0, -5.0), GridConfig()) == (0, 0, 0)


def test_world_to_voxel_near_max():
    assert world_to_voxel((49.99, 0.0, 2.99), GridConfig()) == (399, 200, 31)


def test_world_to_voxel_upper_edge_excluded():
    cfg = GridConfig()
    assert world_to_voxel((50.0, 0.0, 0.0), cfg) is None
    assert world_to_voxel((0.0, 50.0, 0.0), cfg) is None
    assert world_to_voxel((0.0, 0.0, 3.0), cfg) is None
    assert world_to_voxel((-50.1, 0.0, 0.0), cfg) is None


def test_voxel_center_corners():
    cfg = GridConfig()
    assert voxel_center((0, 0, 0), cfg) == (-49.875, -49.875, -4.875)
    assert voxel_center((399, 399, 31), cfg) == (49.875, 49.875, 2.875)


def test_voxel_center_out_of_range():
    with pytest.raises(ValueError):
        voxel_center((4, 0, 0), UNIT_CUBE)
    with pytest.raises(ValueError):
        voxel_center((0, -1, 0), UNIT_CUBE)


def test_center_round_trip_random_indices():
    cfg = GridConfig()
    rng = np.random.default_rng(0)
    nx, ny, nz = cfg.dims
    for _ in range(1000):
        v = (int(rng.integers(nx)), int(rng.integers(ny)), int(rng.integers(nz)))
        assert world_to_voxel(voxel_center(v, cfg), cfg) == v


def test_world_to_voxel_monotone_per_axis():
    cfg = UNIT_CUBE
    xs = np.linspace(0.0, 0.999, 50)
    idx = [world_to_voxel((x, 0.1, 0.1), cfg)[0] for x in xs]
    assert idx == sorted(idx)


def test_linear_index_matches_c_order():
    cfg = UNIT_CUBE
    nx, ny, nz = cfg.dims
    for v in [(0, 0, 0), (1, 2, 3), (3, 3, 3), (2, 0, 1)]:
        assert linear_index(v, cfg) == np.ravel_multi_index(v, (nx, ny, nz))


def test_voxelize_points_matches_scalar_path():
    cfg = GridConfig()
    rng = np.random.default_rng(3)
    pts = rng.uniform(-60, 60, size=(500, 3))
    idx, in_grid = voxelize_points(pts, cfg)
    for p, ix, ok in zip(pts, idx, in_grid):
        expected = world_to_voxel(p, cfg)
        if expected is None:
            assert not ok
        else:
            assert ok and tuple(ix) == expected
