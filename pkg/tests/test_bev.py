import math

import numpy as np
import pytest

from voxelvis import (GridConfig, OccupancyGrid, bev_slice_render,
                      decode_bev_states, occupancy_to_bev, visibility_to_bev)
from voxelvis.raycast import VisibilityVolume

CFG = GridConfig(0, 3, 0, 2, 0, 1, 0.5)    # dims (6, 4, 2)


def _volume(states=None):
    if states is None:
        states = np.zeros(CFG.dims, dtype=np.uint8)
    return VisibilityVolume(CFG, states)


def test_all_unknown_encodes_to_half():
    bev = visibility_to_bev(_volume())
    assert bev.values.dtype == np.float32
    assert (bev.values == 0.5).all()


def test_shape_contract():
    bev = visibility_to_bev(_volume())
    assert (bev.width, bev.height, bev.channels) == CFG.dims
    default = GridConfig()
    vol = VisibilityVolume(default, np.zeros(default.dims, np.uint8))
    assert visibility_to_bev(vol).values.shape == (400, 400, 32)


def test_single_occupied_voxel():
    states = np.zeros(CFG.dims, dtype=np.uint8)
    states[3, 2, 1] = 2
    bev = visibility_to_bev(_volume(states))
    assert bev.values[3, 2, 1] == 1.0
    assert np.count_nonzero(bev.values == 1.0) == 1
    assert np.count_nonzero(bev.values == 0.5) == CFG.n_voxels - 1


def test_round_trip_exact():
    rng = np.random.default_rng(51)
    states = rng.integers(0, 3, size=CFG.dims).astype(np.uint8)
    assert np.array_equal(decode_bev_states(visibility_to_bev(_volume(states))),
                          states)


def test_decode_rejects_foreign_values():
    bev = visibility_to_bev(_volume())
    bev.values[0, 0, 0] = 0.25
    with pytest.raises(ValueError, match="ternary"):
        decode_bev_states(bev)


def test_occupancy_bev_values():
    grid = OccupancyGrid.fresh(CFG)
    bev = occupancy_to_bev(grid)
    assert (bev.values == 0.5).all()
    grid.logodds[0, 0, 0] = math.log(0.7 / 0.3)
    grid.logodds[1, 0, 0] = grid.params.clamp_max
    grid.logodds[2, 0, 0] = grid.params.clamp_min
    bev = occupancy_to_bev(grid)
    assert bev.values[0, 0, 0] == pytest.approx(0.7, abs=1e-7)
    assert bev.values[1, 0, 0] == pytest.approx(0.97, abs=1e-7)
    assert bev.values[2, 0, 0] == pytest.approx(0.12, abs=1e-7)


def test_occupancy_bev_bounded_by_clamp_posteriors():
    rng = np.random.default_rng(52)
    grid = OccupancyGrid.fresh(CFG)
    grid.logodds[:] = rng.uniform(grid.params.clamp_min, grid.params.clamp_max,
                                  size=CFG.dims)
    bev = occupancy_to_bev(grid)
    lo = 1.0 / (1.0 + math.exp(-grid.params.clamp_min))
    hi = 1.0 / (1.0 + math.exp(-grid.params.clamp_max))
    assert (bev.values >= lo - 1e-7).all()
    assert (bev.values <= hi + 1e-7).all()


def test_pgm_render(tmp_path):
    states = np.zeros(CFG.dims, dtype=np.uint8)
    states[0, 0, 0] = 2   # occupied -> 255
    states[1, 0, 0] = 1   # free -> 0
    bev = visibility_to_bev(_volume(states))
    out = tmp_path / "slice.pgm"
    bev_slice_render(bev, 0, out)
    raw = out.read_bytes()
    header = f"P5\n{CFG.dims[0]} {CFG.dims[1]}\n255\n".encode()
    assert raw.startswith(header)
    pixels = np.frombuffer(raw[len(header):], dtype=np.uint8)
    pixels = pixels.reshape(CFG.dims[1], CFG.dims[0])
    assert pixels[0, 0] == 255
    assert pixels[0, 1] == 0
    # unknown 0.5 rounds half-up: floor(127.5 + 0.5) = 128
    assert pixels[1, 1] == 128


def test_pgm_bad_channel(tmp_path):
    bev = visibility_to_bev(_volume())
    with pytest.raises(ValueError, match="channel"):
        bev_slice_render(bev, 2, tmp_path / "x.pgm")
    with pytest.raises(ValueError, match="channel"):
        bev_slice_render(bev, -1, tmp_path / "x.pgm")
