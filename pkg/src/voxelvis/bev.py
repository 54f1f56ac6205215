"""Bird's-eye-view export: the z-axis becomes channels of a 2D map.

Ternary states encode as FREE=0.0, UNKNOWN=0.5, OCCUPIED=1.0 (unknown sits
at the neutral midpoint), occupancy grids export their posterior, and single
channels can be rendered to 8-bit PGM for inspection.
"""

from dataclasses import dataclass

import numpy as np

from .occupancy import OccupancyGrid, posterior
from .raycast import VisibilityVolume

_ENCODE = np.array([0.5, 0.0, 1.0], dtype=np.float32)   # UNKNOWN, FREE, OCCUPIED


@dataclass(frozen=True)
class BevMap:
    """(width=nx, height=ny, channels=nz) float32 map with values in [0, 1]."""

    values: np.ndarray

    @property
    def width(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


def visibility_to_bev(vis: VisibilityVolume) -> BevMap:
    return BevMap(_ENCODE[vis.states])


def decode_bev_states(bev: BevMap) -> np.ndarray:
    """Invert visibility_to_bev exactly; rejects values outside {0, 0.5, 1}."""
    values = bev.values
    states = np.empty(values.shape, dtype=np.uint8)
    free = values == 0.0
    unknown = values == 0.5
    occupied = values == 1.0
    if not (free | unknown | occupied).all():
        raise ValueError("map contains values other than the ternary encoding")
    states[unknown] = 0
    states[free] = 1
    states[occupied] = 2
    return states


def occupancy_to_bev(grid: OccupancyGrid) -> BevMap:
    return BevMap(posterior(grid).astype(np.float32))


def bev_slice_render(bev: BevMap, channel: int, out_path) -> None:
    """Write one channel as an 8-bit grayscale PGM (P5), round-half-up."""
    if not (0 <= channel < bev.channels):
        raise ValueError(f"channel {channel} out of range [0, {bev.channels})")
    plane = bev.values[:, :, channel].T   # rows are y, columns are x
    pixels = np.floor(plane.astype(np.float64) * 255.0 + 0.5)
    pixels = np.clip(pixels, 0, 255).astype(np.uint8)
    header = f"P5\n{bev.width} {bev.height}\n255\n".encode("ascii")
    with open(out_path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(pixels).tobytes())
