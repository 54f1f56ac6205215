"""Engine configuration: grid geometry, sensor-model parameters, culling.

Config files are plain key=value lines ('#' comments and blank lines are
ignored).  Every key is optional; omitted keys fall back to the defaults
(100 m x 100 m x 8 m grid at 0.25 m, Octomap sensor model, culling drop
fraction 0.5).  Unknown keys are rejected.
"""

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .grid import GridConfig
from .occupancy import OccupancyParams

DEFAULT_CULL_DROP_FRACTION = 0.5

_GRID_KEYS = ("x_min", "x_max", "y_min", "y_max", "z_min", "z_max", "voxel_size")
_OCC_KEYS = ("p_hit", "p_miss", "clamp_min", "clamp_max")
CONFIG_KEYS = _GRID_KEYS + _OCC_KEYS + ("cull_drop_fraction",)


@dataclass(frozen=True)
class EngineConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    occupancy: OccupancyParams = field(default_factory=OccupancyParams)
    cull_drop_fraction: float = DEFAULT_CULL_DROP_FRACTION

    def __post_init__(self):
        if not (0.0 <= self.cull_drop_fraction <= 1.0):
            raise ConfigError(
                f"cull_drop_fraction must be in [0, 1], got {self.cull_drop_fraction}"
            )


def config_from_mapping(mapping) -> EngineConfig:
    """Build an EngineConfig from a key->value mapping (file keys exactly)."""
    values = {}
    for key, raw in dict(mapping).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[key] = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"config key {key!r} has non-numeric value {raw!r}") from None
    try:
        grid = GridConfig(**{k: values[k] for k in _GRID_KEYS if k in values})
        occ = OccupancyParams(**{k: values[k] for k in _OCC_KEYS if k in values})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return EngineConfig(grid, occ,
                        values.get("cull_drop_fraction", DEFAULT_CULL_DROP_FRACTION))


def load_config(path) -> EngineConfig:
    """Parse a key=value config file."""
    mapping = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key in mapping:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            mapping[key] = value.strip()
    try:
        return config_from_mapping(mapping)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_config_or_default(path=None) -> EngineConfig:
    if path is None:
        return EngineConfig()
    return load_config(Path(path))
