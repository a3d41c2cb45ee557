"""Episode configuration: ``key = value`` files merged with command-line flags."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from ..explorer import ExplorerConfig

PLANNERS = ("stg", "nearest-frontier")


class ConfigError(ValueError):
    pass


@dataclass
class EpisodeConfig:
    map_path: str = ""
    planner: str = "stg"
    sensor_range: float = 4.0
    resolution: float = 0.5
    speed: float = 1.0
    seed: int = 0
    max_ticks: int = 5000
    step: int = 5
    thres: int = 3
    near_radius: int = 5
    tube_radius: int = 3
    snapshot_every: int = 100
    fifo: bool = False

    def __post_init__(self):
        if self.planner not in PLANNERS:
            raise ConfigError(f"unknown planner {self.planner!r}; expected one of {', '.join(PLANNERS)}")
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("map_path", "planner", "fifo", "seed"):
                continue
            if v <= 0:
                raise ConfigError(f"{f.name.replace('_', '-')} must be positive, got {v}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def explorer(self) -> ExplorerConfig:
        return ExplorerConfig(
            sensor_range=self.sensor_range, resolution=self.resolution, speed=self.speed,
            max_ticks=self.max_ticks, step=self.step, thres=self.thres, near_radius=self.near_radius,
            tube_radius=self.tube_radius, seed=self.seed, fifo=self.fifo,
        )

    def with_(self, **kw) -> "EpisodeConfig":
        return replace(self, **kw)


_TYPES = {f.name: f.type for f in fields(EpisodeConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(raw)
            return low in ("1", "true", "yes")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw.strip()


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; keys may use dashes or underscores."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "map":
            key = "map_path"
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


def load_config(path: str | Path | None = None, **overrides) -> EpisodeConfig:
    """File values first, then non-None ``overrides`` (the command line wins)."""
    values = {}
    if path is not None:
        try:
            values.update(parse_config(Path(path).read_text(encoding="utf-8")))
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return EpisodeConfig(**values)
