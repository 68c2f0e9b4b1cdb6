"""Generation configuration: every tunable knob of the simulator.

Configs load from / save to YAML.  All defaults together define the
"default dataset": one simulated year (8760 hourly steps), 20 sources,
30 static plus 10 mobile sensors, one drift realization.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

# One scaling window of the emission generator; also the "month" used by
# all split arithmetic.  A week is 7 days, a year is 12 months.
WINDOW = 30 * 24
WEEK = 7 * 24
YEAR = 12 * WINDOW

POLLUTANTS = ("pm25", "pm10")


@dataclass
class SceneConfig:
    n_sources: int = 20
    n_static: int = 30
    n_mobile: int = 10
    source_radius: float = 100.0
    sensor_radius: float = 80.0
    min_separation: float = 12.0
    waypoint_radius_range: tuple[float, float] = (5.0, 20.0)
    waypoint_count_range: tuple[int, int] = (5, 15)


@dataclass
class PhenomenonConfig:
    sine_amplitude: float = 2.5
    emission_scale_mean: float = 50.0
    emission_scale_sd: float = 9.0
    wind_scale_mean: float = 8.0
    wind_scale_sd: float = 2.0
    wind_scale_floor: float = 0.5


@dataclass
class DriftConfig:
    sigma_eps: float = 0.05
    weather_coupling: bool = True
    # Overrides for controlled experiments: pin the ramp at a constant
    # value and/or pin the exponent factor (None leaves both sampled).
    force_tau: float | None = None
    force_beta: float | None = None


@dataclass
class ContextConfig:
    neighborhood_radius: float = 40.0


@dataclass
class GenerationConfig:
    master_seed: int = 0
    timesteps: int = 8760
    n_drift_realizations: int = 1
    denom_floor_factor: float = 1e-6
    scene: SceneConfig = field(default_factory=SceneConfig)
    phenomenon: PhenomenonConfig = field(default_factory=PhenomenonConfig)
    drift: DriftConfig = field(default_factory=DriftConfig)
    context: ContextConfig = field(default_factory=ContextConfig)

    def validate(self) -> None:
        if self.timesteps < WINDOW:
            raise ValueError(
                f"timesteps must cover at least one scaling window ({WINDOW}), got {self.timesteps}"
            )
        if self.n_drift_realizations < 1:
            raise ValueError("n_drift_realizations must be >= 1")
        if self.scene.n_sources < 1 or self.scene.n_static + self.scene.n_mobile < 1:
            raise ValueError("need at least one source and one sensor")
        lo, hi = self.scene.waypoint_radius_range
        if not (0 <= lo <= hi):
            raise ValueError("waypoint_radius_range must be ordered and nonnegative")

    @property
    def warmup(self) -> int:
        """Timesteps discarded so lagged emission lookups never index before 0.

        The lag of a sensor-source pair is floor(d / (0.4 R)); the largest
        possible pair distance is bounded by the two placement radii plus
        the mobile waypoint excursion.
        """
        s = self.scene
        max_d = s.source_radius + s.sensor_radius + s.waypoint_radius_range[1]
        return int(math.floor(max_d / (0.4 * s.source_radius)))

    @property
    def usable_timesteps(self) -> int:
        return self.timesteps - self.warmup

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scene"]["waypoint_radius_range"] = list(self.scene.waypoint_radius_range)
        d["scene"]["waypoint_count_range"] = list(self.scene.waypoint_count_range)
        return d


def _build(cls, data: dict):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in fields:
            raise ValueError(f"unknown config key {key!r} for {cls.__name__}")
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> GenerationConfig:
    data = dict(data)
    if "T" in data:  # accepted alias for timesteps
        data["timesteps"] = data.pop("T")
    sub = {
        "scene": SceneConfig,
        "phenomenon": PhenomenonConfig,
        "drift": DriftConfig,
        "context": ContextConfig,
    }
    kwargs = {}
    for key, value in data.items():
        if key in sub:
            kwargs[key] = _build(sub[key], value or {})
        else:
            kwargs[key] = value
    cfg = _build(GenerationConfig, kwargs)
    cfg.scene.waypoint_radius_range = tuple(cfg.scene.waypoint_radius_range)
    cfg.scene.waypoint_count_range = tuple(cfg.scene.waypoint_count_range)
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> GenerationConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a mapping")
    return config_from_dict(data)


def save_config(config: GenerationConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=False)
