"""Spatial layout: pollution sources, static sensors and mobile-sensor paths.

All positions live in a flat 2-D plane measured in simulation units.
Sources are placed uniformly in a disk of radius 100 around the origin,
static sensors in a disk of radius 80, both with a minimum pairwise
separation of 12.  Mobile sensors follow a closed loop of 5-15 waypoints
scattered on circles of varying radius around a path center; traversal is
one waypoint per timestep, cycling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SceneConfig
from .seeds import substream


class PlacementError(RuntimeError):
    """Raised when rejection sampling cannot satisfy the separation constraint."""


@dataclass
class Scene:
    system_radius: float
    sources: np.ndarray                       # (n_sources, 2)
    static_sensors: np.ndarray                # (n_static, 2)
    mobile_paths: list[np.ndarray] = field(default_factory=list)  # each (k_i, 2)

    @property
    def n_static(self) -> int:
        return len(self.static_sensors)

    @property
    def n_mobile(self) -> int:
        return len(self.mobile_paths)

    @property
    def n_sensors(self) -> int:
        return self.n_static + self.n_mobile

    def sensor_kind(self, sensor_index: int) -> str:
        if not 0 <= sensor_index < self.n_sensors:
            raise IndexError(f"sensor index {sensor_index} out of range")
        return "static" if sensor_index < self.n_static else "mobile"

    def validate(self, config: SceneConfig) -> None:
        """Check every placement constraint of a generated scene."""
        _check_disk(self.sources, config.source_radius, "source")
        _check_disk(self.static_sensors, config.sensor_radius, "static sensor")
        _check_separation(self.sources, config.min_separation, "source")
        _check_separation(self.static_sensors, config.min_separation, "static sensor")
        lo, hi = config.waypoint_count_range
        for i, path in enumerate(self.mobile_paths):
            if not lo <= len(path) <= hi:
                raise ValueError(f"mobile path {i} has {len(path)} waypoints")
            if not np.isfinite(path).all():
                raise ValueError(f"mobile path {i} has non-finite waypoints")


def _check_disk(points: np.ndarray, radius: float, label: str) -> None:
    norms = np.hypot(points[:, 0], points[:, 1])
    if (norms > radius + 1e-9).any():
        raise ValueError(f"{label} outside placement disk of radius {radius}")


def _check_separation(points: np.ndarray, min_separation: float, label: str) -> None:
    for i in range(len(points)):
        d = np.hypot(*(points[i + 1 :] - points[i]).T)
        if (d < min_separation - 1e-9).any():
            raise ValueError(f"{label} pair closer than {min_separation}")


def place_points(
    count: int,
    radius: float,
    min_separation: float,
    rng: np.random.Generator,
    max_rejections: int = 10_000,
) -> np.ndarray:
    """Rejection-sample ``count`` points uniform on a disk, pairwise separated.

    Raises PlacementError after ``max_rejections`` consecutive rejected
    candidates (the disk cannot pack that many points).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be > 0")
    if min_separation < 0:
        raise ValueError("min_separation must be >= 0")

    accepted = np.empty((count, 2))
    n = 0
    rejections = 0
    while n < count:
        u, v = rng.random(2)
        r = radius * math.sqrt(u)
        theta = 2.0 * math.pi * v
        cand = (r * math.cos(theta), r * math.sin(theta))
        if n == 0 or _min_dist(accepted[:n], cand) >= min_separation:
            accepted[n] = cand
            n += 1
            rejections = 0
        else:
            rejections += 1
            if rejections >= max_rejections:
                raise PlacementError(
                    f"gave up placing point {n + 1}/{count} after {max_rejections} "
                    f"consecutive rejections (radius={radius}, separation={min_separation})"
                )
    return accepted


def _min_dist(points: np.ndarray, cand: tuple[float, float]) -> float:
    return float(np.hypot(points[:, 0] - cand[0], points[:, 1] - cand[1]).min())


def sample_mobile_path(
    rng: np.random.Generator,
    center: np.ndarray | None = None,
    center_radius: float = 80.0,
    count_range: tuple[int, int] = (5, 15),
    radius_range: tuple[float, float] = (5.0, 20.0),
    waypoint_count: int | None = None,
) -> np.ndarray:
    """Sample one mobile path: waypoints on circles of varying radius.

    The path center is drawn uniformly on a disk unless given.  Each
    waypoint sits at an independently drawn radius and angle around the
    center; the traversal later cycles through them one per timestep.
    """
    if center is None:
        center = place_points(1, center_radius, 0.0, rng)[0]
    center = np.asarray(center, dtype=float)
    if waypoint_count is None:
        lo, hi = count_range
        k = int(rng.integers(lo, hi + 1))
    else:
        k = int(waypoint_count)
    radii = rng.uniform(radius_range[0], radius_range[1], k)
    angles = rng.uniform(0.0, 2.0 * math.pi, k)
    return center + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])


def generate_scene(config: SceneConfig, master_seed: int) -> Scene:
    """Generate the full layout from named substreams of the master seed."""
    sources = place_points(
        config.n_sources, config.source_radius, config.min_separation,
        substream(master_seed, "scene/sources"),
    )
    static = place_points(
        config.n_static, config.sensor_radius, config.min_separation,
        substream(master_seed, "scene/static"),
    )
    paths: list[np.ndarray] = []
    if config.n_mobile > 0:
        centers = place_points(
            config.n_mobile, config.sensor_radius, config.min_separation,
            substream(master_seed, "scene/mobile-centers"),
        )
        for i in range(config.n_mobile):
            paths.append(
                sample_mobile_path(
                    substream(master_seed, f"scene/mobile-path-{i}"),
                    center=centers[i],
                    count_range=config.waypoint_count_range,
                    radius_range=config.waypoint_radius_range,
                )
            )
    scene = Scene(
        system_radius=config.source_radius,
        sources=sources,
        static_sensors=static,
        mobile_paths=paths,
    )
    scene.validate(config)
    return scene


def position_at(scene: Scene, sensor_index: int, kind: str, t: int) -> np.ndarray:
    """Position of one sensor at timestep t.

    Static sensors never move; mobile sensors hop to waypoint ``t mod k``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if kind == "static":
        if not 0 <= sensor_index < scene.n_static:
            raise IndexError(f"static sensor index {sensor_index} out of range")
        return scene.static_sensors[sensor_index]
    if kind == "mobile":
        if not 0 <= sensor_index < scene.n_mobile:
            raise IndexError(f"mobile sensor index {sensor_index} out of range")
        path = scene.mobile_paths[sensor_index]
        return path[t % len(path)]
    raise ValueError(f"unknown sensor kind {kind!r}")


def sensor_positions(scene: Scene, timesteps: int) -> np.ndarray:
    """All sensor positions over time, shape (timesteps, n_sensors, 2).

    Sensor order is all static sensors first, then mobile ones; this is
    the global sensor_id order used throughout the exports.
    """
    n = scene.n_sensors
    out = np.empty((timesteps, n, 2))
    out[:, : scene.n_static, :] = scene.static_sensors[None, :, :]
    t = np.arange(timesteps)
    for j, path in enumerate(scene.mobile_paths):
        out[:, scene.n_static + j, :] = path[t % len(path)]
    return out


def sensor_kinds(scene: Scene) -> list[str]:
    return ["static"] * scene.n_static + ["mobile"] * scene.n_mobile
