"""Drift-free sensor readings from emissions, geometry and wind.

A sensor observes each source with a distance-dependent timestep lag and
a distance/wind-dependent attenuation; its true reading is the sum of the
attenuated, lagged emissions over all sources.

The scalar operations (`offset`, `wind_coefficient`,
`measurement_coefficient`, `true_reading`) are the readable reference
path; `compute_true_readings` is the vectorized production path and the
test suite holds the two equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phenomenon import WeatherSeries
from .scene import Scene, position_at, sensor_positions

# Fraction of the system radius that one timestep of lag corresponds to.
LAG_RADIUS_FRACTION = 0.4


def offset(d: float, system_radius: float):
    """Timestep lag with which a sensor observes a source at distance d."""
    if system_radius <= 0:
        raise ValueError("system_radius must be > 0")
    d = np.asarray(d)
    if (d < 0).any():
        raise ValueError("distance must be >= 0")
    o = np.floor(d / (LAG_RADIUS_FRACTION * system_radius)).astype(np.int64)
    return int(o) if o.ndim == 0 else o


def wind_coefficient(
    speed: np.ndarray,
    phi_sc: np.ndarray,
    phi_w: np.ndarray,
    t: int,
    o: int,
) -> float:
    """Signed wind alignment factor for one sensor-source pair at time t.

    Averages the angular-alignment term over the o+1 lagged timesteps and
    scales by the current wind speed.  Each term is +1 for perfectly
    aligned angles and -1 at the fold point; angle differences are folded
    modulo pi, so alignment and exact opposition score identically.
    """
    if t - o < 0:
        raise ValueError(f"t - o = {t - o} indexes before the series start")
    total = 0.0
    for tau in range(o + 1):
        diff = (phi_sc[t - tau] - phi_w[t - tau]) % math.pi
        total += 2.0 * (1.0 - diff / math.pi) - 1.0
    return speed[t] / (o + 1) * total


def measurement_coefficient(
    d,
    w,
    system_radius: float,
    denom_floor_factor: float = 1e-6,
):
    """Distance/wind attenuation in (0, 1]; 1 at zero distance.

    Favourable wind (w > 0) widens the denominator quadratically; adverse
    wind shrinks it.  A denominator at or below ``denom_floor_factor * R``
    (possible for strongly adverse wind) is clamped up to that floor,
    which drives the coefficient towards 0.
    """
    if system_radius <= 0:
        raise ValueError("system_radius must be > 0")
    d = np.asarray(d, dtype=float)
    w = np.asarray(w, dtype=float)
    half = system_radius / 2.0
    denom = np.where(
        w > 0,
        half * (2.0 + w + 2.0 * w * w),
        half * (w + 2.0),
    )
    denom = np.maximum(denom, denom_floor_factor * system_radius)
    a = (10.0 * d / denom + 1.0) ** -1.5
    return float(a) if a.ndim == 0 else a


def count_denominator_clamps(w, system_radius: float, denom_floor_factor: float = 1e-6) -> int:
    """How many wind coefficients hit the denominator floor."""
    w = np.asarray(w, dtype=float)
    half = system_radius / 2.0
    denom = np.where(w > 0, half * (2.0 + w + 2.0 * w * w), half * (w + 2.0))
    return int((denom <= denom_floor_factor * system_radius).sum())


def scene_warmup(scene: Scene) -> int:
    """Upper bound on the lag of any sensor-source pair in this scene."""
    norms = [np.hypot(*scene.static_sensors.T).max() if scene.n_static else 0.0]
    norms += [np.hypot(*p.T).max() for p in scene.mobile_paths]
    max_d = np.hypot(*scene.sources.T).max() + max(norms)
    return int(math.floor(max_d / (LAG_RADIUS_FRACTION * scene.system_radius)))


def true_reading(
    scene: Scene,
    emissions: np.ndarray,
    weather: WeatherSeries,
    sensor_index: int,
    kind: str,
    t: int,
    denom_floor_factor: float = 1e-6,
) -> np.ndarray:
    """Reference reading of one sensor at one timestep, both pollutants.

    ``emissions`` has shape (n_sources, 2, T).  Walks every source with
    scalar arithmetic; the vectorized pipeline must agree with this.
    """
    warmup = scene_warmup(scene)
    if t < warmup:
        raise ValueError(f"t={t} is inside the warmup region (first {warmup} steps)")
    local = sensor_index - scene.n_static if kind == "mobile" else sensor_index
    phi_w = np.radians(weather.wind_direction)
    pos_t = position_at(scene, local, kind, t)
    reading = np.zeros(2)
    for c, src in enumerate(scene.sources):
        dx, dy = pos_t - src
        d = math.hypot(dx, dy)
        o = offset(d, scene.system_radius)
        # source-to-sensor angle at each lagged timestep (the sensor moves)
        phi_sc = np.empty(o + 1)
        for tau in range(o + 1):
            px, py = position_at(scene, local, kind, t - tau) - src
            phi_sc[o - tau] = math.atan2(py, px)
        w = wind_coefficient(weather.wind_speed[t - o : t + 1], phi_sc, phi_w[t - o : t + 1], o, o)
        a = measurement_coefficient(d, w, scene.system_radius, denom_floor_factor)
        reading += a * emissions[c, :, t - o]
    return reading


@dataclass
class DispersionResult:
    readings: np.ndarray        # (T, n_sensors, 2)
    positions: np.ndarray       # (T, n_sensors, 2)
    warmup: int
    denom_clamps: int = 0
    max_offset: int = 0


def compute_true_readings(
    scene: Scene,
    emissions: np.ndarray,
    weather: WeatherSeries,
    denom_floor_factor: float = 1e-6,
) -> DispersionResult:
    """Vectorized readings for all sensors and timesteps.

    Warmup rows (t below the maximal lag) are computed with lag indices
    clamped to 0 so the arrays stay dense; callers must exclude them.
    """
    timesteps = emissions.shape[2]
    pos = sensor_positions(scene, timesteps)           # (T, N, 2)
    phi_w = np.radians(weather.wind_direction)[:, None]
    speed = weather.wind_speed[:, None]
    tidx = np.arange(timesteps)[:, None]
    half = scene.system_radius / 2.0
    floor = denom_floor_factor * scene.system_radius

    readings = np.zeros((timesteps, scene.n_sensors, 2))
    clamps = 0
    max_o = 0
    for c in range(len(scene.sources)):
        delta = pos - scene.sources[c]                 # (T, N, 2)
        d = np.hypot(delta[..., 0], delta[..., 1])
        phi_sc = np.arctan2(delta[..., 1], delta[..., 0])
        o = np.floor(d / (LAG_RADIUS_FRACTION * scene.system_radius)).astype(np.int64)
        max_o = max(max_o, int(o.max()))

        term = 2.0 * (1.0 - np.mod(phi_sc - phi_w, np.pi) / np.pi) - 1.0
        csum = np.cumsum(term, axis=0)
        lo = tidx - o - 1                              # index of last excluded term
        below = np.take_along_axis(csum, np.maximum(lo, 0), axis=0)
        below[lo < 0] = 0.0
        wsum = np.take_along_axis(csum, tidx, axis=0) - below
        w = speed / (o + 1) * wsum

        denom = np.where(w > 0, half * (2.0 + w + 2.0 * w * w), half * (w + 2.0))
        clamps += int((denom <= floor).sum())
        a = (10.0 * d / np.maximum(denom, floor) + 1.0) ** -1.5

        lag = np.maximum(tidx - o, 0)                  # warmup rows clamp to t=0
        for p in range(2):
            readings[..., p] += a * emissions[c, p][lag]

    return DispersionResult(
        readings=readings,
        positions=pos,
        warmup=scene_warmup(scene),
        denom_clamps=clamps,
        max_offset=max_o,
    )
