"""Per-sensor context vectors: 16-area neighborhood means plus weather.

The neighborhood of a sensor is cut into 8 angular sectors of 45 degrees
(the first one centered on angle 0) times 2 radial rings (inner below
half the neighborhood radius, outer up to the full radius).  Area means
aggregate the drifted readings of the other sensors falling in each area;
wind direction is one-hot encoded over the same 8 sectors.

Because aggregation keys on positions at each timestep, mobile sensors
need no special handling: they simply contribute to different areas as
they move.
"""

from __future__ import annotations

import numpy as np

N_SECTORS = 8
N_RINGS = 2
N_AREAS = N_SECTORS * N_RINGS

WEATHER_FEATURES = ("temperature", "humidity", "wind_speed")

CONTEXT_COLUMNS = (
    [f"pm25_area_{i:02d}" for i in range(N_AREAS)]
    + [f"pm10_area_{i:02d}" for i in range(N_AREAS)]
    + list(WEATHER_FEATURES)
    + [f"wind_dir_{s}" for s in range(N_SECTORS)]
)


def sector_index(angle_deg):
    """Sector in [0, 8) for an angle in degrees; sector 0 is centered on 0."""
    a = np.floor(((np.asarray(angle_deg) + 22.5) % 360.0) / 45.0).astype(np.int64) % N_SECTORS
    return int(a) if a.ndim == 0 else a


def partition_neighborhood(
    center: np.ndarray,
    others: np.ndarray,
    neighborhood_radius: float = 40.0,
) -> np.ndarray:
    """Area index in [0, 16) per point, or -1 for points outside the radius.

    Index layout: sector + 8 * ring, ring 0 inner, ring 1 outer.  A point
    exactly at the center lands in the inner ring of sector 0.
    """
    center = np.asarray(center, dtype=float)
    others = np.atleast_2d(np.asarray(others, dtype=float))
    delta = others - center
    dist = np.hypot(delta[:, 0], delta[:, 1])
    angle = np.degrees(np.arctan2(delta[:, 1], delta[:, 0]))
    sector = sector_index(angle)
    ring = (dist >= neighborhood_radius / 2.0).astype(np.int64)
    area = sector + N_SECTORS * ring
    return np.where(dist < neighborhood_radius, area, -1)


def wind_direction_onehot(direction_deg: float) -> np.ndarray:
    onehot = np.zeros(N_SECTORS)
    onehot[sector_index(direction_deg)] = 1.0
    return onehot


def context_vector(
    sensor_index: int,
    positions: np.ndarray,
    drifted: np.ndarray,
    weather_row: tuple[float, float, float, float],
    neighborhood_radius: float = 40.0,
) -> np.ndarray:
    """Context of one sensor at one timestep.

    ``positions`` is (n_sensors, 2) and ``drifted`` (n_sensors, 2) at that
    timestep; ``weather_row`` is (temperature, humidity, wind_speed,
    wind_direction_deg).  The sensor's own reading is excluded from its
    area means; empty areas read 0.
    """
    n = len(positions)
    others = [j for j in range(n) if j != sensor_index]
    areas = partition_neighborhood(
        positions[sensor_index], positions[others], neighborhood_radius
    )
    means = np.zeros((2, N_AREAS))
    for a in range(N_AREAS):
        members = [others[k] for k in range(len(others)) if areas[k] == a]
        if members:
            means[:, a] = drifted[members].mean(axis=0)
    temperature, humidity, wind_speed, wind_dir = weather_row
    return np.concatenate(
        [means[0], means[1], [temperature, humidity, wind_speed], wind_direction_onehot(wind_dir)]
    )


def compute_context(
    positions: np.ndarray,
    drifted: np.ndarray,
    weather_matrix: np.ndarray,
    neighborhood_radius: float = 40.0,
    chunk: int = 512,
) -> np.ndarray:
    """Vectorized context for all sensors and timesteps.

    ``positions`` and ``drifted`` are (T, N, 2); ``weather_matrix`` is
    (T, 4) ordered (temperature, humidity, wind_speed, wind_direction).
    Returns (T, N, len(CONTEXT_COLUMNS)).
    """
    timesteps, n, _ = positions.shape
    out = np.empty((timesteps, n, len(CONTEXT_COLUMNS)))

    onehot = np.zeros((timesteps, N_SECTORS))
    onehot[np.arange(timesteps), sector_index(weather_matrix[:, 3])] = 1.0
    off_diag = ~np.eye(n, dtype=bool)

    for s0 in range(0, timesteps, chunk):
        s1 = min(s0 + chunk, timesteps)
        p = positions[s0:s1]
        delta = p[:, None, :, :] - p[:, :, None, :]      # (c, center, other, 2)
        dist = np.hypot(delta[..., 0], delta[..., 1])
        angle = np.degrees(np.arctan2(delta[..., 1], delta[..., 0]))
        area = sector_index(angle) + N_SECTORS * (dist >= neighborhood_radius / 2.0)
        valid = (dist < neighborhood_radius) & off_diag[None, :, :]

        r = drifted[s0:s1]                               # (c, other, 2)
        means = np.zeros((s1 - s0, n, 2 * N_AREAS))
        for a in range(N_AREAS):
            mask = valid & (area == a)
            counts = mask.sum(axis=2)
            safe = np.maximum(counts, 1)
            means[:, :, a] = np.einsum("cij,cj->ci", mask, r[..., 0]) / safe
            means[:, :, N_AREAS + a] = np.einsum("cij,cj->ci", mask, r[..., 1]) / safe
        out[s0:s1, :, : 2 * N_AREAS] = means
        out[s0:s1, :, 2 * N_AREAS : 2 * N_AREAS + 3] = weather_matrix[s0:s1, None, :3]
        out[s0:s1, :, 2 * N_AREAS + 3 :] = onehot[s0:s1, None, :]
    return out
