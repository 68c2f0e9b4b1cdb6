"""Source emission and weather time series.

Emissions follow a mean-reverting absolute random walk that is raised to a
power (introducing pollution spikes), rescaled window by window to a drawn
target maximum, and finally overlaid with weekly/monthly/yearly sine
components.  Wind speed reuses the same walk-power-rescale machinery with
exponent 2; temperature and humidity are plain mean-reverting walks; wind
direction is a modular walk on [0, 360).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import WEEK, WINDOW, YEAR, PhenomenonConfig

DELTA_RANGE = (-1.0, 10.0)


def abs_random_walk(
    noise: np.ndarray,
    x0: float = 1.0,
    reversion: float = 0.01,
    delta_range: tuple[float, float] = DELTA_RANGE,
) -> tuple[np.ndarray, np.ndarray]:
    """Nonnegative random walk x_{t+1} = |x_t + delta_t|.

    Steps are ``-reversion * x_t + noise_t`` clipped into ``delta_range``.
    Returns (walk of length len(noise)+1, realized deltas).
    """
    steps = len(noise)
    walk = np.empty(steps + 1)
    deltas = np.empty(steps)
    lo, hi = delta_range
    x = float(x0)
    walk[0] = x
    for t in range(steps):
        d = -reversion * x + noise[t]
        if d < lo:
            d = lo
        elif d > hi:
            d = hi
        deltas[t] = d
        x = abs(x + d)
        walk[t + 1] = x
    return walk, deltas


def rescale_windows(walk: np.ndarray, exponent: float, targets: np.ndarray) -> np.ndarray:
    """Raise to a power, then scale each window so its maximum hits the target.

    Windows are consecutive stretches of WINDOW steps (last one possibly
    short); an all-zero window stays zero.
    """
    n_windows = num_windows(len(walk))
    if len(targets) != n_windows:
        raise ValueError(f"need {n_windows} targets, got {len(targets)}")
    powered = walk ** exponent
    out = np.empty_like(powered)
    for i in range(n_windows):
        seg = powered[i * WINDOW : (i + 1) * WINDOW]
        m = seg.max()
        out[i * WINDOW : i * WINDOW + len(seg)] = targets[i] / m * seg if m > 0 else 0.0
    return out


def num_windows(timesteps: int) -> int:
    return -(-timesteps // WINDOW)


@dataclass
class EmissionResult:
    """One source-pollutant emission series plus generation diagnostics."""

    values: np.ndarray          # final series, nonnegative
    pre_sine: np.ndarray        # windowed-rescaled series before sine overlay
    walk: np.ndarray            # raw absolute random walk
    deltas: np.ndarray          # realized walk steps
    window_targets: np.ndarray  # drawn per-window maxima
    clamped: int                # samples clipped up to zero after the sines


def sample_emission_series(
    timesteps: int,
    rng: np.random.Generator,
    config: PhenomenonConfig | None = None,
) -> EmissionResult:
    """Sample one emission series of the given length."""
    if timesteps < 1:
        raise ValueError("timesteps must be >= 1")
    cfg = config or PhenomenonConfig()
    walk, deltas = abs_random_walk(rng.standard_normal(timesteps - 1))
    targets = rng.normal(cfg.emission_scale_mean, cfg.emission_scale_sd, num_windows(timesteps))
    pre_sine = rescale_windows(walk, 7.0, targets)
    phases = rng.uniform(0.0, 2.0 * np.pi, 3)
    t = np.arange(timesteps)
    sines = cfg.sine_amplitude * (
        np.sin(2.0 * np.pi * t / WEEK + phases[0])
        + np.sin(2.0 * np.pi * t / WINDOW + phases[1])
        + np.sin(2.0 * np.pi * t / YEAR + phases[2])
    )
    raw = pre_sine + sines
    clamped = int((raw < 0).sum())
    return EmissionResult(
        values=np.maximum(raw, 0.0),
        pre_sine=pre_sine,
        walk=walk,
        deltas=deltas,
        window_targets=targets,
        clamped=clamped,
    )


def mean_reverting_walk(
    noise: np.ndarray, center: float, x0: float | None = None, reversion: float = 0.01
) -> np.ndarray:
    """Walk with steps ``-reversion * (x_t - center) + noise_t``."""
    steps = len(noise)
    out = np.empty(steps + 1)
    x = center if x0 is None else float(x0)
    out[0] = x
    for t in range(steps):
        x = x + (-reversion * (x - center) + noise[t])
        out[t + 1] = x
    return out


def modular_walk(steps: np.ndarray, x0: float, modulus: float = 360.0) -> np.ndarray:
    """Random walk wrapped onto [0, modulus)."""
    out = np.empty(len(steps) + 1)
    out[0] = x0 % modulus
    np.cumsum(steps, out=out[1:])
    out[1:] += x0
    return np.mod(out, modulus)


@dataclass
class WeatherSeries:
    """Global weather: temperature, humidity, wind speed and direction."""

    temperature: np.ndarray
    humidity: np.ndarray
    wind_speed: np.ndarray
    wind_direction: np.ndarray  # degrees in [0, 360)
    wind_targets: np.ndarray    # drawn per-window wind-speed maxima
    wind_deltas: np.ndarray

    def __len__(self) -> int:
        return len(self.temperature)

    def validate(self) -> None:
        n = len(self)
        for name in ("humidity", "wind_speed", "wind_direction"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"weather series {name} has mismatched length")
        if (self.wind_speed < 0).any():
            raise ValueError("wind speed must be nonnegative")
        if ((self.wind_direction < 0) | (self.wind_direction >= 360.0)).any():
            raise ValueError("wind direction must lie in [0, 360)")


def sample_weather(
    timesteps: int,
    rng: np.random.Generator,
    config: PhenomenonConfig | None = None,
) -> WeatherSeries:
    """Sample the global weather series.

    Temperature and humidity revert around 10 and 80; wind speed follows
    the emission procedure with exponent 2 and targets drawn from the
    configured wind range; wind direction steps uniformly in [-60, 60].
    """
    if timesteps < 1:
        raise ValueError("timesteps must be >= 1")
    cfg = config or PhenomenonConfig()
    temperature = mean_reverting_walk(rng.standard_normal(timesteps - 1), 10.0)
    humidity = mean_reverting_walk(rng.standard_normal(timesteps - 1), 80.0)
    walk, wind_deltas = abs_random_walk(rng.standard_normal(timesteps - 1))
    wind_targets = np.maximum(
        rng.normal(cfg.wind_scale_mean, cfg.wind_scale_sd, num_windows(timesteps)),
        cfg.wind_scale_floor,
    )
    wind_speed = rescale_windows(walk, 2.0, wind_targets)
    d0 = rng.uniform(0.0, 360.0)
    direction = modular_walk(rng.uniform(-60.0, 60.0, timesteps - 1), d0)
    series = WeatherSeries(
        temperature=temperature,
        humidity=humidity,
        wind_speed=wind_speed,
        wind_direction=direction,
        wind_targets=wind_targets,
        wind_deltas=wind_deltas,
    )
    series.validate()
    return series
