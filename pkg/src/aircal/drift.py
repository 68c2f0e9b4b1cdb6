"""Per-sensor, time-growing, weather-coupled drift injection.

A drifted output blends the true reading with a multiplicative factor, a
power distortion and an additive constant, each modulated by scaled
temperature, humidity and reading-history series.  The blend weight (the
temporal ramp) grows linearly from 0 and clips at 1, so a fresh sensor
reports the truth and an aged one the fully drifted form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phenomenon import WeatherSeries

ERROR_SOURCES = ("alpha", "beta", "const")
DRIFT_INPUTS = ("temperature", "humidity", "history")

# Parent intervals the per-sensor scaling sub-ranges are drawn from.
PARENT_RANGES = {
    "alpha": (0.95, 1.05),
    "beta": (0.99, 1.01),
    "const": (-0.2, 0.2),
}


@dataclass
class DriftParams:
    """Drift parameters of one sensor channel."""

    f_alpha: float
    f_beta: float
    f_c: float
    ramp_rate: float
    # scale_ranges[error_source][input] = (lo, hi) sub-interval of the parent
    scale_ranges: dict[str, dict[str, tuple[float, float]]]

    def validate(self) -> None:
        if self.ramp_rate <= 0:
            raise ValueError("ramp_rate must be > 0")
        for src in ERROR_SOURCES:
            parent_lo, parent_hi = PARENT_RANGES[src]
            for inp in DRIFT_INPUTS:
                lo, hi = self.scale_ranges[src][inp]
                if not (parent_lo - 1e-12 <= lo <= hi <= parent_hi + 1e-12):
                    raise ValueError(f"scale range {src}/{inp} = ({lo}, {hi}) outside parent")

    def to_dict(self) -> dict:
        return {
            "f_alpha": self.f_alpha,
            "f_beta": self.f_beta,
            "f_c": self.f_c,
            "ramp_rate": self.ramp_rate,
            "scale_ranges": {
                src: {inp: list(self.scale_ranges[src][inp]) for inp in DRIFT_INPUTS}
                for src in ERROR_SOURCES
            },
        }


def sample_drift_params(rng: np.random.Generator, timesteps: int) -> DriftParams:
    """Draw one sensor channel's drift parameters.

    The ramp rate lands in [1/(2T), 2/T], so full drift is reached
    somewhere between half a run and never (clipped at 1).  Each scaling
    sub-range comes from ordering two uniform draws in its parent interval.
    """
    f_alpha = rng.normal(1.0, 0.1)
    f_beta = rng.normal(1.0, 0.02)
    f_c = rng.normal(0.0, 2.0)
    ramp_rate = rng.uniform(1.0 / (2 * timesteps), 2.0 / timesteps)
    ranges: dict[str, dict[str, tuple[float, float]]] = {}
    for src in ERROR_SOURCES:
        lo, hi = PARENT_RANGES[src]
        ranges[src] = {}
        for inp in DRIFT_INPUTS:
            a, b = np.sort(rng.uniform(lo, hi, 2))
            ranges[src][inp] = (float(a), float(b))
    params = DriftParams(
        f_alpha=float(f_alpha),
        f_beta=float(f_beta),
        f_c=float(f_c),
        ramp_rate=float(ramp_rate),
        scale_ranges=ranges,
    )
    params.validate()
    return params


def scale_series(values: np.ndarray, target_range: tuple[float, float]) -> np.ndarray:
    """Min-max map a series onto [lo, hi]; constant input maps to the midpoint."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("values must be nonempty")
    lo, hi = target_range
    vmin = values.min()
    vmax = values.max()
    if vmax == vmin:
        return np.full_like(values, (lo + hi) / 2.0)
    return lo + (values - vmin) * ((hi - lo) / (vmax - vmin))


def drifted_value(y: float, tau: float, alpha: float, beta: float, c: float, eps: float = 0.0) -> float:
    """Scalar reference for one drifted sample."""
    return ((1.0 - tau) + tau * alpha) * y ** ((1.0 - tau) + tau * beta) + tau * c + eps


def history_series(y: np.ndarray) -> np.ndarray:
    """Previous reading at each step; the first step sees itself."""
    h = np.empty_like(y)
    h[0] = y[0]
    h[1:] = y[:-1]
    return h


def drift_factor_series(
    params: DriftParams,
    weather: WeatherSeries,
    history: np.ndarray,
    weather_coupling: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-timestep (alpha_t, beta_t, c_t).

    Multiplicative modulation for alpha and beta, additive for the
    constant.  With coupling disabled the factors collapse to the
    independent per-sensor values.
    """
    n = len(history)
    if weather_coupling:
        inputs = {
            "temperature": weather.temperature,
            "humidity": weather.humidity,
            "history": history,
        }
        scaled = {
            src: {inp: scale_series(inputs[inp], params.scale_ranges[src][inp]) for inp in DRIFT_INPUTS}
            for src in ERROR_SOURCES
        }
        alpha = params.f_alpha * scaled["alpha"]["temperature"] * scaled["alpha"]["humidity"] * scaled["alpha"]["history"]
        beta = params.f_beta * scaled["beta"]["temperature"] * scaled["beta"]["humidity"] * scaled["beta"]["history"]
        const = params.f_c + scaled["const"]["temperature"] + scaled["const"]["humidity"] + scaled["const"]["history"]
    else:
        alpha = np.full(n, params.f_alpha)
        beta = np.full(n, params.f_beta)
        const = np.full(n, params.f_c)
    return alpha, beta, const


@dataclass
class DriftedSeries:
    drifted: np.ndarray
    target: np.ndarray        # drifted minus true
    tau: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    const: np.ndarray


def apply_drift(
    y: np.ndarray,
    params: DriftParams,
    weather: WeatherSeries,
    history: np.ndarray,
    rng: np.random.Generator,
    sigma_eps: float = 0.05,
    weather_coupling: bool = True,
    force_tau: float | None = None,
) -> DriftedSeries:
    """Drift one sensor channel's true series.

    ``history`` must be aligned with ``y`` (see `history_series`).  With a
    zero ramp and zero noise the output equals the input bit for bit.
    """
    y = np.asarray(y, dtype=float)
    if len(weather) != len(y) or len(history) != len(y):
        raise ValueError("series lengths must match")
    if (y < 0).any():
        raise ValueError("true readings must be nonnegative before drifting")

    alpha, beta, const = drift_factor_series(params, weather, history, weather_coupling)
    t = np.arange(len(y), dtype=float)
    if force_tau is None:
        tau = np.minimum(params.ramp_rate * t, 1.0)
    else:
        tau = np.full(len(y), float(force_tau))
    eps = rng.normal(0.0, sigma_eps, len(y)) if sigma_eps > 0 else np.zeros(len(y))

    gain = (1.0 - tau) + tau * alpha
    exponent = (1.0 - tau) + tau * beta
    drifted = gain * y ** exponent + tau * const + eps
    return DriftedSeries(
        drifted=drifted,
        target=drifted - y,
        tau=tau,
        alpha=alpha,
        beta=beta,
        const=const,
    )
