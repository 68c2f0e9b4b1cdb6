"""Static report figures rendered straight to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .config import POLLUTANTS
from .dataset import load_manifest, load_readings, load_weather
from .evaluation import CalibrationResult


def plot_scene(manifest: dict, path: str | Path) -> Path:
    """Map of sources, static sensors and mobile paths."""
    scene = manifest["scene"]
    fig, ax = plt.subplots(figsize=(6, 6))
    radius = scene["system_radius"]
    ax.add_patch(plt.Circle((0, 0), radius, fill=False, color="0.7", linestyle="--"))
    src = np.array(scene["sources"])
    ax.scatter(src[:, 0], src[:, 1], marker="^", c="tab:red", label="sources")
    static = np.array(scene["static_sensors"])
    if len(static):
        ax.scatter(static[:, 0], static[:, 1], marker="o", c="tab:blue", label="static sensors")
    for i, p in enumerate(scene["mobile_paths"]):
        p = np.array(p)
        loop = np.vstack([p, p[:1]])
        ax.plot(loop[:, 0], loop[:, 1], "-", lw=0.8, c="tab:green",
                label="mobile paths" if i == 0 else None)
        ax.scatter(p[:, 0], p[:, 1], s=8, c="tab:green")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("scene layout")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_weather(data_dir: str | Path, path: str | Path) -> Path:
    weather = load_weather(data_dir)
    fig, axes = plt.subplots(4, 1, figsize=(10, 8), sharex=True)
    for ax, col in zip(axes, ["temperature", "humidity", "wind_speed", "wind_direction"]):
        ax.plot(weather["timestep"], weather[col], lw=0.4)
        ax.set_ylabel(col)
    axes[-1].set_xlabel("timestep")
    fig.suptitle("weather series")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_sensor_series(
    data_dir: str | Path,
    path: str | Path,
    sensor_id: int = 0,
    realization: int = 0,
) -> Path:
    """True versus drifted readings of one sensor over the full run."""
    df = load_readings(data_dir, realization)
    df = df[df["sensor_id"] == sensor_id]
    fig, axes = plt.subplots(2, 1, figsize=(10, 6), sharex=True)
    for ax, p, label in zip(axes, POLLUTANTS, ["PM2.5", "PM10"]):
        ax.plot(df["timestep"], df[f"{p}_true"], lw=0.4, label="true")
        ax.plot(df["timestep"], df[f"{p}_drifted"], lw=0.4, alpha=0.7, label="drifted")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
    axes[-1].set_xlabel("timestep")
    fig.suptitle(f"sensor {sensor_id}, realization {realization}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_scatter_result(result: CalibrationResult, out_dir: str | Path) -> list[Path]:
    """Predicted-vs-true drift scatter, one image per pollutant."""
    paths = []
    for p, label in zip(POLLUTANTS, ["PM2.5", "PM10"]):
        pairs = result.scatter[p]
        path = Path(out_dir) / f"scatter_{p}.png"
        paths.append(_scatter_figure(pairs[:, 0], pairs[:, 1],
                                     f"{label} drift ({result.experiment})", path))
    return paths


def plot_scatter_csv(csv_path: str | Path, path: str | Path, title: str = "drift") -> Path:
    df = pd.read_csv(csv_path)
    return _scatter_figure(df["true_drift"].to_numpy(), df["predicted_drift"].to_numpy(), title, path)


def _scatter_figure(true_drift, predicted_drift, title: str, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(true_drift, predicted_drift, s=2, alpha=0.25, linewidths=0)
    lims = [
        min(true_drift.min(), predicted_drift.min()),
        max(true_drift.max(), predicted_drift.max()),
    ]
    ax.plot(lims, lims, "k--", lw=0.8)
    ax.set_xlabel("true drift")
    ax.set_ylabel("predicted drift")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_report(data_dir: str | Path, out_dir: str | Path) -> list[Path]:
    """Render the standard dataset report figures into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest(data_dir)
    paths = [
        plot_scene(manifest, out / "scene.png"),
        plot_weather(data_dir, out / "weather.png"),
        plot_sensor_series(data_dir, out / "sensor_series.png"),
    ]
    return paths
