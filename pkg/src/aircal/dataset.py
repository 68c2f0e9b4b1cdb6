"""End-to-end dataset generation, experiment splits and normalization.

Pipeline: scene -> emissions/weather -> true readings -> drift (once per
realization) -> context vectors.  Everything is derived from one master
seed through named substreams, so identical configs give byte-identical
output directories.

Exported files (comma-separated, one header row, timesteps with
incomplete lag history excluded):

* ``weather.csv``       timestep, temperature, humidity, wind_speed, wind_direction
* ``emissions.csv``     timestep, source_id, pm25, pm10
* ``readings_r<k>.csv`` full ground truth per sensor and timestep (evaluation only)
* ``drifted_r<k>.csv``  drifted readings only -- the sensor stream a
                        calibration model is allowed to see
* ``context_r<k>.csv``  per-sensor context vectors (model-visible)
* ``manifest.yaml``     config echo, scene, drift parameters, generation stats

Ground truth (true readings, drift targets, drift parameters) never
appears in the model-visible files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from .config import POLLUTANTS, WEEK, WINDOW, YEAR, GenerationConfig
from .context import CONTEXT_COLUMNS, compute_context
from .dispersion import DispersionResult, compute_true_readings
from .drift import DriftParams, apply_drift, history_series, sample_drift_params
from .phenomenon import WeatherSeries, sample_emission_series, sample_weather
from .scene import Scene, generate_scene, sensor_kinds
from .seeds import substream

MANIFEST_NAME = "manifest.yaml"
FORMAT_TAG = "aircal-dataset-1"
FLOAT_FORMAT = "%.10g"

EXPERIMENTS = ("standard", "limited", "drift-gen")

WEATHER_COLUMNS = ["timestep", "temperature", "humidity", "wind_speed", "wind_direction"]
READINGS_COLUMNS = [
    "timestep", "sensor_id", "kind", "x", "y",
    "pm25_true", "pm10_true", "pm25_drifted", "pm10_drifted",
    "pm25_drift_target", "pm10_drift_target",
]
DRIFTED_COLUMNS = ["timestep", "sensor_id", "kind", "x", "y", "pm25", "pm10"]


def readings_file(k: int) -> str:
    return f"readings_r{k}.csv"


def drifted_file(k: int) -> str:
    return f"drifted_r{k}.csv"


def context_file(k: int) -> str:
    return f"context_r{k}.csv"


def split_file(experiment: str) -> str:
    return f"split_{experiment}.csv"


def scaler_file(experiment: str) -> str:
    return f"scaler_{experiment}.json"


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

@dataclass
class BaseData:
    """Realization-independent simulation state."""

    config: GenerationConfig
    scene: Scene
    kinds: list[str]
    emissions: np.ndarray          # (n_sources, 2, T)
    weather: WeatherSeries
    dispersion: DispersionResult
    emission_clamps: int

    @property
    def warmup(self) -> int:
        return self.config.warmup

    @property
    def readings(self) -> np.ndarray:
        return self.dispersion.readings

    @property
    def positions(self) -> np.ndarray:
        return self.dispersion.positions


@dataclass
class RealizationData:
    index: int
    params: list[dict[str, DriftParams]]   # per sensor, per pollutant
    drifted: np.ndarray                    # (T, n_sensors, 2)
    target: np.ndarray
    context: np.ndarray                    # (T, n_sensors, n_context)
    magnitude_ok_fraction: float


def simulate_base(config: GenerationConfig) -> BaseData:
    config.validate()
    seed = config.master_seed
    timesteps = config.timesteps

    scene = generate_scene(config.scene, seed)
    emissions = np.empty((config.scene.n_sources, 2, timesteps))
    emission_clamps = 0
    for c in range(config.scene.n_sources):
        for p, name in enumerate(POLLUTANTS):
            result = sample_emission_series(
                timesteps, substream(seed, f"phenomenon/source-{c}/{name}"), config.phenomenon
            )
            emissions[c, p] = result.values
            emission_clamps += result.clamped
    weather = sample_weather(timesteps, substream(seed, "phenomenon/weather"), config.phenomenon)

    dispersion = compute_true_readings(scene, emissions, weather, config.denom_floor_factor)
    if dispersion.max_offset > config.warmup:
        raise RuntimeError(
            f"observed lag {dispersion.max_offset} exceeds warmup {config.warmup}"
        )
    return BaseData(
        config=config,
        scene=scene,
        kinds=sensor_kinds(scene),
        emissions=emissions,
        weather=weather,
        dispersion=dispersion,
        emission_clamps=emission_clamps,
    )


def simulate_realization(base: BaseData, index: int) -> RealizationData:
    cfg = base.config
    d = cfg.drift
    timesteps = cfg.timesteps
    n = base.scene.n_sensors
    y = base.readings
    usable = slice(base.warmup, None)

    drifted = np.empty_like(y)
    target = np.empty_like(y)
    params: list[dict[str, DriftParams]] = []
    ok = 0
    total = 0
    for i in range(n):
        per_sensor: dict[str, DriftParams] = {}
        for p, name in enumerate(POLLUTANTS):
            rng = substream(cfg.master_seed, f"drift/realization-{index}/sensor-{i}/{name}")
            dp = sample_drift_params(rng, timesteps)
            if d.force_beta is not None:
                dp.f_beta = float(d.force_beta)
            per_sensor[name] = dp
            series = apply_drift(
                y[:, i, p], dp, base.weather, history_series(y[:, i, p]), rng,
                sigma_eps=d.sigma_eps,
                weather_coupling=d.weather_coupling,
                force_tau=d.force_tau,
            )
            drifted[:, i, p] = series.drifted
            target[:, i, p] = series.target
            peak = y[usable, i, p].max()
            if peak > 0:
                ok += int((np.abs(target[usable, i, p]) / peak < 0.5).sum())
            total += timesteps - base.warmup
        params.append(per_sensor)

    weather_matrix = np.column_stack(
        [base.weather.temperature, base.weather.humidity,
         base.weather.wind_speed, base.weather.wind_direction]
    )
    ctx = compute_context(
        base.positions, drifted, weather_matrix, cfg.context.neighborhood_radius
    )
    return RealizationData(
        index=index,
        params=params,
        drifted=drifted,
        target=target,
        context=ctx,
        magnitude_ok_fraction=ok / total if total else 1.0,
    )


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------

def _write_csv(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def _long_index(base: BaseData) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(base.warmup, base.config.timesteps)
    n = base.scene.n_sensors
    return np.repeat(t, n), np.tile(np.arange(n), len(t))


def _readings_frame(base: BaseData, real: RealizationData) -> pd.DataFrame:
    t_col, s_col = _long_index(base)
    u = slice(base.warmup, None)
    flat = lambda a: a[u].reshape(-1)
    pos = base.positions[u].reshape(-1, 2)
    return pd.DataFrame(
        {
            "timestep": t_col,
            "sensor_id": s_col,
            "kind": np.array(base.kinds)[s_col],
            "x": pos[:, 0],
            "y": pos[:, 1],
            "pm25_true": flat(base.readings[..., 0]),
            "pm10_true": flat(base.readings[..., 1]),
            "pm25_drifted": flat(real.drifted[..., 0]),
            "pm10_drifted": flat(real.drifted[..., 1]),
            "pm25_drift_target": flat(real.target[..., 0]),
            "pm10_drift_target": flat(real.target[..., 1]),
        }
    )


def _drifted_frame(base: BaseData, real: RealizationData) -> pd.DataFrame:
    df = _readings_frame(base, real)
    out = df[["timestep", "sensor_id", "kind", "x", "y"]].copy()
    out["pm25"] = df["pm25_drifted"]
    out["pm10"] = df["pm10_drifted"]
    return out


def _context_frame(base: BaseData, real: RealizationData) -> pd.DataFrame:
    t_col, s_col = _long_index(base)
    ctx = real.context[base.warmup :].reshape(-1, len(CONTEXT_COLUMNS))
    df = pd.DataFrame(ctx, columns=CONTEXT_COLUMNS)
    df.insert(0, "sensor_id", s_col)
    df.insert(0, "timestep", t_col)
    for col in df.columns:
        if col.startswith("wind_dir_"):
            df[col] = df[col].astype(np.int64)
    return df


def _weather_frame(base: BaseData) -> pd.DataFrame:
    t = np.arange(base.warmup, base.config.timesteps)
    w = base.weather
    u = slice(base.warmup, None)
    return pd.DataFrame(
        {
            "timestep": t,
            "temperature": w.temperature[u],
            "humidity": w.humidity[u],
            "wind_speed": w.wind_speed[u],
            "wind_direction": w.wind_direction[u],
        }
    )


def _emissions_frame(base: BaseData) -> pd.DataFrame:
    timesteps = base.config.timesteps
    n_sources = len(base.scene.sources)
    t = np.arange(base.warmup, timesteps)
    u = slice(base.warmup, None)
    return pd.DataFrame(
        {
            "timestep": np.repeat(t, n_sources),
            "source_id": np.tile(np.arange(n_sources), len(t)),
            "pm25": base.emissions[:, 0, u].T.reshape(-1),
            "pm10": base.emissions[:, 1, u].T.reshape(-1),
        }
    )


def _scene_dict(scene: Scene) -> dict:
    return {
        "system_radius": float(scene.system_radius),
        "sources": [[float(x), float(y)] for x, y in scene.sources],
        "static_sensors": [[float(x), float(y)] for x, y in scene.static_sensors],
        "mobile_paths": [[[float(x), float(y)] for x, y in p] for p in scene.mobile_paths],
    }


def _range(a: np.ndarray) -> list[float]:
    return [float(a.min()), float(a.max())]


def generate(config: GenerationConfig, out_dir: str | Path) -> dict:
    """Run the full pipeline and write a dataset directory.

    Returns the manifest dictionary.  Realizations are simulated and
    written one at a time to bound memory.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = simulate_base(config)
    u = slice(base.warmup, None)

    files = ["weather.csv", "emissions.csv"]
    _write_csv(_weather_frame(base), out / "weather.csv")
    _write_csv(_emissions_frame(base), out / "emissions.csv")

    realization_params = []
    realization_stats = []
    for k in range(config.n_drift_realizations):
        real = simulate_realization(base, k)
        _write_csv(_readings_frame(base, real), out / readings_file(k))
        _write_csv(_drifted_frame(base, real), out / drifted_file(k))
        _write_csv(_context_frame(base, real), out / context_file(k))
        files += [readings_file(k), drifted_file(k), context_file(k)]
        realization_params.append(
            {
                "index": k,
                "sensors": [
                    {"sensor_id": i, **{p: real.params[i][p].to_dict() for p in POLLUTANTS}}
                    for i in range(base.scene.n_sensors)
                ],
            }
        )
        realization_stats.append(
            {
                "index": k,
                "drifted_range": {
                    "pm25": _range(real.drifted[u, :, 0]),
                    "pm10": _range(real.drifted[u, :, 1]),
                },
                "drift_magnitude_ok_fraction": float(real.magnitude_ok_fraction),
            }
        )
        del real

    n_pairs = base.config.timesteps * base.scene.n_sensors * len(base.scene.sources)
    manifest = {
        "format": FORMAT_TAG,
        "config": config.to_dict(),
        "warmup": base.warmup,
        "first_exported_timestep": base.warmup,
        "last_exported_timestep": config.timesteps - 1,
        "n_sensors": base.scene.n_sensors,
        "scene": _scene_dict(base.scene),
        "drift_params": realization_params,
        "stats": {
            "emissions": {
                "range": _range(base.emissions[:, :, u]),
                "negative_clamped": int(base.emission_clamps),
            },
            "weather": {
                "temperature": _range(base.weather.temperature),
                "humidity": _range(base.weather.humidity),
                "wind_speed": _range(base.weather.wind_speed),
            },
            "true_readings": {
                "pm25": _range(base.readings[u, :, 0]),
                "pm10": _range(base.readings[u, :, 1]),
            },
            "dispersion": {
                "max_offset": int(base.dispersion.max_offset),
                "denominator_clamps": int(base.dispersion.denom_clamps),
                "denominator_clamp_fraction": float(base.dispersion.denom_clamps / n_pairs),
            },
            "realizations": realization_stats,
        },
        "files": files,
    }
    with open(out / MANIFEST_NAME, "w") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=False)
    return manifest


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def load_manifest(data_dir: str | Path) -> dict:
    path = Path(data_dir) / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"no dataset manifest at {path}")
    with open(path) as fh:
        manifest = yaml.safe_load(fh)
    if manifest.get("format") != FORMAT_TAG:
        raise ValueError(f"unrecognized dataset format in {path}")
    return manifest


def load_readings(data_dir: str | Path, realization: int = 0) -> pd.DataFrame:
    return pd.read_csv(Path(data_dir) / readings_file(realization))


def load_drifted(data_dir: str | Path, realization: int = 0) -> pd.DataFrame:
    return pd.read_csv(Path(data_dir) / drifted_file(realization))


def load_context(data_dir: str | Path, realization: int = 0) -> pd.DataFrame:
    return pd.read_csv(Path(data_dir) / context_file(realization))


def load_weather(data_dir: str | Path) -> pd.DataFrame:
    return pd.read_csv(Path(data_dir) / "weather.csv")


# ---------------------------------------------------------------------------
# experiment splits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitEntry:
    realization: int
    t_start: int    # absolute timestep, inclusive
    t_end: int      # absolute timestep, exclusive


@dataclass
class ExperimentSplit:
    name: str
    train: list[SplitEntry]
    validation: list[SplitEntry]
    test: list[SplitEntry]

    def sets(self) -> dict[str, list[SplitEntry]]:
        return {"train": self.train, "validation": self.validation, "test": self.test}

    def realizations(self) -> list[int]:
        seen: list[int] = []
        for entries in self.sets().values():
            for e in entries:
                if e.realization not in seen:
                    seen.append(e.realization)
        return seen


class SplitError(ValueError):
    pass


def make_split(
    experiment: str, warmup: int, timesteps: int, n_realizations: int
) -> ExperimentSplit:
    """Partition the exported timeline for one of the three experiments.

    Months are exactly 720 timesteps counted from the first exported
    timestep; the dataset must cover 12 of them.
    """
    if experiment not in EXPERIMENTS:
        raise SplitError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    usable = timesteps - warmup
    if usable < YEAR:
        raise SplitError(
            f"dataset too short: {usable} usable timesteps, need {YEAR} (12 months)"
        )

    def months(a: int, b: int, realization: int = 0) -> SplitEntry:
        return SplitEntry(realization, warmup + a * WINDOW, warmup + b * WINDOW)

    if experiment == "standard":
        return ExperimentSplit(
            name=experiment,
            train=[months(0, 7)],
            validation=[months(7, 8)],
            test=[months(8, 12)],
        )
    if experiment == "limited":
        cut = warmup + 3 * WINDOW - 3 * WEEK
        return ExperimentSplit(
            name=experiment,
            train=[SplitEntry(0, warmup, cut)],
            validation=[SplitEntry(0, cut, warmup + 3 * WINDOW)],
            test=[months(3, 12)],
        )
    # drift generalization: train/validate on realizations 0-4, test on 5
    if n_realizations < 6:
        raise SplitError(
            f"experiment 'drift-gen' needs 6 drift realizations, dataset has {n_realizations}"
        )
    return ExperimentSplit(
        name=experiment,
        train=[months(0, 8, r) for r in range(5)],
        validation=[months(8, 12, r) for r in range(5)],
        test=[months(0, 12, 5)],
    )


def make_split_for(data_dir: str | Path, experiment: str) -> ExperimentSplit:
    m = load_manifest(data_dir)
    return make_split(
        experiment,
        warmup=m["warmup"],
        timesteps=m["config"]["timesteps"],
        n_realizations=m["config"]["n_drift_realizations"],
    )


def save_split(split: ExperimentSplit, data_dir: str | Path) -> Path:
    rows = []
    for set_name, entries in split.sets().items():
        for e in entries:
            rows.append((set_name, e.realization, e.t_start, e.t_end))
    df = pd.DataFrame(rows, columns=["set", "realization", "t_start", "t_end"])
    path = Path(data_dir) / split_file(split.name)
    df.to_csv(path, index=False)
    return path


def load_split(data_dir: str | Path, experiment: str) -> ExperimentSplit:
    path = Path(data_dir) / split_file(experiment)
    df = pd.read_csv(path)
    sets: dict[str, list[SplitEntry]] = {"train": [], "validation": [], "test": []}
    for row in df.itertuples(index=False):
        sets[row.set].append(SplitEntry(int(row.realization), int(row.t_start), int(row.t_end)))
    return ExperimentSplit(experiment, sets["train"], sets["validation"], sets["test"])


def select_entries(df: pd.DataFrame, entries: list[SplitEntry], realization: int) -> pd.Series:
    """Boolean mask for rows of one realization's frame covered by entries."""
    mask = pd.Series(False, index=df.index)
    for e in entries:
        if e.realization == realization:
            mask |= (df["timestep"] >= e.t_start) & (df["timestep"] < e.t_end)
    return mask


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

@dataclass
class Scaler:
    """Training-split normalization statistics.

    PM values divide by the training maximum drifted value per pollutant;
    weather features min-max scale with training extremes.  Test data
    reuses these statistics unclipped.
    """

    experiment: str
    pm25_scale: float
    pm10_scale: float
    weather_min: dict[str, float]
    weather_max: dict[str, float]

    def pm_scale(self, pollutant: str) -> float:
        return self.pm25_scale if pollutant == "pm25" else self.pm10_scale

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "pm25_scale": self.pm25_scale,
            "pm10_scale": self.pm10_scale,
            "weather_min": dict(self.weather_min),
            "weather_max": dict(self.weather_max),
        }

    def content_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def compute_scaler(data_dir: str | Path, split: ExperimentSplit) -> Scaler:
    pm_max = {"pm25": 0.0, "pm10": 0.0}
    wmin: dict[str, float] = {}
    wmax: dict[str, float] = {}
    weather = load_weather(data_dir)
    train_reals = sorted({e.realization for e in split.train})
    weather_mask = pd.Series(False, index=weather.index)
    for r in train_reals:
        df = load_drifted(data_dir, r)
        mask = select_entries(df, split.train, r)
        if not mask.any():
            continue
        for p in POLLUTANTS:
            pm_max[p] = max(pm_max[p], float(df.loc[mask, p].max()))
        weather_mask |= select_entries(weather, split.train, r)
    for feature in ("temperature", "humidity", "wind_speed"):
        vals = weather.loc[weather_mask, feature]
        wmin[feature] = float(vals.min())
        wmax[feature] = float(vals.max())
    for p in POLLUTANTS:
        if pm_max[p] <= 0:
            raise ValueError(f"training maximum for {p} is not positive; cannot normalize")
    return Scaler(split.name, pm_max["pm25"], pm_max["pm10"], wmin, wmax)


def save_scaler(scaler: Scaler, data_dir: str | Path) -> Path:
    path = Path(data_dir) / scaler_file(scaler.experiment)
    payload = scaler.to_dict()
    payload["hash"] = scaler.content_hash()
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_scaler(data_dir: str | Path, experiment: str) -> Scaler:
    path = Path(data_dir) / scaler_file(experiment)
    with open(path) as fh:
        payload = json.load(fh)
    payload.pop("hash", None)
    return Scaler(**payload)


def minmax_apply(values, vmin: float, vmax: float):
    """Apply a fitted min-max transform; a degenerate range maps to 0.5."""
    values = np.asarray(values, dtype=float)
    if vmax == vmin:
        return np.full_like(values, 0.5)
    return (values - vmin) / (vmax - vmin)


def normalize_readings(df: pd.DataFrame, scaler: Scaler) -> pd.DataFrame:
    out = df.copy()
    for p in POLLUTANTS:
        s = scaler.pm_scale(p)
        for suffix in ("true", "drifted", "drift_target"):
            col = f"{p}_{suffix}"
            if col in out.columns:
                out[col] = out[col] / s
        if p in out.columns:  # drifted-only frame
            out[p] = out[p] / s
    return out


def normalize_context(df: pd.DataFrame, scaler: Scaler) -> pd.DataFrame:
    out = df.copy()
    for p in POLLUTANTS:
        s = scaler.pm_scale(p)
        for col in out.columns:
            if col.startswith(f"{p}_area_"):
                out[col] = out[col] / s
    for feature in ("temperature", "humidity", "wind_speed"):
        out[feature] = minmax_apply(
            out[feature].to_numpy(), scaler.weather_min[feature], scaler.weather_max[feature]
        )
    return out


def normalize(
    readings: pd.DataFrame, context: pd.DataFrame, scaler: Scaler
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Normalized copies of a readings frame and a context frame."""
    return normalize_readings(readings, scaler), normalize_context(context, scaler)


def identity_mse(data_dir: str | Path, split: ExperimentSplit, scaler: Scaler) -> dict[str, float]:
    """MSE of the do-nothing calibrator (prediction = drifted reading).

    Equals the mean squared normalized drift target over the test set and
    is the baseline any calibration model must beat.
    """
    sq_sum = {p: 0.0 for p in POLLUTANTS}
    count = {p: 0 for p in POLLUTANTS}
    for r in sorted({e.realization for e in split.test}):
        df = load_readings(data_dir, r)
        mask = select_entries(df, split.test, r)
        for p in POLLUTANTS:
            target = df.loc[mask, f"{p}_drift_target"].to_numpy() / scaler.pm_scale(p)
            sq_sum[p] += float((target**2).sum())
            count[p] += len(target)
    result = {p: sq_sum[p] / count[p] for p in POLLUTANTS}
    result["all"] = sum(sq_sum.values()) / sum(count.values())
    return result
