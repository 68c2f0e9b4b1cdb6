"""Scoring of calibration predictions against simulated ground truth.

Predictions are calibrated readings in normalized units, one row per test
(timestep, sensor).  Scoring reports mean squared error overall, per
pollutant and per sensor, and exports subsampled scatter pairs of true
versus predicted drift for plotting.

A ground-truth-aware per-sensor least-squares calibrator is included as a
reference: it regresses the drifted output on the true reading (the
linear drift relation), then inverts the fit to calibrate.  It is an
oracle -- real deployments have no truth -- and serves as a sanity bound
and self-test for the pipeline.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .config import POLLUTANTS
from .dataset import (
    ExperimentSplit,
    Scaler,
    compute_scaler,
    load_manifest,
    load_readings,
    make_split_for,
    select_entries,
)
from .seeds import substream

SCATTER_LIMIT = 20_000
PREDICTION_COLUMNS = ["timestep", "sensor_id", "pm25", "pm10"]


def mse(predicted, truth) -> float:
    """Mean squared difference of two equal-length sequences."""
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.shape != truth.shape:
        raise ValueError(f"length mismatch: {predicted.shape} vs {truth.shape}")
    if predicted.size == 0:
        raise ValueError("need at least one sample")
    return float(np.mean((predicted - truth) ** 2))


# ---------------------------------------------------------------------------
# least-squares oracle
# ---------------------------------------------------------------------------

@dataclass
class LinearFit:
    slope: float
    intercept: float
    mean_true: float    # fallback prediction when the fit is degenerate

    @property
    def degenerate(self) -> bool:
        return self.slope == 0.0


@dataclass
class OracleModel:
    """Per-sensor, per-pollutant linear calibration fits."""

    fits: dict[tuple[int, str], LinearFit] = field(default_factory=dict)

    def calibrate(self, sensor_id: int, pollutant: str, drifted):
        """Invert the fitted drift relation to estimate true readings."""
        fit = self.fits[(sensor_id, pollutant)]
        drifted = np.asarray(drifted, dtype=float)
        if fit.degenerate or abs(fit.slope) < 1e-12:
            return np.full_like(drifted, fit.mean_true)
        return (drifted - fit.intercept) / fit.slope


def fit_oracle(train: pd.DataFrame) -> OracleModel:
    """Least-squares fit of drifted on true, per sensor and pollutant.

    ``train`` needs columns sensor_id, <p>_true and <p>_drifted.  A
    constant true series cannot identify a slope; those sensors fall back
    to an intercept-only model.
    """
    model = OracleModel()
    for sensor_id, group in train.groupby("sensor_id"):
        for p in POLLUTANTS:
            true = group[f"{p}_true"].to_numpy(dtype=float)
            drifted = group[f"{p}_drifted"].to_numpy(dtype=float)
            if len(true) < 2:
                raise ValueError(f"sensor {sensor_id}/{p}: need >= 2 training points")
            t_mean = true.mean()
            d_mean = drifted.mean()
            var = float(((true - t_mean) ** 2).sum())
            if var < 1e-12:
                fit = LinearFit(0.0, d_mean, t_mean)
            else:
                slope = float(((true - t_mean) * (drifted - d_mean)).sum()) / var
                fit = LinearFit(slope, d_mean - slope * t_mean, t_mean)
            model.fits[(int(sensor_id), p)] = fit
    return model


def oracle_predictions(
    data_dir: str | Path, split: ExperimentSplit, scaler: Scaler
) -> pd.DataFrame:
    """Fit the oracle on the split's training set and calibrate its test set.

    Returns a normalized predictions frame in the standard format.
    """
    frames = []
    train_parts = []
    for r in sorted({e.realization for e in split.train}):
        df = load_readings(data_dir, r)
        train_parts.append(df.loc[select_entries(df, split.train, r)])
    model = fit_oracle(pd.concat(train_parts, ignore_index=True))

    for r in sorted({e.realization for e in split.test}):
        df = load_readings(data_dir, r)
        test = df.loc[select_entries(df, split.test, r)]
        out = test[["timestep", "sensor_id"]].copy()
        for p in POLLUTANTS:
            pred = np.empty(len(test))
            for sensor_id, group in test.groupby("sensor_id"):
                idx = test.index.get_indexer(group.index)
                pred[idx] = model.calibrate(
                    int(sensor_id), p, group[f"{p}_drifted"].to_numpy()
                )
            out[p] = pred / scaler.pm_scale(p)
        frames.append(out)
    return pd.concat(frames, ignore_index=True)


# ---------------------------------------------------------------------------
# prediction files
# ---------------------------------------------------------------------------

def write_predictions(df: pd.DataFrame, path: str | Path, scaler_hash: str | None = None) -> None:
    """Write a predictions file, embedding the scaler hash as a comment."""
    missing = [c for c in PREDICTION_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"predictions frame missing columns {missing}")
    path = Path(path)
    with open(path, "w") as fh:
        if scaler_hash:
            fh.write(f"# scaler_hash: {scaler_hash}\n")
        df[PREDICTION_COLUMNS].to_csv(fh, index=False)


def read_predictions(path: str | Path) -> tuple[pd.DataFrame, str | None]:
    declared = None
    with open(path) as fh:
        first = fh.readline()
        if first.startswith("#"):
            if "scaler_hash:" in first:
                declared = first.split("scaler_hash:", 1)[1].strip()
        else:
            fh.seek(0)
        df = pd.read_csv(fh)
    missing = [c for c in PREDICTION_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"predictions file {path} missing columns {missing}")
    return df, declared


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass
class CalibrationResult:
    experiment: str
    mse_all: float
    mse_per_pollutant: dict[str, float]
    mse_per_sensor: dict[str, dict[int, float]]
    drift_mse_all: float
    n_scored: int
    scatter: dict[str, np.ndarray]   # pollutant -> (n, 2) [true_drift, predicted_drift]

    def summary_lines(self) -> list[str]:
        lines = [
            f"experiment: {self.experiment} ({self.n_scored} scored samples)",
            f"{'':12s}{'All':>12s}{'PM2.5':>12s}{'PM10':>12s}",
            (
                f"{'MSE':12s}{self.mse_all:>12.6f}"
                f"{self.mse_per_pollutant['pm25']:>12.6f}"
                f"{self.mse_per_pollutant['pm10']:>12.6f}"
            ),
            f"drift-target MSE (same residuals): {self.drift_mse_all:.6f}",
        ]
        return lines


def evaluate(
    predictions_path: str | Path,
    data_dir: str | Path,
    experiment: str | None = None,
    split: ExperimentSplit | None = None,
    scaler: Scaler | None = None,
    scatter_limit: int = SCATTER_LIMIT,
) -> CalibrationResult:
    """Score a predictions file over a split's test set.

    Predictions must cover every test (timestep, sensor) pair exactly
    once, in normalized units; extra rows outside the test set are
    ignored.  A scaler hash declared in the file must match the split's
    scaler.
    """
    if split is None:
        if experiment is None:
            raise ValueError("pass either experiment or an explicit split")
        split = make_split_for(data_dir, experiment)
    if scaler is None:
        scaler = compute_scaler(data_dir, split)

    pred, declared_hash = read_predictions(predictions_path)
    if declared_hash is not None and declared_hash != scaler.content_hash():
        raise ValueError(
            f"predictions were normalized with scaler {declared_hash}, "
            f"expected {scaler.content_hash()}: unit mismatch"
        )
    if declared_hash is None:
        print("warning: predictions file declares no scaler hash", file=sys.stderr)
    if pred.duplicated(["timestep", "sensor_id"]).any():
        raise ValueError("duplicate (timestep, sensor_id) rows in predictions")

    master_seed = load_manifest(data_dir)["config"]["master_seed"]
    pred = pred.set_index(["timestep", "sensor_id"])

    sq = {p: 0.0 for p in POLLUTANTS}
    count = {p: 0 for p in POLLUTANTS}
    per_sensor_sq: dict[str, dict[int, float]] = {p: {} for p in POLLUTANTS}
    per_sensor_n: dict[str, dict[int, int]] = {p: {} for p in POLLUTANTS}
    scatter_true: dict[str, list[np.ndarray]] = {p: [] for p in POLLUTANTS}
    scatter_pred: dict[str, list[np.ndarray]] = {p: [] for p in POLLUTANTS}

    for r in sorted({e.realization for e in split.test}):
        truth = load_readings(data_dir, r)
        truth = truth.loc[select_entries(truth, split.test, r)]
        keys = pd.MultiIndex.from_frame(truth[["timestep", "sensor_id"]])
        missing = ~keys.isin(pred.index)
        if missing.any():
            raise ValueError(
                f"predictions missing {int(missing.sum())} of {len(keys)} test rows "
                f"(realization {r})"
            )
        rows = pred.loc[keys]
        sensors = truth["sensor_id"].to_numpy()
        for p in POLLUTANTS:
            scale = scaler.pm_scale(p)
            true_norm = truth[f"{p}_true"].to_numpy() / scale
            drifted_norm = truth[f"{p}_drifted"].to_numpy() / scale
            predicted = rows[p].to_numpy(dtype=float)
            err = predicted - true_norm
            sq[p] += float((err**2).sum())
            count[p] += len(err)
            frame = pd.DataFrame({"sensor": sensors, "sq": err**2})
            for sensor_id, group in frame.groupby("sensor"):
                per_sensor_sq[p][int(sensor_id)] = per_sensor_sq[p].get(int(sensor_id), 0.0) + float(group["sq"].sum())
                per_sensor_n[p][int(sensor_id)] = per_sensor_n[p].get(int(sensor_id), 0) + len(group)
            scatter_true[p].append(drifted_norm - true_norm)
            scatter_pred[p].append(drifted_norm - predicted)

    scatter = {}
    for p in POLLUTANTS:
        td = np.concatenate(scatter_true[p])
        pdft = np.concatenate(scatter_pred[p])
        if len(td) > scatter_limit:
            rng = substream(master_seed, f"evaluation/scatter/{split.name}/{p}")
            idx = rng.choice(len(td), size=scatter_limit, replace=False)
            idx.sort()
            td, pdft = td[idx], pdft[idx]
        scatter[p] = np.column_stack([td, pdft])

    per_pollutant = {p: sq[p] / count[p] for p in POLLUTANTS}
    mse_all = sum(sq.values()) / sum(count.values())
    per_sensor = {
        p: {s: per_sensor_sq[p][s] / per_sensor_n[p][s] for s in sorted(per_sensor_sq[p])}
        for p in POLLUTANTS
    }
    # predicted drift differs from true drift by the same residual, so the
    # drift-target MSE coincides with the calibrated-reading MSE
    return CalibrationResult(
        experiment=split.name,
        mse_all=mse_all,
        mse_per_pollutant=per_pollutant,
        mse_per_sensor=per_sensor,
        drift_mse_all=mse_all,
        n_scored=sum(count.values()),
        scatter=scatter,
    )


def write_scatter(result: CalibrationResult, out_dir: str | Path) -> list[Path]:
    paths = []
    for p in POLLUTANTS:
        path = Path(out_dir) / f"scatter_{p}.csv"
        pd.DataFrame(result.scatter[p], columns=["true_drift", "predicted_drift"]).to_csv(
            path, index=False, float_format="%.10g"
        )
        paths.append(path)
    return paths
