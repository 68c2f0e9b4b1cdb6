"""Command-line interface.

Subcommands: generate, split, stats, oracle, evaluate, plot.  Every
command exits 0 on success and 1 with a diagnostic line on stderr on any
error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dataset, evaluation, plotting
from .config import GenerationConfig, load_config


def _cmd_generate(args) -> None:
    config = load_config(args.config) if args.config else GenerationConfig()
    manifest = dataset.generate(config, args.out)
    n_files = len(manifest["files"]) + 1
    print(f"wrote {n_files} files to {args.out} "
          f"(T={config.timesteps}, sensors={manifest['n_sensors']}, "
          f"realizations={config.n_drift_realizations})")


def _cmd_split(args) -> None:
    split = dataset.make_split_for(args.data, args.experiment)
    scaler = dataset.compute_scaler(args.data, split)
    split_path = dataset.save_split(split, args.data)
    scaler_path = dataset.save_scaler(scaler, args.data)
    print(f"wrote {split_path} and {scaler_path}")
    for name, entries in split.sets().items():
        spans = ", ".join(f"r{e.realization}[{e.t_start},{e.t_end})" for e in entries)
        print(f"  {name:10s} {spans}")


def _cmd_stats(args) -> None:
    manifest = dataset.load_manifest(args.data)
    stats = manifest["stats"]
    print(f"dataset: {args.data}")
    print(f"  timesteps: {manifest['config']['timesteps']} "
          f"(exported from {manifest['first_exported_timestep']})")
    print(f"  sensors: {manifest['n_sensors']}, "
          f"sources: {len(manifest['scene']['sources'])}, "
          f"realizations: {manifest['config']['n_drift_realizations']}")
    print(f"  emissions range: {stats['emissions']['range']}")
    for p in ("pm25", "pm10"):
        print(f"  true {p} range: {stats['true_readings'][p]}")
    disp = stats["dispersion"]
    print(f"  max lag: {disp['max_offset']}, "
          f"denominator clamps: {disp['denominator_clamps']} "
          f"({disp['denominator_clamp_fraction']:.2e} of pairs)")
    for r in stats["realizations"]:
        print(f"  realization {r['index']}: drift magnitude ok fraction "
              f"{r['drift_magnitude_ok_fraction']:.4f}")
    split = dataset.make_split_for(args.data, args.experiment)
    scaler = dataset.compute_scaler(args.data, split)
    ident = dataset.identity_mse(args.data, split, scaler)
    print(f"  identity-calibration MSE ({args.experiment}, normalized): "
          f"all={ident['all']:.6f} pm25={ident['pm25']:.6f} pm10={ident['pm10']:.6f}")


def _cmd_oracle(args) -> None:
    split = dataset.make_split_for(args.data, args.experiment)
    scaler = dataset.compute_scaler(args.data, split)
    pred = evaluation.oracle_predictions(args.data, split, scaler)
    evaluation.write_predictions(pred, args.out, scaler.content_hash())
    print(f"wrote {len(pred)} oracle predictions to {args.out}")


def _cmd_evaluate(args) -> None:
    result = evaluation.evaluate(args.pred, args.data, experiment=args.experiment)
    out_dir = Path(args.out) if args.out else Path(args.data)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_paths = evaluation.write_scatter(result, out_dir)
    png_paths = plotting.plot_scatter_result(result, out_dir)
    for line in result.summary_lines():
        print(line)
    for p in csv_paths + png_paths:
        print(f"wrote {p}")


def _cmd_plot(args) -> None:
    paths = plotting.render_report(args.data, args.out)
    if args.pred:
        result = evaluation.evaluate(args.pred, args.data, experiment=args.experiment)
        paths += plotting.plot_scatter_result(result, args.out)
    for p in paths:
        print(f"wrote {p}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aircal",
        description="Synthetic air-quality sensor network data with drift, plus calibration scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a dataset directory")
    p.add_argument("--config", help="YAML config (defaults used when omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("split", help="materialize an experiment split and its scaler")
    p.add_argument("--experiment", required=True, choices=dataset.EXPERIMENTS)
    p.add_argument("--data", required=True, help="dataset directory")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("stats", help="print generation statistics and baselines")
    p.add_argument("--data", required=True)
    p.add_argument("--experiment", default="standard", choices=dataset.EXPERIMENTS)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("oracle", help="run the least-squares reference calibrator")
    p.add_argument("--data", required=True)
    p.add_argument("--experiment", required=True, choices=dataset.EXPERIMENTS)
    p.add_argument("--out", required=True, help="predictions file to write")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("evaluate", help="score a predictions file")
    p.add_argument("--pred", required=True, help="predictions file")
    p.add_argument("--data", required=True)
    p.add_argument("--experiment", required=True, choices=dataset.EXPERIMENTS)
    p.add_argument("--out", help="directory for scatter files (default: data dir)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("plot", help="render report figures to files")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="directory for figures")
    p.add_argument("--pred", help="optional predictions file for drift scatter")
    p.add_argument("--experiment", default="standard", choices=dataset.EXPERIMENTS)
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
