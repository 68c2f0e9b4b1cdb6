from pathlib import Path

import yaml

from aircal.cli import main

from conftest import small_config


def write_config(path: Path, cfg) -> Path:
    from aircal.config import save_config

    save_config(cfg, path)
    return path


def test_generate_and_plot(tmp_path, capsys):
    cfg_path = write_config(tmp_path / "cfg.yaml", small_config(seed=2, timesteps=760))
    out = tmp_path / "ds"
    assert main(["generate", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "manifest.yaml").exists()
    assert (out / "readings_r0.csv").exists()

    figs = tmp_path / "figs"
    assert main(["plot", "--data", str(out), "--out", str(figs)]) == 0
    assert (figs / "scene.png").exists()
    assert (figs / "weather.png").exists()
    assert (figs / "sensor_series.png").exists()


def test_generate_with_defaults_config_file_optional(tmp_path):
    # tiny override file keeps the run fast but exercises the default path
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(
        yaml.safe_dump(
            {"timesteps": 760, "scene": {"n_sources": 3, "n_static": 3, "n_mobile": 1}}
        )
    )
    out = tmp_path / "ds"
    assert main(["generate", "--config", str(cfg_path), "--out", str(out)]) == 0


def test_bad_config_exits_nonzero(tmp_path, capsys):
    cfg_path = tmp_path / "bad.yaml"
    cfg_path.write_text("timesteps: 10\n")
    rc = main(["generate", "--config", str(cfg_path), "--out", str(tmp_path / "ds")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_split_on_short_dataset_fails_cleanly(tmp_path, capsys):
    cfg_path = write_config(tmp_path / "cfg.yaml", small_config(seed=2, timesteps=760))
    out = tmp_path / "ds"
    main(["generate", "--config", str(cfg_path), "--out", str(out)])
    rc = main(["split", "--experiment", "standard", "--data", str(out)])
    assert rc == 1
    assert "too short" in capsys.readouterr().err


def test_missing_dataset_fails_cleanly(tmp_path, capsys):
    rc = main(["stats", "--data", str(tmp_path / "nope")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err
