import numpy as np
import pytest
from hypothesis import settings

from aircal.config import GenerationConfig
from aircal import dataset

settings.register_profile("ci", max_examples=60, derandomize=True, deadline=None)
settings.load_profile("ci")


def small_config(seed: int = 11, timesteps: int = 900) -> GenerationConfig:
    cfg = GenerationConfig(master_seed=seed, timesteps=timesteps)
    cfg.scene.n_sources = 5
    cfg.scene.n_static = 6
    cfg.scene.n_mobile = 2
    return cfg


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """One small generated dataset directory shared across unit tests."""
    cfg = small_config()
    cfg.n_drift_realizations = 2
    out = tmp_path_factory.mktemp("small_ds")
    manifest = dataset.generate(cfg, out)
    return out, cfg, manifest
