"""Synthetic air-quality sensor-network data with injected drift.

Generates emission, dispersion and measurement series for PM2.5/PM10
over a network of static and mobile sensors, injects weather-coupled
sensor drift with known ground truth, exports experiment-ready datasets,
and scores calibration models against the truth.
"""

__version__ = "0.1.0"

from .config import GenerationConfig, load_config  # noqa: F401
from .dataset import generate, make_split  # noqa: F401
from .evaluation import evaluate, fit_oracle, mse  # noqa: F401
