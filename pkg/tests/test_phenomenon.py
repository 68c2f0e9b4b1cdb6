import numpy as np
import pytest

from aircal.config import WINDOW, PhenomenonConfig
from aircal.phenomenon import (
    DELTA_RANGE,
    abs_random_walk,
    mean_reverting_walk,
    modular_walk,
    num_windows,
    rescale_windows,
    sample_emission_series,
    sample_weather,
)
from aircal.seeds import substream


def test_walk_step_takes_absolute_value():
    # at x=0 a step of -0.5 lands at |0 - 0.5| = 0.5
    walk, deltas = abs_random_walk(np.array([-0.5]), x0=0.0)
    assert deltas[0] == -0.5
    assert walk[1] == 0.5


def test_walk_steps_clipped():
    walk, deltas = abs_random_walk(np.array([-5.0, 100.0, 0.3]), x0=1.0)
    assert deltas[0] == -1.0
    assert deltas[1] == 10.0
    assert (deltas >= DELTA_RANGE[0]).all() and (deltas <= DELTA_RANGE[1]).all()
    assert (walk >= 0).all()


def test_constant_window_scales_to_target():
    walk = np.ones(WINDOW)
    out = rescale_windows(walk, 7.0, np.array([42.0]))
    assert np.allclose(out, 42.0, rtol=0, atol=1e-12)
    # powering a constant-1 window leaves it at 1 before scaling
    assert np.allclose(walk**7.0, 1.0)


def test_rescale_zero_window_stays_zero():
    out = rescale_windows(np.zeros(WINDOW), 7.0, np.array([50.0]))
    assert (out == 0).all()


def test_single_window_when_t_equals_window():
    assert num_windows(WINDOW) == 1
    assert num_windows(WINDOW + 1) == 2


def test_emission_window_maxima_equal_targets(rng):
    res = sample_emission_series(3 * WINDOW + 100, rng)
    for i in range(num_windows(len(res.values))):
        seg = res.pre_sine[i * WINDOW : (i + 1) * WINDOW]
        assert abs(seg.max() - res.window_targets[i]) < 1e-9


def test_emission_deltas_in_range_and_values_nonnegative(rng):
    res = sample_emission_series(2 * WINDOW, rng)
    assert (res.deltas >= -1.0).all() and (res.deltas <= 10.0).all()
    assert (res.values >= 0).all()


def test_power_scale_preserves_argmax_per_window(rng):
    # power-then-scale is a monotone transform inside each window
    res = sample_emission_series(2 * WINDOW, rng)
    for i in range(2):
        lo, hi = i * WINDOW, (i + 1) * WINDOW
        assert np.argmax(res.walk[lo:hi]) == np.argmax(res.pre_sine[lo:hi])


def test_sine_overlay_bounded(rng):
    cfg = PhenomenonConfig(sine_amplitude=2.5)
    res = sample_emission_series(WINDOW, rng, cfg)
    assert (np.abs(res.values - res.pre_sine) <= 3 * 2.5 + 1e-12).all()


def test_emission_determinism():
    a = sample_emission_series(800, substream(3, "phenomenon/source-0/pm25"))
    b = sample_emission_series(800, substream(3, "phenomenon/source-0/pm25"))
    assert np.array_equal(a.values, b.values)


def test_mean_reversion_fixed_point():
    out = mean_reverting_walk(np.zeros(10), center=10.0)
    assert (out == 10.0).all()


def test_mean_reversion_pulls_towards_center():
    out = mean_reverting_walk(np.zeros(500), center=10.0, x0=50.0)
    assert abs(out[-1] - 10.0) < abs(out[0] - 10.0)


def test_modular_wrap():
    out = modular_walk(np.array([20.0]), x0=350.0)
    assert out[0] == 350.0
    assert np.isclose(out[1], 10.0)


def test_modular_walk_stays_in_range(rng):
    out = modular_walk(rng.uniform(-60, 60, 1000), x0=123.0)
    assert ((out >= 0) & (out < 360.0)).all()


def test_weather_series_properties(rng):
    w = sample_weather(2 * WINDOW, rng)
    assert (w.wind_speed >= 0).all()
    assert ((w.wind_direction >= 0) & (w.wind_direction < 360)).all()
    # wind speed follows the emission scaling: per-window max equals the draw
    for i in range(2):
        seg = w.wind_speed[i * WINDOW : (i + 1) * WINDOW]
        assert abs(seg.max() - w.wind_targets[i]) < 1e-9
    assert (w.wind_targets >= 0.5).all()
    assert (w.wind_deltas >= -1.0).all() and (w.wind_deltas <= 10.0).all()


def test_weather_determinism():
    a = sample_weather(900, substream(7, "phenomenon/weather"))
    b = sample_weather(900, substream(7, "phenomenon/weather"))
    for name in ("temperature", "humidity", "wind_speed", "wind_direction"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_rejects_empty_series(rng):
    with pytest.raises(ValueError):
        sample_emission_series(0, rng)
    with pytest.raises(ValueError):
        sample_weather(0, rng)
