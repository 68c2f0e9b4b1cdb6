import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aircal.config import SceneConfig
from aircal.dispersion import (
    compute_true_readings,
    measurement_coefficient,
    offset,
    scene_warmup,
    true_reading,
    wind_coefficient,
)
from aircal.phenomenon import WeatherSeries, sample_weather
from aircal.scene import Scene, generate_scene
from aircal.seeds import substream


def literal_coefficient(d, w, R):
    """Independent transcription of the attenuation formula, kept verbatim."""
    if w > 0:
        denom = R / 2 + R / 2 * (w + 1 + (math.sqrt(2) * w) ** 2)
    else:
        denom = R / 2 + R / 2 * (w + 1)
    return (10 * d / denom + 1) ** -1.5


def make_weather(timesteps, speed=0.0, direction=0.0):
    return WeatherSeries(
        temperature=np.full(timesteps, 10.0),
        humidity=np.full(timesteps, 80.0),
        wind_speed=np.full(timesteps, float(speed)),
        wind_direction=np.full(timesteps, float(direction)),
        wind_targets=np.array([]),
        wind_deltas=np.array([]),
    )


# ---------------------------------------------------------------------------
# offset
# ---------------------------------------------------------------------------

def test_offset_examples():
    assert offset(0.0, 100.0) == 0
    assert offset(40.0, 100.0) == 1
    assert offset(199.9, 100.0) == 4  # floor(4.9975)


@given(st.floats(min_value=0, max_value=250), st.floats(min_value=1, max_value=500))
def test_offset_is_floor_of_scaled_distance(d, radius):
    o = offset(d, radius)
    assert o == math.floor(d / (0.4 * radius))
    assert o >= 0


def test_offset_bound_inside_disk():
    # any two points within radius R are at most 2R apart -> lag <= 5
    assert offset(200.0, 100.0) == 5
    assert offset(199.999, 100.0) <= 5


def test_offset_rejects_negative():
    with pytest.raises(ValueError):
        offset(-1.0, 100.0)
    with pytest.raises(ValueError):
        offset(1.0, 0.0)


# ---------------------------------------------------------------------------
# wind coefficient
# ---------------------------------------------------------------------------

def test_wind_zero_speed_gives_zero():
    s = np.zeros(5)
    phi = np.linspace(0, 1, 5)
    assert wind_coefficient(s, phi, phi + 0.4, 4, 2) == 0.0


def test_wind_aligned_single_term():
    s = np.array([0.0, 2.0])
    phi = np.array([0.3, 0.7])
    assert wind_coefficient(s, phi, phi, 1, 0) == pytest.approx(2.0, abs=1e-12)


def test_wind_orthogonal_gives_zero():
    s = np.array([2.0])
    phi_sc = np.array([math.pi / 2])
    phi_w = np.array([0.0])
    assert wind_coefficient(s, phi_sc, phi_w, 0, 0) == pytest.approx(0.0, abs=1e-12)


def test_wind_precondition():
    with pytest.raises(ValueError):
        wind_coefficient(np.ones(3), np.zeros(3), np.zeros(3), 1, 2)


def test_wind_averages_lagged_terms():
    # two lags with alignment terms +1 and -1 average to 0
    s = np.array([1.0, 3.0])
    phi_sc = np.array([math.pi / 2, 0.0])   # t-1 orthogonal-opposite, t aligned
    phi_w = np.array([0.0, 0.0])
    # terms: tau=0 -> diff 0 -> +1 ; tau=1 -> diff pi/2 -> 0
    w = wind_coefficient(s, phi_sc, phi_w, 1, 1)
    assert w == pytest.approx(3.0 / 2 * (1.0 + 0.0), abs=1e-12)


@given(
    st.floats(min_value=-10, max_value=10),
    st.floats(min_value=-10, max_value=10),
    st.floats(min_value=0, max_value=20),
)
def test_wind_term_bounded_by_speed(phi_sc, phi_w, speed):
    w = wind_coefficient(np.array([speed]), np.array([phi_sc]), np.array([phi_w]), 0, 0)
    assert -speed - 1e-9 <= w <= speed + 1e-9


# ---------------------------------------------------------------------------
# measurement coefficient
# ---------------------------------------------------------------------------

def test_coefficient_zero_distance_is_one():
    for w in (-3.0, 0.0, 2.5):
        assert measurement_coefficient(0.0, w, 100.0) == pytest.approx(1.0, abs=1e-12)


def test_coefficient_frozen_values():
    assert measurement_coefficient(10.0, 0.0, 100.0) == pytest.approx(2.0 ** -1.5, abs=1e-9)
    assert measurement_coefficient(10.0, 1.0, 100.0) == pytest.approx(1.4 ** -1.5, abs=1e-9)


@given(
    st.floats(min_value=0, max_value=300),
    st.floats(min_value=-1.9, max_value=50),
)
def test_coefficient_matches_literal_formula(d, w):
    ours = measurement_coefficient(d, w, 100.0)
    ref = literal_coefficient(d, w, 100.0)
    assert ours == pytest.approx(ref, rel=1e-12, abs=1e-12)
    assert 0 < ours <= 1.0


@given(
    st.floats(min_value=0, max_value=200),
    st.floats(min_value=0, max_value=200),
    st.floats(min_value=-1.5, max_value=30),
)
def test_coefficient_monotone_in_distance(d1, d2, w):
    lo, hi = sorted((d1, d2))
    assert measurement_coefficient(lo, w, 100.0) >= measurement_coefficient(hi, w, 100.0)


def test_coefficient_clamps_adverse_wind():
    # at w <= -2 the raw denominator is nonpositive; the floor keeps the
    # coefficient defined and close to zero for d > 0
    a = measurement_coefficient(10.0, -2.5, 100.0)
    assert 0 < a < 1e-6
    assert measurement_coefficient(0.0, -2.5, 100.0) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# true readings
# ---------------------------------------------------------------------------

def test_colocated_sensor_reads_emission_directly():
    scene = Scene(
        system_radius=100.0,
        sources=np.array([[5.0, 5.0]]),
        static_sensors=np.array([[5.0, 5.0]]),
    )
    T = 10
    emissions = np.arange(2 * T, dtype=float).reshape(1, 2, T)
    weather = make_weather(T, speed=3.0, direction=123.0)
    r = true_reading(scene, emissions, weather, 0, "static", 7)
    assert r == pytest.approx(emissions[0, :, 7], abs=1e-12)


def test_two_colocated_sources_add():
    scene = Scene(
        system_radius=100.0,
        sources=np.array([[0.0, 0.0], [0.0, 0.0]]),
        static_sensors=np.array([[0.0, 0.0]]),
    )
    T = 8
    emissions = np.stack([np.ones((2, T)), 2 * np.ones((2, T))])
    weather = make_weather(T)
    r = true_reading(scene, emissions, weather, 0, "static", 5)
    assert r == pytest.approx([3.0, 3.0], abs=1e-12)


def test_single_source_distance_attenuation_no_wind():
    scene = Scene(
        system_radius=100.0,
        sources=np.array([[0.0, 0.0]]),
        static_sensors=np.array([[10.0, 0.0]]),
    )
    T = 6
    emissions = np.full((1, 2, T), 7.0)
    weather = make_weather(T, speed=0.0)
    r = true_reading(scene, emissions, weather, 0, "static", 5)
    assert r == pytest.approx(7.0 * 2.0 ** -1.5, abs=1e-9)


def test_warmup_region_rejected():
    scene = Scene(
        system_radius=100.0,
        sources=np.array([[60.0, 0.0]]),
        static_sensors=np.array([[-60.0, 0.0]]),
    )
    emissions = np.ones((1, 2, 10))
    weather = make_weather(10)
    with pytest.raises(ValueError):
        true_reading(scene, emissions, weather, 0, "static", scene_warmup(scene) - 1)


def test_additivity_over_sources(rng):
    cfg = SceneConfig(n_sources=3, n_static=2, n_mobile=1)
    scene = generate_scene(cfg, master_seed=21)
    T = 40
    emissions = rng.random((3, 2, T)) * 50
    weather = sample_weather(T, substream(21, "phenomenon/weather"))
    total = compute_true_readings(scene, emissions, weather)
    parts = []
    for c in range(3):
        sub = Scene(
            system_radius=scene.system_radius,
            sources=scene.sources[c : c + 1],
            static_sensors=scene.static_sensors,
            mobile_paths=scene.mobile_paths,
        )
        parts.append(compute_true_readings(sub, emissions[c : c + 1], weather).readings)
    assert np.allclose(total.readings, sum(parts), rtol=0, atol=1e-9)


def test_vectorized_matches_scalar_reference(rng):
    cfg = SceneConfig(n_sources=4, n_static=3, n_mobile=2)
    scene = generate_scene(cfg, master_seed=13)
    T = 30
    emissions = rng.random((4, 2, T)) * 40
    weather = sample_weather(T, substream(13, "phenomenon/weather"))
    result = compute_true_readings(scene, emissions, weather)
    warmup = scene_warmup(scene)
    kinds = ["static"] * 3 + ["mobile"] * 2
    for t in range(warmup, T):
        for i in range(5):
            ref = true_reading(scene, emissions, weather, i, kinds[i], t)
            assert np.allclose(result.readings[t, i], ref, rtol=1e-12, atol=1e-9)


def test_readings_nonnegative(small_dataset):
    out, cfg, manifest = small_dataset
    lo, hi = manifest["stats"]["true_readings"]["pm25"]
    assert lo >= 0
    lo10, _ = manifest["stats"]["true_readings"]["pm10"]
    assert lo10 >= 0
