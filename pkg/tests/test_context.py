import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aircal.context import (
    CONTEXT_COLUMNS,
    N_AREAS,
    N_SECTORS,
    compute_context,
    context_vector,
    partition_neighborhood,
    sector_index,
    wind_direction_onehot,
)

RN = 40.0


def test_context_column_layout():
    assert len(CONTEXT_COLUMNS) == 43
    assert CONTEXT_COLUMNS[:16] == [f"pm25_area_{i:02d}" for i in range(16)]
    assert CONTEXT_COLUMNS[32:35] == ["temperature", "humidity", "wind_speed"]
    assert CONTEXT_COLUMNS[35:] == [f"wind_dir_{s}" for s in range(8)]


def test_sector_is_centered_on_zero():
    assert sector_index(0.0) == 0
    assert sector_index(-22.4) == 0
    assert sector_index(22.5) == 1
    assert sector_index(90.0) == 2
    assert sector_index(350.0) == 0
    assert sector_index(337.5) == 0
    assert sector_index(337.4) == 7


@given(st.floats(min_value=-720, max_value=720))
def test_sector_always_valid(angle):
    assert 0 <= sector_index(angle) < N_SECTORS


def test_colocated_point_in_inner_sector_zero():
    areas = partition_neighborhood(np.zeros(2), np.zeros((1, 2)), RN)
    assert areas[0] == 0


def test_outer_ring_sector_two():
    # angle 90 degrees at three quarters of the radius: sector 2, outer ring
    areas = partition_neighborhood(np.zeros(2), np.array([[0.0, 0.75 * RN]]), RN)
    assert areas[0] == 2 + 8


def test_point_outside_radius_unassigned():
    areas = partition_neighborhood(np.zeros(2), np.array([[2 * RN, 0.0]]), RN)
    assert areas[0] == -1


def test_ring_boundary_is_outer():
    areas = partition_neighborhood(np.zeros(2), np.array([[RN / 2, 0.0]]), RN)
    assert areas[0] == 8


def test_onehot_sums_to_one():
    for d in (0.0, 45.0, 123.0, 359.9):
        onehot = wind_direction_onehot(d)
        assert onehot.sum() == 1.0
        assert onehot[sector_index(d)] == 1.0


def weather_row():
    return (11.0, 78.0, 3.0, 90.0)


def test_single_neighbor_mean_is_its_reading():
    positions = np.array([[0.0, 0.0], [10.0, 0.0]])
    readings = np.array([[5.0, 6.0], [20.0, 30.0]])
    vec = context_vector(0, positions, readings, weather_row(), RN)
    areas = partition_neighborhood(positions[0], positions[1:], RN)
    a = areas[0]
    assert vec[a] == 20.0
    assert vec[16 + a] == 30.0
    assert vec[32:35] == pytest.approx([11.0, 78.0, 3.0])
    assert vec[35:].sum() == 1.0


def test_no_neighbors_gives_zero_areas():
    positions = np.array([[0.0, 0.0], [500.0, 500.0]])
    readings = np.array([[5.0, 6.0], [20.0, 30.0]])
    vec = context_vector(0, positions, readings, weather_row(), RN)
    assert (vec[:32] == 0).all()
    assert vec[32:35] == pytest.approx([11.0, 78.0, 3.0])


def test_two_neighbors_same_area_average():
    positions = np.array([[0.0, 0.0], [10.0, 0.0], [12.0, 0.0]])
    readings = np.array([[0.0, 0.0], [10.0, 40.0], [20.0, 60.0]])
    vec = context_vector(0, positions, readings, weather_row(), RN)
    assert vec[0] == pytest.approx(15.0)
    assert vec[16] == pytest.approx(50.0)


def test_center_sensor_excluded_from_own_means():
    positions = np.array([[0.0, 0.0], [1.0, 0.0]])
    readings = np.array([[999.0, 999.0], [10.0, 20.0]])
    vec = context_vector(0, positions, readings, weather_row(), RN)
    assert vec[0] == 10.0  # own 999 reading not mixed in


def test_permutation_invariance(rng):
    n = 12
    positions = rng.uniform(-60, 60, (n, 2))
    readings = rng.random((n, 2)) * 50
    vec = context_vector(3, positions, readings, weather_row(), RN)
    perm = rng.permutation(n)
    inv = np.argsort(perm)
    vec_p = context_vector(inv[3], positions[perm], readings[perm], weather_row(), RN)
    assert np.allclose(vec, vec_p, rtol=0, atol=1e-9)


def test_count_weighted_means_reconstruct_sums(rng):
    n = 15
    positions = rng.uniform(-50, 50, (n, 2))
    readings = rng.random((n, 2)) * 50
    center = 4
    vec = context_vector(center, positions, readings, weather_row(), RN)
    others = [j for j in range(n) if j != center]
    areas = partition_neighborhood(positions[center], positions[others], RN)
    for p, base in ((0, 0), (1, 16)):
        total = 0.0
        for a in range(N_AREAS):
            count = int((areas == a).sum())
            total += count * vec[base + a]
        expected = sum(readings[others[k], p] for k in range(len(others)) if areas[k] >= 0)
        assert total == pytest.approx(expected, abs=1e-9)


def test_vectorized_context_matches_reference(rng):
    T, n = 7, 9
    positions = rng.uniform(-60, 60, (T, n, 2))
    readings = rng.random((T, n, 2)) * 50
    weather = np.column_stack(
        [rng.normal(10, 2, T), rng.normal(80, 3, T), rng.random(T) * 5, rng.uniform(0, 360, T)]
    )
    ctx = compute_context(positions, readings, weather, RN, chunk=3)
    for t in range(T):
        for i in range(n):
            ref = context_vector(i, positions[t], readings[t], tuple(weather[t]), RN)
            assert np.allclose(ctx[t, i], ref, rtol=0, atol=1e-9)


def test_mobile_sensor_changes_area_over_time():
    # one neighbor moving across the boundary contributes to different areas
    positions = np.array(
        [
            [[0.0, 0.0], [10.0, 0.0]],
            [[0.0, 0.0], [0.0, 10.0]],
        ]
    )
    readings = np.full((2, 2, 2), 8.0)
    weather = np.tile([10.0, 80.0, 1.0, 0.0], (2, 1))
    ctx = compute_context(positions, readings, weather, RN)
    assert ctx[0, 0, 0] == 8.0 and ctx[0, 0, 2] == 0.0
    assert ctx[1, 0, 2] == 8.0 and ctx[1, 0, 0] == 0.0
