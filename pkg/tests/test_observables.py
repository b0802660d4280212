import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trapheat.integrate import TimeGrid, evolve
from trapheat.model import LevelDistribution, TrapModel, build_generator, initial_distribution, point_distribution
from trapheat.observables import conditional_moments, reduce_series, survival


def test_survival_basic():
    assert survival(initial_distribution(TrapModel(100), 10)) == 1.0
    assert survival(LevelDistribution(np.zeros(10))) == 0.0
    assert survival(LevelDistribution([0.3, -1e-13, 0.2])) == pytest.approx(0.5, abs=0)


def test_two_point_moments():
    assert conditional_moments(initial_distribution(TrapModel(100), 45)) == (45.5, 0.5)


@pytest.mark.parametrize("k", [0, 7, 99])
def test_single_level_has_zero_width(k):
    mean, std = conditional_moments(point_distribution(TrapModel(100), k))
    assert mean == k
    assert std == 0.0


def test_undefined_when_nothing_survives():
    p = np.zeros(20)
    p[3] = 1e-13
    mean, std = conditional_moments(LevelDistribution(p))
    assert math.isnan(mean) and math.isnan(std)


@given(
    weights=st.lists(st.floats(0, 1), min_size=3, max_size=30).filter(lambda w: sum(w) > 1e-3),
    scale=st.floats(1e-6, 1.0),
)
def test_moments_ignore_overall_scale(weights, scale):
    p = np.array(weights) / sum(weights)
    full = conditional_moments(LevelDistribution(p))
    scaled = conditional_moments(LevelDistribution(scale * p))
    assert scaled[0] == pytest.approx(full[0], rel=1e-9, abs=1e-12)
    assert scaled[1] == pytest.approx(full[1], rel=1e-7, abs=1e-7)


def test_single_snapshot_series():
    series = reduce_series([initial_distribution(TrapModel(100), 45)])
    assert len(series) == 1
    assert series.escape_rate.tolist() == [0.0]


def test_zero_generator_series_is_constant():
    model = TrapModel(100)
    series = reduce_series(evolve(build_generator(model), initial_distribution(model, 45), TimeGrid(0, 0.01, 5)))
    assert np.all(series.survival == 1.0)
    assert np.all(series.mean_n == 45.5)
    assert np.all(series.std_n == 0.5)
    np.testing.assert_allclose(series.escape_rate, 0.0, atol=1e-12)


def test_escape_rate_is_centred_difference():
    model = TrapModel.from_inverse_ms(100, heat_ms=23)
    series = reduce_series(evolve(build_generator(model), initial_distribution(model, 45), TimeGrid(0, 0.02, 21)))
    t, s = series.times, series.survival
    assert series.escape_rate[5] == pytest.approx(-(s[6] - s[4]) / (t[6] - t[4]))
    assert np.all(series.escape_rate >= 0)
    assert np.all(np.diff(series.survival) <= 0)
    assert np.all((series.mean_n >= 0) & (series.mean_n <= 99))


def test_unordered_snapshots_rejected():
    a = LevelDistribution([1.0, 0.0, 0.0], 0.002)
    b = LevelDistribution([1.0, 0.0, 0.0], 0.001)
    with pytest.raises(ValueError, match="increasing"):
        reduce_series([a, b])
    with pytest.raises(ValueError):
        reduce_series([])


def test_spreads_past_ten_levels_in_two_ms():
    # sigma(2 ms) from the open-ladder variance equation, started at sigma = 0.5
    model = TrapModel.from_inverse_ms(100, heat_ms=23)
    snaps = evolve(build_generator(model), initial_distribution(model, 45), TimeGrid(0, 0.002, 3))
    std = reduce_series(snaps).std_n
    assert std[0] == 0.5
    assert std[-1] >= 10
