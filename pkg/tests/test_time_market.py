import numpy as np
import pytest

from rass.errors import ParameterError, SamplingError, ShapeError
from rass.time_market import (
    ErrorPool,
    PriceVector,
    ScenarioSampler,
    ScenarioSet,
    TimeGrid,
    build_scenarios,
    synth_pool,
    window_view,
)


def test_hour_factor_and_window():
    grid = TimeGrid(30, 48)
    assert grid.hour_factor() == 0.5
    assert TimeGrid(5, 288).hour_factor() == pytest.approx(1 / 12)
    assert list(grid.window(46).periods) == [1, 2, 3]
    assert grid.window(1) == grid


@pytest.mark.parametrize("kappa,K", [(0, 4), (30, 0), (-5, 4)])
def test_grid_rejects_bad_values(kappa, K):
    with pytest.raises(ParameterError):
        TimeGrid(kappa, K)


def test_window_start_out_of_range():
    with pytest.raises(IndexError):
        TimeGrid(60, 3).window(4)
    with pytest.raises(IndexError):
        PriceVector([1.0, 2.0]).suffix(0)


def test_price_vector_is_read_only():
    prices = PriceVector([1.0, 2.0, 3.0])
    assert len(prices) == 3
    with pytest.raises(ValueError):
        prices.values[0] = 5.0
    with pytest.raises(ShapeError):
        prices.check_grid(TimeGrid(60, 4))


def test_scenario_set_validation():
    with pytest.raises(ParameterError):
        ScenarioSet([[1.0], [2.0]], [0.5, 0.6])
    with pytest.raises(ParameterError):
        ScenarioSet([[1.0], [2.0]], [1.0, 0.0])
    with pytest.raises(ShapeError):
        ScenarioSet([[1.0], [2.0]], [1.0])
    scen = ScenarioSet([[10.0, 0.0], [20.0, 4.0]], [0.25, 0.75])
    assert scen.n_scenarios == 2 and scen.K == 2
    np.testing.assert_allclose(scen.expected_prices(), [17.5, 3.0])


def test_build_scenarios_adds_sampled_rows():
    pool = ErrorPool(np.arange(15, dtype=float).reshape(5, 3))
    predispatch = PriceVector([100.0, 200.0, 300.0])
    scen = build_scenarios(predispatch, pool, 3, seed=7)
    errors = scen.prices - predispatch.values
    rows = {tuple(r) for r in pool.observations.tolist()}
    assert all(tuple(r) in rows for r in errors.tolist())
    assert len({tuple(r) for r in errors.tolist()}) == 3
    np.testing.assert_allclose(scen.probabilities, [1 / 3] * 3)
    again = build_scenarios(predispatch, pool, 3, seed=7)
    np.testing.assert_array_equal(scen.prices, again.prices)


def test_build_scenarios_single_draw_equals_pool_when_n_is_N():
    pool = ErrorPool([[1.0, 2.0]])
    scen = build_scenarios(PriceVector([10.0, 20.0]), pool, 1, seed=0)
    np.testing.assert_array_equal(scen.prices, [[11.0, 22.0]])


def test_sampling_more_than_pool_fails():
    pool = ErrorPool(np.zeros((3, 2)))
    with pytest.raises(SamplingError):
        build_scenarios(PriceVector([1.0, 2.0]), pool, 4, seed=0)


def test_window_view_reanchors_errors_of_a_set():
    predispatch = PriceVector([10.0, 20.0, 30.0])
    scen = ScenarioSet([[11.0, 22.0, 33.0]], [1.0])
    assert window_view(scen, predispatch, 1) is scen
    later = window_view(scen, predispatch, 2)
    np.testing.assert_allclose(later.prices, [[21.0, 32.0]])
    last = window_view(scen, predispatch, 3)
    np.testing.assert_allclose(last.prices, [[31.0]])


def test_window_view_with_sampler_uses_lookahead_columns():
    pool = ErrorPool([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    sampler = ScenarioSampler(pool, 2, seed=3)
    predispatch = PriceVector([10.0, 20.0, 30.0])
    view = window_view(sampler, predispatch, 2)
    got = sorted(tuple(r) for r in view.prices.tolist())
    assert got == [(21.0, 32.0), (24.0, 35.0)]


def test_window_view_shape_mismatch():
    scen = ScenarioSet([[1.0, 2.0]], [1.0])
    with pytest.raises(ShapeError):
        window_view(scen, PriceVector([1.0, 2.0, 3.0]), 2)


def test_reseeded_sampler_keeps_first_window_draw():
    pool = ErrorPool(np.arange(40, dtype=float).reshape(20, 2))
    fixed = ScenarioSampler(pool, 5, seed=11)
    reseeded = ScenarioSampler(pool, 5, seed=11, reseed_per_window=True)
    np.testing.assert_array_equal(fixed.indices(1), reseeded.indices(1))
    np.testing.assert_array_equal(fixed.indices(2), fixed.indices(1))
    np.testing.assert_array_equal(reseeded.indices(2), reseeded.indices(2))


def test_synth_pool_zero_sigma_is_all_zero():
    pool = synth_pool(6, 10, 0.0, 1.0, seed=1)
    assert np.all(pool.observations == 0.0)
    assert not np.any(np.signbit(pool.observations))


def test_synth_pool_constant_spread_when_gamma_zero():
    pool = synth_pool(3, 20000, 2.0, 0.0, seed=5)
    np.testing.assert_allclose(pool.observations.std(axis=0), [2.0] * 3, rtol=0.03)


def test_synth_pool_spread_grows_with_lookahead():
    pool = synth_pool(16, 10_000, 5.0, 0.5, seed=2024)
    std = pool.observations.std(axis=0)
    for h in (1, 4, 16):
        assert std[h - 1] == pytest.approx(5.0 * np.sqrt(h), rel=0.03)


def test_synth_pool_is_deterministic():
    a = synth_pool(4, 8, 1.0, 1.0, seed=9)
    b = synth_pool(4, 8, 1.0, 1.0, seed=9)
    np.testing.assert_array_equal(a.observations, b.observations)
    with pytest.raises(ParameterError):
        synth_pool(4, 8, -1.0, 1.0, seed=9)


def test_small_pool_enumerates_every_row():
    pool = ErrorPool([[1.0, -1.0], [0.0, 0.0], [-2.0, 2.0]])
    scen = build_scenarios(PriceVector([10.0, 20.0]), pool, 3, seed=42)
    assert sorted(tuple(r) for r in scen.prices.tolist()) == [(8.0, 22.0), (10.0, 20.0), (11.0, 19.0)]
    np.testing.assert_allclose(scen.probabilities, [1 / 3] * 3)


@pytest.mark.parametrize("use_set", [False, True])
def test_window_views_compose(use_set):
    rng = np.random.default_rng(4)
    K = 7
    predispatch = PriceVector(rng.uniform(10.0, 90.0, K))
    sampler = ScenarioSampler(ErrorPool(rng.normal(0.0, 5.0, (12, K))), 4, seed=9)
    source = build_scenarios(predispatch, sampler.pool, 4, seed=9) if use_set else sampler
    np.testing.assert_array_equal(window_view(source, predispatch, 1).prices, sampler.window(predispatch, 1).prices)
    for t in range(1, K + 1):
        first = window_view(source, predispatch, t)
        suffix = PriceVector(predispatch.values[t - 1 :])
        for t2 in range(1, K - t + 2):
            composed = window_view(first, suffix, t2)
            direct = window_view(source, predispatch, t + t2 - 1)
            np.testing.assert_allclose(composed.prices, direct.prices, atol=1e-9)
            np.testing.assert_array_equal(composed.probabilities, direct.probabilities)


@pytest.mark.parametrize("reseed", [False, True])
def test_zero_errors_collapse_to_predispatch_in_every_window(reseed):
    predispatch = PriceVector([30.0, 12.0, 45.0, 80.0, 60.0])
    sampler = ScenarioSampler(ErrorPool(np.zeros((6, 5))), 3, seed=1, reseed_per_window=reseed)
    for t in range(1, 6):
        view = window_view(sampler, predispatch, t)
        expected = predispatch.values[t - 1 :]
        assert view.prices.shape == (3, 6 - t)
        for row in view.prices:
            np.testing.assert_array_equal(row, expected)
        np.testing.assert_allclose(view.expected_prices(), expected)
