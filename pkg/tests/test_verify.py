import numpy as np
import pytest

from conftest import random_structure
from infodist.games import PayoffFunction, value
from infodist.generators import gen_example6, gen_extreme_pair, gen_no_info
from infodist.structures import Garbling, garble_left
from infodist.verify import (
    GameSampler,
    batched_values,
    game_value_batch,
    grid_game_gap_search,
    normal_forms,
    random_game_gap_search,
)

HALF = [0.5, 0.5]


def test_sampler_is_reproducible_and_in_range():
    a = np.concatenate(list(GameSampler(3, 2, 2, trials=1200, chunk=500).chunks(2)))
    b = np.concatenate(list(GameSampler(3, 2, 2, trials=1200, chunk=500).chunks(2)))
    assert a.shape == (1200, 2, 2, 2)
    assert np.array_equal(a, b) and np.abs(a).max() <= 1


def test_grid_sampler_draws_grid_points():
    g = np.concatenate(list(GameSampler(0, 2, 2, trials=100, step=0.5).chunks(2)))
    assert set(np.unique(g)) <= {-1.0, -0.5, 0.0, 0.5, 1.0}
    with pytest.raises(ValueError):
        GameSampler(0, 2, 2, step=0.3).grid()


@pytest.mark.parametrize("dims", [(2, 2, 2), (2, 3, 2), (2, 2, 4)])
def test_batched_two_action_values_match_the_lp(dims):
    rng = np.random.default_rng(sum(dims))
    u = random_structure(rng, *dims)
    games = rng.uniform(-1, 1, size=(40, dims[0], 2, 2))
    vals, _ = game_value_batch(u, games)
    want = [value(u, PayoffFunction(g)).value for g in games]
    assert vals == pytest.approx(want, abs=1e-7)


def test_small_kernel_values_match_the_lp():
    rng = np.random.default_rng(9)
    u = random_structure(rng, 2, 1, 2)
    games = rng.uniform(-1, 1, size=(40, 2, 3, 2))
    vals, _ = batched_values(normal_forms(u, games))
    want = [value(u, PayoffFunction(g)).value for g in games]
    assert vals == pytest.approx(want, abs=1e-7)


def test_identical_structures_show_no_gap():
    u = random_structure(np.random.default_rng(0))
    res = random_game_gap_search(u, u, GameSampler(0, 2, 2, trials=2000))
    assert res.best_gap <= 1e-7 and res.sound


def test_named_game_separates_the_extreme_pair():
    u, v = gen_extreme_pair(HALF, HALF)
    res = random_game_gap_search(u, v, GameSampler(0, 2, 2, trials=500))
    assert res.best_gap == pytest.approx(1, abs=1e-9)
    assert res.sound


def test_chain_structure_gap_stays_below_the_distance():
    u, v = gen_example6(3), gen_no_info(HALF)
    res = random_game_gap_search(u.as_float(), v.as_float(), GameSampler(1, 2, 2, trials=2000))
    assert res.sound
    assert res.best_gap <= 1 / 2 + 1e-9
    assert res.best_gap <= res.lp_distance + 1e-6


def test_grid_with_single_actions_is_exact_on_its_grid():
    u, v = gen_extreme_pair(HALF, HALF)
    res = grid_game_gap_search(u, v, 1, step=2)
    # with one action each nobody can use information
    assert res.best_gap == pytest.approx(0, abs=1e-12)
    assert res.trials == 4


def test_grid_search_brackets_the_extreme_distance():
    u, v = gen_extreme_pair(HALF, HALF)
    res = grid_game_gap_search(u, v, 2, step=0.5)
    assert res.sound
    # within one grid step of the distance, and never above it
    assert 1 - 0.5 - 1e-9 <= res.best_gap <= 1 + 1e-9


def test_relabeled_structures_show_no_grid_gap():
    u = random_structure(np.random.default_rng(2), 2, 2, 2)
    w = garble_left(Garbling.from_map([1, 0], 2), u)
    res = grid_game_gap_search(u, w, 2, step=1.0)
    assert res.best_gap <= 1e-7


def test_grid_search_refuses_huge_grids():
    u, v = gen_extreme_pair(HALF, HALF)
    with pytest.raises(ValueError):
        grid_game_gap_search(u, v, 3, step=0.1, cap=1000)


@pytest.mark.parametrize("seed", range(3))
def test_sampled_gaps_are_sandwiched(seed):
    rng = np.random.default_rng(100 + seed)
    u, v = random_structure(rng), random_structure(rng)
    res = random_game_gap_search(u, v, GameSampler(seed, 2, 2, trials=3000))
    assert res.violations == 0
    assert 0 <= res.best_gap <= res.lp_distance + 1e-6
    assert set(res.as_dict()) >= {"lp_distance", "best_gap", "best_game", "trials", "violations", "sound"}
