from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_garbling, random_structure, structures
from infodist.distance import (
    OrderRelation,
    compare,
    distance,
    distance_d1,
    one_sided_gap,
    transfer_strategy,
)
from infodist.games import guarantee_p1, guess_the_state, random_payoff, value
from infodist.generators import (
    gen_cond_independent,
    gen_example2,
    gen_example6,
    gen_extreme_pair,
    gen_no_info,
    gen_random,
)
from infodist.structures import Garbling, garble_left, garble_right, tv_norm

F = Fraction
HALF = [F(1, 2), F(1, 2)]


def test_gap_to_itself_is_zero():
    u = random_structure(np.random.default_rng(0), 2, 3, 2)
    cert = one_sided_gap(u, u)
    assert cert.gap == pytest.approx(0, abs=1e-9)


def test_one_sided_gaps_between_extreme_structures():
    informed, uninformed = gen_extreme_pair(HALF, HALF)
    assert one_sided_gap(informed, uninformed).gap == pytest.approx(0, abs=1e-9)
    assert one_sided_gap(uninformed, informed).gap == pytest.approx(1, abs=1e-9)


def test_nothing_to_gain_from_a_garbled_copy():
    rng = np.random.default_rng(1)
    u = random_structure(rng, 2, 3, 2)
    q = random_garbling(rng, 3, 3)
    # q1 = q and q2 = identity are feasible with norm 0
    assert one_sided_gap(u, garble_left(q, u)).gap == pytest.approx(0, abs=1e-7)
    assert one_sided_gap(garble_left(q, u), u).gap >= -1e-9


@pytest.mark.parametrize("exact", [False, True])
def test_extreme_pair_is_one_apart(exact):
    u, v = gen_extreme_pair(HALF, HALF)
    d = distance(u, v, exact=exact).d
    assert d == 1 if exact else d == pytest.approx(1, abs=1e-9)


def test_uninformative_structures_with_opposite_states():
    d = distance(gen_no_info([1, 0]), gen_no_info([0, 1])).d
    assert d == pytest.approx(2, abs=1e-9)


@pytest.mark.parametrize("n", range(1, 9))
def test_chain_structure_approaches_no_information(n):
    d = distance(gen_example6(n), gen_no_info(HALF)).d
    assert d <= 2 / (n + 1) + 1e-6


def test_chain_structure_distance_exact_value():
    # frozen from the rational LP: the distance is exactly 1 / (n + 1)
    for n in (1, 2, 3):
        assert distance(gen_example6(n), gen_no_info(HALF), exact=True).d == F(1, n + 1)


def test_single_agent_distance_misses_correlated_signal():
    u, v = gen_example2()
    assert distance_d1(u, v) == pytest.approx(0, abs=1e-9)
    assert distance_d1(u, u) == pytest.approx(0, abs=1e-9)
    d = distance(u, v, exact=True).d
    # frozen from the rational LP, confirmed by the float route
    assert d == F(1, 4)
    assert distance(u.as_float(), v.as_float()).d == pytest.approx(0.25, abs=1e-9)
    assert d <= tv_norm(u, v)


def test_compare_basic_orders():
    rng = np.random.default_rng(2)
    u = random_structure(rng, 2, 3, 2)
    assert compare(u, u) is OrderRelation.EQUIVALENT
    assert compare(u, garble_left(random_garbling(rng, 3, 2), u)) in (
        OrderRelation.P1_PREFERS_FIRST,
        OrderRelation.EQUIVALENT,
    )
    informed, uninformed = gen_extreme_pair(HALF, HALF)
    assert compare(informed, uninformed) is OrderRelation.P1_PREFERS_FIRST
    assert compare(uninformed, informed) is OrderRelation.P1_PREFERS_SECOND


def test_compare_relabeling_is_equivalent():
    u = random_structure(np.random.default_rng(3), 2, 3, 2)
    assert compare(u, garble_left(Garbling.from_map([1, 2, 0], 3), u)) is OrderRelation.EQUIVALENT


def test_identity_transfer_is_the_strategy():
    s = random_garbling(np.random.default_rng(4), 3, 2)
    assert np.allclose(transfer_strategy(s, Garbling.identity(3)).rows, s.rows)


def test_transfer_between_equivalent_structures_is_optimal():
    rng = np.random.default_rng(5)
    u = random_structure(rng, 2, 3, 2)
    w = garble_left(Garbling.from_map([2, 0, 1], 3), u)
    g = random_payoff(rng, 2, 3, 3)
    cert = one_sided_gap(w, u)
    sigma = value(u, g).sigma1
    moved = transfer_strategy(sigma, cert.q1)
    assert guarantee_p1(w, g, moved) >= value(w, g).value - 1e-7


def test_transfer_on_random_pair_is_near_optimal():
    rng = np.random.default_rng(6)
    u, v = random_structure(rng), random_structure(rng)
    g = random_payoff(rng, 2, 2, 2)
    d = distance(u, v)
    moved = transfer_strategy(value(v, g).sigma1, d.forward.q1)
    assert guarantee_p1(u, g, moved) >= value(u, g).value - 2 * d.d - 1e-6


def test_guessing_game_attains_the_distance():
    u, v = gen_extreme_pair([0.5, 0.5], [0.5, 0.5])
    g = guess_the_state()
    assert value(u, g).value - value(v, g).value == pytest.approx(distance(u, v).d, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_conditionally_independent_pairs_have_equal_distances(seed):
    rng = np.random.default_rng(seed)
    prior = rng.dirichlet(np.ones(2))
    d_kernel = rng.dirichlet(np.ones(2), size=2)
    u = gen_cond_independent(prior, rng.dirichlet(np.ones(3), size=2), d_kernel)
    v = gen_cond_independent(prior, rng.dirichlet(np.ones(2), size=2), d_kernel)
    assert distance(u, v).d == pytest.approx(distance_d1(u, v), abs=1e-6)


def test_certificate_pair_is_ordered_and_attains_the_gap():
    rng = np.random.default_rng(7)
    u, v = random_structure(rng), random_structure(rng)
    cert = one_sided_gap(u, v)
    left, right = garble_left(cert.q1, u), garble_right(v, cert.q2)
    assert tv_norm(left, right) == pytest.approx(cert.gap, abs=1e-7)
    assert cert.achieved_norm == pytest.approx(cert.gap, abs=1e-7)
    assert compare(u, left) in (OrderRelation.P1_PREFERS_FIRST, OrderRelation.EQUIVALENT)
    assert compare(right, v) in (OrderRelation.P1_PREFERS_FIRST, OrderRelation.EQUIVALENT)


def test_exact_and_float_distances_agree():
    u = gen_random(11, (2, 2, 2), exact=True)
    v = gen_random(12, (2, 2, 3), exact=True)
    exact = distance(u, v, exact=True)
    assert isinstance(exact.d, Fraction)
    assert float(exact.d) == pytest.approx(distance(u.as_float(), v.as_float()).d, abs=1e-7)


def test_mismatched_state_spaces_are_rejected():
    with pytest.raises(ValueError):
        distance(gen_no_info([1]), gen_no_info(HALF))


pair = structures(min_k=2, max_k=2, max_c=3, max_d=3)


@given(pair, pair)
def test_distance_is_symmetric(u, v):
    assert distance(u, v).d == pytest.approx(distance(v, u).d, abs=1e-7)


@given(pair, pair, pair)
def test_distance_triangle_inequality(u, v, w):
    assert distance(u, w).d <= distance(u, v).d + distance(v, w).d + 1e-6


@given(pair)
def test_distance_to_itself_is_zero(u):
    assert distance(u, u).d == pytest.approx(0, abs=1e-7)


@given(pair, pair)
def test_single_agent_distance_never_exceeds_distance(u, v):
    assert distance_d1(u, v) <= distance(u, v).d + 1e-7


@given(pair, pair)
def test_distance_is_at_most_total_variation(u, v):
    assert distance(u, v).d <= tv_norm(u, v) + 1e-7


@given(pair, pair, st.integers(0, 2**32 - 1))
def test_value_differences_are_bounded_by_distance(u, v, seed):
    rng = np.random.default_rng(seed)
    d = distance(u, v).d
    for _ in range(5):
        g = random_payoff(rng, 2, 2, 2)
        assert abs(value(u, g).value - value(v, g).value) <= d + 1e-6
