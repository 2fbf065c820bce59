from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infodist.games import value, value_oracle_enumeration
from infodist.hierarchy import hierarchy_joint_distribution
from infodist.mertens import (
    DEFAULT_ALPHA,
    Blame,
    MertensSpec,
    build_g_p,
    build_u_l,
    check_UI,
    check_event_E,
    count_nice,
    default_epsilon,
    is_nice,
    median_deviation_by_N,
    paired_spec,
    sample_S,
    sweep,
    truthful_conditionals_are_one,
    truthful_gap_experiment,
    ui_conditionals_bruteforce,
    y_statistics,
)
from infodist.structures import marginal

F = Fraction


# ---------------------------------------------------------------------------
# Subsets and niceness


@pytest.mark.parametrize("N", [4, 8, 16])
def test_sampled_subsets_have_half_the_elements(N):
    spec = sample_S(N, 3)
    assert all(len(s) == N // 2 and len(set(s)) == N // 2 for s in spec.S)
    assert all(1 <= b <= N for s in spec.S for b in s)


def test_sampling_is_deterministic():
    assert sample_S(16, 42) == sample_S(16, 42)
    assert sample_S(16, 42).S != sample_S(16, 43).S


def test_membership_is_a_fair_coin():
    N, n = 8, 10_000
    hits = sum(1 in sample_S(N, seed).S[0] for seed in range(n))
    assert abs(hits - n / 2) <= 3 * np.sqrt(n / 4)


def test_short_sequences():
    spec = paired_spec()
    assert all(is_nice(spec, (a,)).nice for a in range(1, 9))
    assert count_nice(spec, 1) == 8
    assert count_nice(spec, 2) == 8 * 8 // 2


def test_blame_follows_parity_of_first_failure():
    spec = paired_spec()
    bad = next(b for b in range(1, 9) if b not in spec.S[0])
    v = is_nice(spec, (1, bad))
    assert v.verdict is Blame.PLAYER_2 and v.first_failure == 2
    good = spec.S[0][0]
    bad3 = next(b for b in range(1, 9) if b not in spec.S[good - 1])
    v = is_nice(spec, (1, good, bad3))
    assert v.verdict is Blame.PLAYER_1 and v.first_failure == 3


@given(st.integers(0, 50), st.lists(st.integers(1, 8), min_size=1, max_size=6))
@settings(max_examples=100)
def test_blame_is_decided_by_first_failure(seed, seq):
    spec = sample_S(8, seed)
    v = is_nice(spec, seq)
    prefix_ok = [seq[t] in spec.S[seq[t - 1] - 1] for t in range(1, len(seq))]
    if all(prefix_ok):
        assert v.nice
    else:
        length = prefix_ok.index(False) + 2
        assert v.first_failure == length
        assert v.verdict is (Blame.PLAYER_1 if length % 2 else Blame.PLAYER_2)


def test_invalid_specs_are_rejected():
    with pytest.raises(ValueError):
        MertensSpec(5, ((1, 2),) * 5)
    with pytest.raises(ValueError):
        MertensSpec(4, ((1, 2, 3),) * 4)
    with pytest.raises(ValueError):
        MertensSpec(4, ((1, 1),) * 4)
    with pytest.raises(ValueError):
        MertensSpec(4, ((1, 5),) * 4)
    with pytest.raises(ValueError):
        MertensSpec(4, ((1, 2),) * 4, epsilon=F(1, 250))


def test_spec_round_trips_through_a_dict():
    spec = sample_S(8, 5)
    assert MertensSpec.from_dict(spec.to_dict()) == spec


def test_default_epsilon_is_inside_the_allowed_range():
    for N in (4, 8, 64):
        assert 0 < default_epsilon(N) < F(1, 10 * (N + 1) ** 2)


# ---------------------------------------------------------------------------
# Structures and payoffs


def test_state_is_a_fair_coin():
    assert list(marginal(build_u_l(paired_spec(), 1, exact=True).flat(), ["k"])) == [F(1, 2), F(1, 2)]


def test_first_level_puts_equal_weight_on_nice_pairs():
    spec = paired_spec()
    p = build_u_l(spec, 1, exact=True).prob
    pair = p.sum(axis=0)
    N = spec.N
    for c in range(N):
        for d in range(N):
            want = F(1, N * N // 2) if (d + 1) in spec.S[c] else 0
            assert pair[c, d] == want


def _drop_last_components(u, keep_c, keep_d):
    return u.project(range(keep_c), range(keep_d)).tensor()


@pytest.mark.parametrize("l", [1, 2])
def test_next_level_projects_onto_the_previous(l):
    spec = sample_S(4, 2)
    lo, hi = build_u_l(spec, l, exact=True), build_u_l(spec, l + 1, exact=True)
    assert len(hi.c_factors) == len(lo.c_factors) + 1
    proj = _drop_last_components(hi, len(lo.c_factors), len(lo.d_factors))
    assert np.array_equal(proj, lo.tensor())


def test_payoffs_are_bounded():
    for p in (1, 2):
        g = build_g_p(paired_spec(), p)
        assert np.abs(g.table).max() <= 8 / 9


def test_misreporting_the_draw_costs_more_than_the_bonus():
    spec = paired_spec()
    N = spec.N
    g = build_g_p(spec, 1, exact=True).table[:, :, 0]
    for c in range(1, N + 1):
        post = F(c, N + 1)
        score = [post * g[1, r] + (1 - post) * g[0, r] for r in range(N)]
        for r in range(N):
            if r != c - 1:
                # one step of the scoring rule already outweighs the largest bonus swing
                assert score[c - 1] - score[r] >= F(1, (N + 1) ** 2) > 10 * spec.epsilon


def test_overlap_counts_of_a_row_are_N():
    spec = sample_S(16, 1)
    assert y_statistics(spec, 1, 2, 3, 4).Y_c == spec.N
    with pytest.raises(ValueError):
        y_statistics(spec, 1, 1, 2, 3)


# ---------------------------------------------------------------------------
# Conditionals


def test_paired_subsets_are_exactly_uninformative():
    rep = check_UI(paired_spec(), 1)
    assert rep.max_deviation == 0 and rep.passes
    assert rep.truthful_all_one


@pytest.mark.parametrize("N,l,seed", [(6, 1, 0), (8, 1, 1), (6, 2, 0), (8, 2, 3), (4, 3, 0), (6, 3, 1)])
def test_closed_form_conditionals_match_enumeration(N, l, seed):
    spec = sample_S(N, seed)
    brute = ui_conditionals_bruteforce(spec, l)
    closed = check_UI(spec, l, detail=True)
    want = {v for key, vals in brute.items() if key != "truthful" for v in vals}
    assert {v for _, _, v in closed.entries} == want
    assert set(brute["truthful"]) == {F(1)}


@pytest.mark.parametrize("seed", range(3))
def test_truthful_reports_are_believed(seed):
    assert truthful_conditionals_are_one(sample_S(6, seed), 2)


def test_degenerate_subsets_are_informative():
    spec = MertensSpec(4, ((1, 2),) * 4)
    rep = check_UI(spec, 1)
    assert rep.max_deviation > DEFAULT_ALPHA
    assert not rep.passes


def test_small_subsets_never_satisfy_the_overlap_event():
    holds, dev = check_event_E(sample_S(8, 0))
    assert not holds and dev > 2 * DEFAULT_ALPHA


def test_sweep_rows_and_medians():
    rows = sweep([4, 8], range(3), values_max_N=4, workers=1)
    assert len(rows) == 6
    med = median_deviation_by_N(rows)
    assert set(med) == {4, 8}
    assert all(r["val_u1_g1"] is not None for r in rows if r["N"] == 4)


# ---------------------------------------------------------------------------
# Values


def test_paired_values_have_the_expected_signs():
    spec = paired_spec()
    exp = truthful_gap_experiment(spec)
    eps = float(spec.epsilon)
    assert exp.val_l_own == pytest.approx(eps, abs=1e-9)
    assert exp.val_l_next == pytest.approx(-2 * eps, abs=1e-9)
    assert exp.signs_ok and exp.sound


@pytest.mark.parametrize("seed", range(2))
def test_value_lp_matches_enumeration_on_small_instances(seed):
    spec = sample_S(4, seed)
    u, g = build_u_l(spec, 1), build_g_p(spec, 1)
    assert value(u.flat(), g).value == pytest.approx(value_oracle_enumeration(u.flat(), g), abs=1e-7)


def test_successive_levels_share_their_hierarchy():
    spec = sample_S(4, 0)
    a = hierarchy_joint_distribution(build_u_l(spec, 2, exact=True), 2)
    b = hierarchy_joint_distribution(build_u_l(spec, 3, exact=True), 2)
    assert a.table == b.table
