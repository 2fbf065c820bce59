import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import structures
from infodist.distance import distance
from infodist.generators import (
    gen_full_info_p1,
    gen_no_info,
    gen_rubinstein,
)
from infodist.hierarchy import (
    fixed_point_partition,
    hierarchy_joint_distribution,
    hierarchy_partition,
    is_non_redundant,
)
from infodist.mertens import build_u_l, paired_spec
from infodist.structures import InfoStructure


def test_fully_informed_player_separates_states():
    part = hierarchy_partition(gen_full_info_p1([0.5, 0.5]), 1)
    assert part.classes_p1 == (0, 1)
    assert part.classes_p2 == (0,)


def test_duplicated_signal_is_redundant():
    t = np.array([[[0.2], [0.2], [0.1]], [[0.0], [0.0], [0.5]]])
    u = InfoStructure(t)
    part = fixed_point_partition(u)
    assert part.classes_p1[0] == part.classes_p1[1] != part.classes_p1[2]
    assert not is_non_redundant(u)


def test_email_game_is_non_redundant():
    assert is_non_redundant(gen_rubinstein(0.5, 0.5, 5))


def test_no_information_is_a_single_point():
    joint = hierarchy_joint_distribution(gen_no_info([0.3, 0.7]), 1)
    assert len(joint.table) == 2
    assert sorted(joint.table.values()) == pytest.approx([0.3, 0.7])
    assert fixed_point_partition(gen_no_info([1, 0])).n_classes == (1, 1)


def test_full_and_no_information_differ():
    a = hierarchy_joint_distribution(gen_full_info_p1([0.5, 0.5]), 1)
    b = hierarchy_joint_distribution(gen_no_info([0.5, 0.5]), 1)
    assert not a.close_to(b)


def test_reported_structure_first_level_ignores_reports():
    u = build_u_l(paired_spec(), 2)
    part = hierarchy_partition(u, 1)
    n = u.c_factors[0]
    # the first component is player 1's draw; later components are reports
    assert all(part.classes_p1[c] == part.classes_p1[c % n] for c in range(len(part.classes_p1)) if part.classes_p1[c] >= 0)


def test_zero_mass_signals_get_no_class():
    t = np.zeros((2, 3, 2))
    t[0, 0, 0], t[1, 2, 1] = 0.5, 0.5
    part = hierarchy_partition(InfoStructure(t), 2)
    assert part.classes_p1[1] == -1


def test_level_must_be_positive():
    with pytest.raises(ValueError):
        hierarchy_partition(gen_no_info([1]), 0)


@given(structures(min_k=2, max_k=2), st.integers(0, 2**32 - 1))
def test_joint_law_ignores_signal_labels(u, seed):
    rng = np.random.default_rng(seed)
    w = u.relabeled(rng.permutation(u.c_count), rng.permutation(u.d_count))
    for n in (1, 2, 3):
        assert hierarchy_joint_distribution(u, n).close_to(hierarchy_joint_distribution(w, n))


@given(structures(min_k=2, max_k=2))
def test_higher_levels_refine_lower_ones(u):
    for n in (1, 2, 3):
        assert hierarchy_partition(u, n + 1).refines(hierarchy_partition(u, n))


@given(structures(min_k=2, max_k=2, max_c=2, max_d=2))
def test_equal_hierarchies_mean_zero_distance(u):
    # merging duplicate signals leaves every hierarchy level unchanged
    t = np.concatenate([u.prob / 2, u.prob / 2], axis=1)
    w = InfoStructure(t)
    assert hierarchy_joint_distribution(u, 4).close_to(hierarchy_joint_distribution(w, 4))
    assert distance(u, w).d == pytest.approx(0, abs=1e-7)
