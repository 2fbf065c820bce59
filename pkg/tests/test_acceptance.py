"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in pytest's terminal summary, or directly when this file
is run as a script (``python3 tests/test_acceptance.py``).
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from infodist.distance import (
    approx_knowledge_bound,
    distance,
    distance_d1,
    joint_info_bound,
    transfer_strategy,
)
from infodist.games import (
    guarantee_p1,
    monotonicity_check,
    random_payoff,
    value,
    value_oracle_enumeration,
)
from infodist.generators import (
    gen_cond_independent,
    gen_example2,
    gen_example6,
    gen_extreme_pair,
    gen_no_info,
    gen_random,
    gen_rubinstein,
    with_trivial_base,
)
from infodist.hierarchy import hierarchy_joint_distribution
from infodist.mertens import (
    DEFAULT_ALPHA,
    build_g_p,
    build_u_l,
    check_UI,
    count_nice,
    median_deviation_by_N,
    paired_spec,
    sample_S,
    sweep,
    truthful_conditionals_are_one,
    truthful_gap_experiment,
    y_statistics,
)
from infodist.structures import Garbling, tv_norm
from infodist.verify import GameSampler, random_game_gap_search

F = Fraction
HALF = [F(1, 2), F(1, 2)]
RESULTS: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {number:2d} {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _garbling(rng, n, m):
    return Garbling(rng.dirichlet(np.ones(m), size=n))


def test_01_extreme_pair_distance():
    t = time.perf_counter()
    d = distance(gen_extreme_pair(HALF, HALF)[0], gen_extreme_pair(HALF, HALF)[1]).d
    dt = time.perf_counter() - t
    record(1, "extreme pair", abs(float(d) - 1) <= 1e-6 and dt < 1, f"d = {float(d):.9f}, {dt:.3f} s")


def test_02_opposite_point_priors():
    d = distance(gen_no_info([1, 0]), gen_no_info([0, 1])).d
    record(2, "opposite priors", abs(float(d) - 2) <= 1e-6, f"d = {float(d):.9f}")


def test_03_chain_structure_decay():
    t = time.perf_counter()
    worst, cert_ok = -np.inf, True
    for n in range(1, 9):
        d = float(distance(gen_example6(n), gen_no_info(HALF)).d)
        worst = max(worst, d - 2 / (n + 1))
        rep = joint_info_bound(with_trivial_base(gen_example6(n)))
        cert_ok &= bool(rep.holds) and float(rep.bound) <= 2 / (n + 1) + 1e-6
    dt = time.perf_counter() - t
    ok = worst <= 1e-6 and cert_ok and dt < 10
    record(3, "chain decay", ok, f"max(d - 2/(n+1)) = {worst:.3g}, certificates {'ok' if cert_ok else 'bad'}, {dt:.2f} s")


def test_04_single_agent_distance_under_independence():
    t = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        K, C1, C2, D = 2, *rng.integers(1, 4, size=3)
        prior = rng.dirichlet(np.ones(K))
        d_kernel = rng.dirichlet(np.ones(D), size=K)
        u = gen_cond_independent(prior, rng.dirichlet(np.ones(C1), size=K), d_kernel)
        v = gen_cond_independent(prior, rng.dirichlet(np.ones(C2), size=K), d_kernel)
        worst = max(worst, abs(float(distance(u, v).d) - float(distance_d1(u, v))))
    dt = time.perf_counter() - t
    record(4, "d = d1 when independent", worst <= 1e-6 and dt < 60, f"max |d - d1| = {worst:.3g}, {dt:.2f} s")


def test_05_correlated_signal_example():
    u, v = gen_example2()
    d1 = float(distance_d1(u, v))
    d = float(distance(u, v).d)
    res = random_game_gap_search(u.as_float(), v.as_float(), GameSampler(5, 2, 2, trials=5000))
    tv = float(tv_norm(u, v))
    ok = abs(d1) <= 1e-9 and d > 1e-4 and res.best_gap <= d + 1e-6 and d <= tv + 1e-9
    record(5, "correlated signal", ok, f"d1 = {d1:.3g}, d = {d:.6f}, sampled gap = {res.best_gap:.6f}, tv = {tv:.6f}")


@pytest.mark.slow
def test_06_sampled_games_never_beat_the_distance():
    t = time.perf_counter()
    violations, worst, trials = 0, -np.inf, 0
    for i in range(20):
        u, v = gen_random(2 * i, (2, 2, 2)), gen_random(2 * i + 1, (2, 2, 2))
        res = random_game_gap_search(u, v, GameSampler(i, 2, 2, trials=100_000))
        violations += res.violations
        worst = max(worst, res.best_gap - res.lp_distance)
        trials += res.trials
    dt = time.perf_counter() - t
    ok = violations == 0 and worst <= 1e-6
    record(6, "value gaps below distance", ok, f"{trials} games, {violations} violations, max(gap - d) = {worst:.3g}, {dt:.1f} s")


def test_07_transferred_strategies_are_near_optimal():
    rng = np.random.default_rng(7)
    worst = -np.inf
    for i in range(30):
        u, v = gen_random(1000 + i, (2, 2, 3)), gen_random(2000 + i, (2, 3, 2))
        g = random_payoff(rng, 2, 2, 2)
        res = distance(u, v)
        moved = transfer_strategy(value(v, g).sigma1, res.forward.q1)
        shortfall = value(u, g).value - guarantee_p1(u, g, moved) - 2 * float(res.d)
        worst = max(worst, shortfall)
    record(7, "strategy transfer", worst <= 1e-6, f"max(val - guarantee - 2d) = {worst:.3g}")


def test_08_metric_and_monotonicity():
    rng = np.random.default_rng(8)
    sym, tri = 0.0, -np.inf
    for i in range(100):
        u, v, w = (gen_random(3 * i + j, (2, 2, 2)) for j in range(3))
        duv, dvu = distance(u, v).d, distance(v, u).d
        sym = max(sym, abs(duv - dvu))
        tri = max(tri, distance(u, w).d - duv - distance(v, w).d)
    mono_bad = 0
    for i in range(100):
        u = gen_random(500 + i, (2, 2, 3))
        g = random_payoff(rng, 2, 2, 2)
        rep = monotonicity_check(u, g, _garbling(rng, 2, 3), _garbling(rng, 3, 2), tol=1e-7)
        mono_bad += not rep.holds
    ok = sym <= 1e-7 and tri <= 1e-6 and mono_bad == 0
    record(8, "metric and monotonicity", ok, f"asymmetry {sym:.3g}, triangle excess {tri:.3g}, {mono_bad} monotonicity failures")


def test_09_email_game_distance():
    t = time.perf_counter()
    alphas = (0.5, 0.25, 0.1, 0.05)
    reps = [approx_knowledge_bound(gen_rubinstein(0.5, a, 12)) for a in alphas]
    dt = time.perf_counter() - t
    within = all(r.d <= 20 * r.eps + 1e-6 for r in reps)
    ds = [r.d for r in reps]
    decreasing = all(x > y for x, y in zip(ds, ds[1:]))
    detail = ", ".join(f"a={a}: d={r.d:.5f} eps={r.eps:.5f}" for a, r in zip(alphas, reps))
    record(9, "approximate knowledge", within and decreasing and dt < 30, f"{detail}, {dt:.2f} s")


def test_10_lp_matches_enumeration():
    rng = np.random.default_rng(10)
    worst = 0.0
    for i in range(50):
        K, C, D, I, J = 2, *rng.integers(1, 4, size=4)
        u = gen_random(3000 + i, (K, C, D))
        g = random_payoff(rng, K, I, J)
        worst = max(worst, abs(value(u, g).value - value_oracle_enumeration(u, g)))
    record(10, "value oracle", worst <= 1e-7, f"max difference {worst:.3g}")


def test_11_reported_structure_invariants():
    checks = {}
    for N in (8, 16):
        spec = sample_S(N, 11)
        checks[f"half subsets N={N}"] = all(len(s) == N // 2 for s in spec.S)
        checks[f"row counts N={N}"] = all(y_statistics(spec, 1, 2, c, c % N + 1).Y_c == N for c in range(1, N + 1))
        checks[f"nice pairs N={N}"] = count_nice(spec, 2) == N * N // 2
    spec = sample_S(8, 11)
    u1, u2 = build_u_l(spec, 1), build_u_l(spec, 2)
    proj = u2.project([0], [0]).tensor()
    checks["projection"] = float(np.abs(proj - u1.tensor()).max()) <= 1e-12
    checks["payoff bound"] = all(np.abs(build_g_p(spec, p).table).max() <= 8 / 9 for p in (1, 2))
    checks["truthful conditionals"] = truthful_conditionals_are_one(spec, 1) and truthful_conditionals_are_one(spec, 2)
    failed = [k for k, v in checks.items() if not v]
    record(11, "reported structure invariants", not failed, "all hold" if not failed else f"failed: {failed}")


@pytest.mark.slow
def test_12_concentration_trend():
    t = time.perf_counter()
    rows = sweep([8, 16, 32, 64], range(100))
    med = median_deviation_by_N(rows)
    dt = time.perf_counter() - t
    seq = [med[N] for N in (8, 16, 32, 64)]
    ok = all(a >= b for a, b in zip(seq, seq[1:])) and dt < 300
    record(12, "concentration trend", ok, f"medians {dict(zip((8, 16, 32, 64), seq))}, {dt:.1f} s")


def test_13_value_signs_on_uninformative_specs():
    best, passing = np.inf, []
    for N in (4, 6, 8):
        for seed in range(100):
            spec = sample_S(N, seed)
            dev = check_UI(spec, 1, verify_truthful=False).max_deviation
            best = min(best, dev)
            if dev <= DEFAULT_ALPHA:
                passing.append(spec)
    # sampled specs rarely pass at this size, so a hand-built one that does is always checked
    passing.append(paired_spec())
    bad = []
    for spec in passing:
        exp = truthful_gap_experiment(spec)
        if not (exp.ui_passes and exp.signs_ok and exp.sound):
            bad.append((spec.N, spec.seed, exp.as_dict()))
    detail = f"best sampled deviation {best:.4f}, {len(passing) - 1} sampled specs pass, {len(passing)} checked"
    record(13, "value signs", not bad, detail if not bad else f"{detail}; failures {bad}")


def test_14_hierarchy_is_level_independent():
    spec = sample_S(6, 0)
    a = hierarchy_joint_distribution(build_u_l(spec, 2, exact=True), 2)
    b = hierarchy_joint_distribution(build_u_l(spec, 3, exact=True), 2)
    diff = a.max_difference(b)
    record(14, "hierarchy preservation", set(a.table) == set(b.table) and diff <= 1e-9, f"{len(a.table)} cells, max difference {diff:.3g}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
