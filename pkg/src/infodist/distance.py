"""Value-based distance between information structures.

The largest gain player 1 can get in some zero-sum game by moving from ``u``
to ``v`` equals

    min over garblings q1: C_u -> C_v, q2: D_v -> D_u of  ||q1.u - v.q2||,

a single LP because both garbled tables are linear in the garblings. The
distance is the larger of the two directions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .generators import gen_common_knowledge
from .lp import LinearProgram, solve_lp
from .structures import (
    FactoredStructure,
    Garbling,
    InfoStructure,
    _is_exact,
    eps_cond_independence,
    garble_left,
    garble_right,
    to_float,
    tv_norm,
)

ZERO_TOL = 1e-7


@dataclass(frozen=True)
class GapCertificate:
    """``gap = sup_g val(v, g) - val(u, g)`` with the minimising garblings.

    ``q1`` maps ``u``'s player-1 signals to ``v``'s, ``q2`` maps ``v``'s
    player-2 signals to ``u``'s, and ``achieved_norm`` is ``||q1.u - v.q2||``
    recomputed from the garblings.
    """

    gap: float
    q1: Garbling
    q2: Garbling
    achieved_norm: float

    def as_dict(self) -> dict:
        return {
            "gap": float(self.gap),
            "q1": to_float(self.q1.rows).tolist(),
            "q2": to_float(self.q2.rows).tolist(),
            "achieved_norm": float(self.achieved_norm),
        }


def _zeros(shape, exact: bool) -> np.ndarray:
    out = np.zeros(shape, dtype=object if exact else float)
    if exact:
        out[...] = Fraction(0)
    return out


def _rows_to_garbling(x, n_src: int, n_tgt: int, exact: bool) -> Garbling:
    if exact:
        return Garbling(np.array(list(x), dtype=object).reshape(n_src, n_tgt))
    rows = np.clip(np.asarray(x, dtype=float).reshape(n_src, n_tgt), 0.0, None)
    return Garbling(rows / rows.sum(axis=1, keepdims=True))


def one_sided_gap(u: InfoStructure, v: InfoStructure, exact: bool = False) -> GapCertificate:
    """Largest value gain for player 1 from replacing ``u`` by ``v``.

    Zero exactly when player 1 weakly prefers ``u`` to ``v`` in every game.
    """
    if u.state_count != v.state_count:
        raise ValueError(f"state counts differ: {u.state_count} vs {v.state_count}")
    if exact:
        u, v = u.as_exact(), v.as_exact()
    elif u.exact or v.exact:
        u, v = u.as_float(), v.as_float()
    pu, pv = u.prob, v.prob
    K, Cu, Du = pu.shape
    _, Cv, Dv = pv.shape
    n1, n2 = Cu * Cv, Dv * Du
    n_cells = K * Cv * Du
    eye_c = np.eye(Cv, dtype=int)
    eye_d = np.eye(Du, dtype=int)
    if exact:
        eye_c, eye_d = eye_c.astype(object), eye_d.astype(object)
    # diff[(k,c,d), q1[x,c']] = u(k,x,d) [c'=c];  diff[(k,c,d), q2[y,d']] = -v(k,c,y) [d'=d]
    m1 = np.einsum("kxd,cy->kcdxy", pu, eye_c).reshape(n_cells, n1)
    m2 = -np.einsum("kcy,de->kcdye", pv, eye_d).reshape(n_cells, n2)
    diff = np.concatenate([m1, m2], axis=1)

    n_vars = n1 + n2 + n_cells
    lp = LinearProgram(n_vars, sense="min")
    lp.objective = {n1 + n2 + i: 1 for i in range(n_cells)}
    eye_t = np.eye(n_cells, dtype=int).astype(diff.dtype)
    zero = Fraction(0) if exact else 0.0
    lp.add_rows(np.concatenate([-diff, eye_t], axis=1), ">=", zero)
    lp.add_rows(np.concatenate([diff, eye_t], axis=1), ">=", zero)
    for x in range(Cu):
        lp.add_row({x * Cv + c: 1 for c in range(Cv)}, "=", 1)
    for y in range(Dv):
        lp.add_row({n1 + y * Du + d: 1 for d in range(Du)}, "=", 1)
    sol = solve_lp(lp, exact=exact).require("one-sided gap")

    q1 = _rows_to_garbling(sol.x[:n1], Cu, Cv, exact)
    q2 = _rows_to_garbling(sol.x[n1 : n1 + n2], Dv, Du, exact)
    achieved = tv_norm(garble_left(q1, u), garble_right(v, q2), pad=False)
    gap = sol.objective if exact else max(0.0, float(sol.objective))
    return GapCertificate(gap, q1, q2, achieved)


@dataclass(frozen=True)
class DistanceResult:
    """``d = max(forward.gap, backward.gap)``.

    ``forward`` is the gain from moving ``u -> v``, ``backward`` from ``v -> u``.
    """

    d: float
    forward: GapCertificate
    backward: GapCertificate

    def as_dict(self) -> dict:
        return {"d": float(self.d), "forward": self.forward.as_dict(), "backward": self.backward.as_dict()}


def distance(u: InfoStructure, v: InfoStructure, exact: bool = False) -> DistanceResult:
    fwd = one_sided_gap(u, v, exact=exact)
    bwd = one_sided_gap(v, u, exact=exact)
    return DistanceResult(max(fwd.gap, bwd.gap), fwd, bwd)


def _single_agent_view(u: InfoStructure) -> InfoStructure:
    """Keep player 1's information only; player 2 gets one dummy signal."""
    return InfoStructure(u.prob.sum(axis=2, keepdims=True))


def distance_d1(u: InfoStructure, v: InfoStructure, exact: bool = False) -> float:
    """Distance restricted to games where player 2 has a single action.

    Depends only on the state-and-player-1-signal marginals.
    """
    return distance(_single_agent_view(u), _single_agent_view(v), exact=exact).d


class OrderRelation(str, enum.Enum):
    EQUIVALENT = "equivalent"
    P1_PREFERS_FIRST = "p1_prefers_first"
    P1_PREFERS_SECOND = "p1_prefers_second"
    INCOMPARABLE = "incomparable"


def compare(u: InfoStructure, v: InfoStructure, tol: float = ZERO_TOL) -> OrderRelation:
    """Player 1's ranking of ``u`` and ``v`` across all games."""
    res = distance(u, v)
    u_ok = float(res.forward.gap) <= tol  # nothing to gain by moving to v
    v_ok = float(res.backward.gap) <= tol
    if u_ok and v_ok:
        return OrderRelation.EQUIVALENT
    if u_ok:
        return OrderRelation.P1_PREFERS_FIRST
    if v_ok:
        return OrderRelation.P1_PREFERS_SECOND
    return OrderRelation.INCOMPARABLE


def transfer_strategy(sigma: Garbling, q: Garbling) -> Garbling:
    """Play ``sigma`` after passing one's own signal through ``q``.

    ``q`` maps this structure's signals to the other structure's; ``sigma``
    is a strategy on the other structure.
    """
    if q.target_count != sigma.source_count:
        raise ValueError(f"garbling {q} does not feed strategy {sigma}")
    return Garbling(q.rows.dot(sigma.rows))


# ---------------------------------------------------------------------------
# Bounds


@dataclass(frozen=True)
class DiameterBounds:
    """Smallest and largest distance between structures with state laws ``p`` and ``q``."""

    min_d: float
    max_d: float
    p_opt: tuple[float, ...]
    q_opt: tuple[float, ...]
    closed_form: float | None = None


def _check_prior(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or (arr < -1e-12).any() or abs(arr.sum() - 1) > 1e-9:
        raise ValueError(f"invalid prior {list(p)}")
    return arr


def diameter_bounds(p: Sequence[float], q: Sequence[float]) -> DiameterBounds:
    """Range of ``d(u, v)`` over all ``u`` with state law ``p`` and ``v`` with law ``q``.

    The lower end is ``sum |p - q|``. The upper end is
    ``2 (1 - max_{p', q'} sum_k min(p_k q'_k, p'_k q_k))``; the inner maximum
    is linear in ``(p', q')`` once each ``min`` gets its own variable, so it is
    solved as an LP for any number of states. For two states the three-point
    closed form is reported alongside.
    """
    p, q = _check_prior(p), _check_prior(q)
    if p.shape != q.shape:
        raise ValueError("priors live on different state sets")
    K = len(p)
    lp = LinearProgram(3 * K, sense="max")  # p', q', t
    lp.objective = {2 * K + k: 1 for k in range(K)}
    for k in range(K):
        lp.add_row({2 * K + k: 1, K + k: -p[k]}, "<=", 0.0)  # t_k <= p_k q'_k
        lp.add_row({2 * K + k: 1, k: -q[k]}, "<=", 0.0)  # t_k <= p'_k q_k
    lp.add_row({k: 1 for k in range(K)}, "=", 1)
    lp.add_row({K + k: 1 for k in range(K)}, "=", 1)
    sol = solve_lp(lp).require("diameter bound")
    inner = float(sol.objective)
    closed = None
    if K == 2:
        closed = 2 * (1 - max(min(p[0], q[0]), min(p[1], q[1]), float(p @ q)))
    return DiameterBounds(
        min_d=float(np.abs(p - q).sum()),
        max_d=max(0.0, 2 * (1 - inner)),
        p_opt=tuple(float(x) for x in sol.x[:K]),
        q_opt=tuple(float(x) for x in sol.x[K : 2 * K]),
        closed_form=closed,
    )


@dataclass(frozen=True)
class JointInfoReport:
    """Extra signals that say little beyond the base signals are worth little.

    ``eps_c`` measures how far player 1's extra signal is from being
    independent of (state, player 2's base signal) given player 1's base
    signal; ``eps_d`` is the mirror for player 2. The explicit garblings
    (drop the extra signal on one side, simulate it from the base signal on
    the other) reach norms ``norm_backward`` and ``norm_forward``.
    """

    eps_c: float
    eps_d: float
    bound: float
    d: float
    norm_forward: float
    norm_backward: float
    holds: bool


def _require_pair_factors(u: FactoredStructure) -> None:
    if not isinstance(u, FactoredStructure) or len(u.c_factors) != 2 or len(u.d_factors) != 2:
        raise ValueError("expected a factored structure with (base, extra) components for each player")


def joint_info_bound(u: FactoredStructure, tol: float = 1e-6) -> JointInfoReport:
    _require_pair_factors(u)
    t = u.tensor()  # (k, c, c1, d, d1)
    K, C, C1, D, D1 = t.shape
    eps_c = eps_cond_independence(t, 2, (0, 3), 1)
    eps_d = eps_cond_independence(t, 4, (0, 1), 3)
    bound = max(eps_c, eps_d)

    full = u.structure
    base = u.project([0], [0]).structure
    res = distance(full, base)

    # explicit garblings from the bound's proof
    exact = _is_exact(t)
    one = Fraction(1) if exact else 1.0
    c_cond = t.sum(axis=(0, 3, 4))  # (c, c1)
    d_cond = t.sum(axis=(0, 1, 2))  # (d, d1)

    def simulate(cond: np.ndarray) -> np.ndarray:
        # base signal b -> (b, extra) with the conditional law of the extra part
        n, m = cond.shape
        rows = _zeros((n, n * m), exact)
        for b in range(n):
            mass = cond[b].sum()
            for e in range(m):
                # flat index of (b, e) with the base component least significant
                rows[b, b + n * e] = cond[b, e] / mass if mass != 0 else (one if e == 0 else 0 * one)
        return rows

    def drop(n: int, m: int) -> np.ndarray:
        rows = _zeros((n * m, n), exact)
        for b in range(n):
            for e in range(m):
                rows[b + n * e, b] = one
        return rows

    # u -> base: player 1 forgets c1, player 2 simulates d1 from d
    q1 = Garbling(drop(C, C1))
    q2 = Garbling(simulate(d_cond))
    norm_fwd = tv_norm(garble_left(q1, full), garble_right(base, q2), pad=False)
    # base -> u: player 1 simulates c1 from c, player 2 forgets d1
    q1b = Garbling(simulate(c_cond))
    q2b = Garbling(drop(D, D1))
    norm_bwd = tv_norm(garble_left(q1b, base), garble_right(full, q2b), pad=False)
    holds = float(res.d) <= float(bound) + tol
    return JointInfoReport(eps_c, eps_d, bound, float(res.d), norm_fwd, norm_bwd, holds)


@dataclass(frozen=True)
class ApproxKnowledgeReport:
    eps: float
    eps_p1: float
    eps_p2: float
    bound: float
    d: float
    kappa_c: tuple[int, ...]
    kappa_d: tuple[int, ...]
    holds: bool


def _knowledge_eps(joint: np.ndarray, kappa: Sequence[int]) -> float:
    """Smallest ``e`` with ``P(posterior on kappa(signal) >= 1 - e) >= 1 - e``.

    ``joint`` is indexed (state, signal).
    """
    joint = to_float(joint)
    mass = joint.sum(axis=0)
    pos = mass > 0
    miss = np.zeros_like(mass)
    miss[pos] = 1.0 - joint[np.asarray(kappa)[pos], np.flatnonzero(pos)] / mass[pos]
    order = np.argsort(miss[pos], kind="stable")
    m_sorted = miss[pos][order]
    cum = np.cumsum(mass[pos][order])
    best = 1.0
    for j in range(len(m_sorted)):
        # all signals with the same miss share the threshold
        if j + 1 < len(m_sorted) and m_sorted[j + 1] == m_sorted[j]:
            continue
        best = min(best, max(m_sorted[j], 1.0 - cum[j]))
    return max(0.0, float(best))


def approx_knowledge_bound(
    u: InfoStructure,
    kappa_c: Sequence[int] | None = None,
    kappa_d: Sequence[int] | None = None,
    tol: float = 1e-6,
) -> ApproxKnowledgeReport:
    """``eps``-knowledge of the state and the distance to common knowledge.

    Without explicit maps each signal is assigned its most likely state (ties
    to the lowest index). The comparison structure reveals the state to both
    players under the same state law; its distance is at most ``20 eps``.
    """
    jc = u.prob.sum(axis=2)  # (k, c)
    jd = u.prob.sum(axis=1)  # (k, d)
    if kappa_c is None:
        kappa_c = [int(np.argmax(to_float(jc[:, c]))) for c in range(u.c_count)]
    if kappa_d is None:
        kappa_d = [int(np.argmax(to_float(jd[:, d]))) for d in range(u.d_count)]
    e1 = _knowledge_eps(jc, kappa_c)
    e2 = _knowledge_eps(jd, kappa_d)
    eps = max(e1, e2)
    prior = to_float(u.prior())
    ck = gen_common_knowledge(list(prior / prior.sum()))
    d = float(distance(u.as_float(), ck).d)
    return ApproxKnowledgeReport(eps, e1, e2, 20 * eps, d, tuple(kappa_c), tuple(kappa_d), d <= 20 * eps + tol)


@dataclass(frozen=True)
class InfoInteractionReport:
    """Compares the value of player 1's extra signal in two settings.

    ``d_with`` is ``d(u, v)`` (the setting with the other piece of
    information present), ``d_without`` is ``d(u', v')``. ``premise_eps``
    measures the conditional-independence premise; the inequality is asserted
    only when it is below ``premise_tol``.
    """

    d_with: float
    d_without: float
    premise_eps: float
    premise_holds: bool
    inequality_holds: bool
    asserted: bool = field(default=False)


def check_substitutes(u: FactoredStructure, premise_tol: float = 1e-9, tol: float = 1e-6) -> InfoInteractionReport:
    """Player 1 sees ``(c, c1, c2)``: does ``c1`` lower the value of ``c2``?

    When ``c1`` is independent of ``(c, c2, d)`` given the state, the gain from
    ``c2`` is at least as large without ``c1``.
    """
    if not isinstance(u, FactoredStructure) or len(u.c_factors) != 3:
        raise ValueError("expected player-1 components (c, c1, c2)")
    d_all = list(range(len(u.d_factors)))
    premise = eps_cond_independence(u, "c1", ("c0", "c2", "d"), "k")
    full = u.structure
    v = u.project([0, 1], d_all).structure
    u2 = u.project([0, 2], d_all).structure
    v2 = u.project([0], d_all).structure
    d_with = float(distance(full, v).d)
    d_without = float(distance(u2, v2).d)
    ok = float(premise) <= premise_tol
    ineq = d_without >= d_with - tol
    return InfoInteractionReport(d_with, d_without, float(premise), ok, ineq, asserted=ok)


def check_complements(u: FactoredStructure, premise_tol: float = 1e-9, tol: float = 1e-6) -> InfoInteractionReport:
    """Player 1 gains ``c1``; does player 2's extra ``d1`` raise its value?

    When ``(c, c1)`` and ``d`` are independent given the state, the gain from
    ``c1`` is at least as large with ``d1`` present.
    """
    _require_pair_factors(u)
    premise = eps_cond_independence(u, ("c0", "c1"), "d0", "k")
    full = u.structure
    v = u.project([0], [0, 1]).structure
    u2 = u.project([0, 1], [0]).structure
    v2 = u.project([0], [0]).structure
    d_with = float(distance(full, v).d)
    d_without = float(distance(u2, v2).d)
    ok = float(premise) <= premise_tol
    ineq = d_without <= d_with + tol
    return InfoInteractionReport(d_with, d_without, float(premise), ok, ineq, asserted=ok)
