"""Finite zero-sum Bayesian games: payoffs, values and brute-force oracles.

Player 1 (maximiser) sees ``c``, player 2 sees ``d``; after the draw
``(k, c, d) ~ u`` they pick ``i`` and ``j`` and player 1 receives ``g(k, i, j)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lp import LinearProgram, solve_lp, solve_matrix_game
from .structures import Garbling, InfoStructure, _is_exact, as_table, garble_left, garble_right, to_float

VALUE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class PayoffFunction:
    """Payoff table ``g[k, i, j]`` with entries in ``[-1, 1]``.

    Outside the native action sets the table is extended by the usual
    convention: an out-of-range action of player 1 pays ``-1``, and an
    out-of-range action of player 2 against an in-range one pays ``+1``.
    Values never depend on the extension; it only matters when games of
    different sizes are compared on a common action grid.
    """

    table: np.ndarray
    extend: bool = True

    def __post_init__(self) -> None:
        t = self.table if isinstance(self.table, np.ndarray) else as_table(self.table)
        if t.ndim != 3 or min(t.shape) < 1:
            raise ValueError(f"payoff table must be (K, I, J) with nonempty axes, got {t.shape}")
        if _is_exact(t):
            ok = all(-1 <= v <= 1 for v in t.ravel())
        else:
            ok = bool(np.all(np.isfinite(t)) and np.all(np.abs(t) <= 1 + 1e-12))
        if not ok:
            raise ValueError("payoffs must lie in [-1, 1]")
        object.__setattr__(self, "table", t)

    @property
    def state_count(self) -> int:
        return self.table.shape[0]

    @property
    def i_count(self) -> int:
        return self.table.shape[1]

    @property
    def j_count(self) -> int:
        return self.table.shape[2]

    @property
    def exact(self) -> bool:
        return _is_exact(self.table)

    def at(self, k: int, i: int, j: int):
        if i < self.i_count and j < self.j_count:
            return self.table[k, i, j]
        if not self.extend:
            raise IndexError(f"action ({i}, {j}) outside the native sets and extension is off")
        return -1 if i >= self.i_count else 1

    def extended(self, i_count: int, j_count: int) -> "PayoffFunction":
        """The same game written on larger action sets."""
        if not self.extend:
            raise ValueError("extension convention is disabled for this payoff")
        I, J = max(i_count, self.i_count), max(j_count, self.j_count)
        t = np.empty((self.state_count, I, J), dtype=self.table.dtype)
        t[...] = 1
        t[:, self.i_count :, :] = -1
        t[:, : self.i_count, : self.j_count] = self.table
        if self.exact:
            t = as_table(t, exact=True)
        return PayoffFunction(t)

    def negated_swapped(self) -> "PayoffFunction":
        """The game seen from player 2: roles exchanged and payoffs negated."""
        return PayoffFunction(-self.table.transpose(0, 2, 1))

    def __repr__(self) -> str:
        return f"PayoffFunction(K={self.state_count}, I={self.i_count}, J={self.j_count})"


def matching_pennies(state_count: int = 2) -> PayoffFunction:
    t = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return PayoffFunction(np.broadcast_to(t, (state_count, 2, 2)).copy())


def guess_the_state(state_count: int = 2) -> PayoffFunction:
    """Player 1 wins 1 for naming the state and loses 1 otherwise; player 2 is a dummy."""
    t = -np.ones((state_count, state_count, 1))
    t[np.arange(state_count), np.arange(state_count), 0] = 1
    return PayoffFunction(t)


@dataclass(frozen=True)
class ValueCertificate:
    """Value together with optimal strategies and their guarantees.

    ``guarantee1`` is what ``sigma1`` secures against every reply and
    ``guarantee2`` what ``sigma2`` concedes at most; their difference is the
    reported duality gap.
    """

    value: float
    sigma1: Garbling
    sigma2: Garbling
    guarantee1: float
    guarantee2: float

    @property
    def duality_gap(self) -> float:
        return float(self.guarantee2 - self.guarantee1)


def _check_dims(u: InfoStructure, g: PayoffFunction) -> None:
    if u.state_count != g.state_count:
        raise ValueError(f"structure has {u.state_count} states, payoff has {g.state_count}")


def _tables(u: InfoStructure, g: PayoffFunction, *more):
    arrays = [u.prob, g.table] + [m.rows for m in more]
    if any(_is_exact(a) for a in arrays) and not all(_is_exact(a) for a in arrays):
        arrays = [to_float(a) for a in arrays]
    return arrays


def payoff(u: InfoStructure, g: PayoffFunction, s1: Garbling, s2: Garbling):
    """Expected payoff of the strategy pair ``(s1, s2)``."""
    _check_dims(u, g)
    if s1.source_count != u.c_count or s1.target_count != g.i_count:
        raise ValueError(f"player-1 strategy {s1} does not fit {u.c_count} signals and {g.i_count} actions")
    if s2.source_count != u.d_count or s2.target_count != g.j_count:
        raise ValueError(f"player-2 strategy {s2} does not fit {u.d_count} signals and {g.j_count} actions")
    p, t, a, b = _tables(u, g, s1, s2)
    out = np.einsum("kcd,ci,dj,kij->", p, a, b, t)
    return out if _is_exact(p) else float(out)


def guarantee_p1(u: InfoStructure, g: PayoffFunction, s1: Garbling):
    """Worst-case payoff of ``s1``: player 2 best-responds signal by signal."""
    p, t, a = _tables(u, g, s1)
    A = np.einsum("kcd,ci,kij->dj", p, a, t)
    return sum(min(row) for row in A) if _is_exact(A) else float(A.min(axis=1).sum())


def guarantee_p2(u: InfoStructure, g: PayoffFunction, s2: Garbling):
    """Best payoff player 1 can extract against ``s2``."""
    p, t, b = _tables(u, g, s2)
    B = np.einsum("kcd,dj,kij->ci", p, b, t)
    return sum(max(row) for row in B) if _is_exact(B) else float(B.max(axis=1).sum())


def _stochastic(rows: np.ndarray, exact: bool) -> Garbling:
    """Normalise nonnegative rows; empty rows become a point mass on action 0."""
    out = []
    for r in rows:
        r = [abs(v) for v in r] if exact else np.abs(np.asarray(r, dtype=float))
        s = sum(r)
        if (s == 0) if exact else (s <= 1e-15):
            r = [Fraction(0)] * len(r) if exact else np.zeros(len(r))
            r[0] = Fraction(1) if exact else 1.0
            out.append(r)
        else:
            out.append([v / s for v in r] if exact else np.asarray(r) / s)
    return Garbling(np.array(out, dtype=object if exact else float))


def value(u: InfoStructure, g: PayoffFunction, exact: bool = False) -> ValueCertificate:
    """Value of the game together with optimal strategies for both players.

    Player 1's LP maximises ``sum_d w_d`` over behaviour strategies ``s1``
    subject to ``sum_{k,c,i} u(k,c,d) s1(i|c) g(k,i,j) >= w_d`` for all
    ``(d, j)``. The multipliers of those rows, normalised per ``d``, are an
    optimal strategy of player 2.
    """
    _check_dims(u, g)
    if exact:
        u = u.as_exact()
        if not g.exact:
            g = PayoffFunction(as_table(g.table, exact=True))
    p, t = _tables(u, g)
    K, C, D = p.shape
    I, J = t.shape[1], t.shape[2]
    n_sigma = C * I
    lp = LinearProgram(n_sigma + D, sense="max")
    lp.objective = {n_sigma + d: 1 for d in range(D)}
    for d in range(D):
        lp.set_bounds(n_sigma + d, None, None)
    # coef[d, j, c, i] = sum_k u(k, c, d) g(k, i, j)
    coef = np.einsum("kcd,kij->djci", p, t).reshape(D * J, n_sigma)
    block = np.zeros((D * J, n_sigma + D), dtype=coef.dtype)
    if exact:
        block[...] = Fraction(0)
    block[:, :n_sigma] = coef
    for d in range(D):
        block[d * J : (d + 1) * J, n_sigma + d] = -1
    lp.add_rows(block, ">=", Fraction(0) if exact else 0.0)
    for c in range(C):
        lp.add_row({c * I + i: 1 for i in range(I)}, "=", 1)
    sol = solve_lp(lp, exact=exact).require("game value")

    x = sol.x
    sig1 = np.array([[x[c * I + i] for i in range(I)] for c in range(C)], dtype=object if exact else float)
    sigma1 = _stochastic(sig1, exact)
    y = np.array([[sol.duals[d * J + j] for j in range(J)] for d in range(D)], dtype=object if exact else float)
    sigma2 = _stochastic(y, exact)
    g1 = guarantee_p1(u, g, sigma1)
    g2 = guarantee_p2(u, g, sigma2)
    val = sol.objective if exact else float(sol.objective)
    return ValueCertificate(val, sigma1, sigma2, g1, g2)


def value_role_swapped(u: InfoStructure, g: PayoffFunction) -> float:
    """Value computed as minus the value of the game seen from player 2."""
    return -value(u.swap_players(), g.negated_swapped()).value


def pure_strategy_matrix(u: InfoStructure, g: PayoffFunction, cap: int = 10_000) -> np.ndarray:
    """Normal form over pure maps ``C -> I`` (rows) and ``D -> J`` (columns)."""
    _check_dims(u, g)
    K, C, D = u.shape
    I, J = g.i_count, g.j_count
    if I**C > cap or J**D > cap:
        raise ValueError(f"pure-strategy counts {I}^{C} and {J}^{D} exceed the cap {cap}")
    p, t = _tables(u, g)
    rows = list(itertools.product(range(I), repeat=C))
    cols = list(itertools.product(range(J), repeat=D))
    # contribution of each signal pair (c, d) for every action pair (i, j)
    cell = np.einsum("kcd,kij->cdij", p, t)
    M = np.empty((len(rows), len(cols)), dtype=cell.dtype)
    for a, f in enumerate(rows):
        picked = cell[np.arange(C), :, list(f), :]  # (C, D, J)
        for b, h in enumerate(cols):
            M[a, b] = picked[:, np.arange(D), list(h)].sum()
    return M


def value_oracle_enumeration(u: InfoStructure, g: PayoffFunction, cap: int = 10_000, exact: bool | None = None):
    """Value via the normal form over pure signal-to-action maps.

    Independent of :func:`value`'s behaviour-strategy LP. The matrix game is
    solved with the rational simplex when the inputs are exact (or when
    ``exact=True``).
    """
    if exact is None:
        exact = u.exact and g.exact
    M = pure_strategy_matrix(u, g, cap)
    if exact and not _is_exact(M):
        M = as_table(M, exact=True)
    val, _, _ = solve_matrix_game(M.tolist(), exact=exact)
    return val if exact else float(val)


@dataclass(frozen=True)
class MonotonicityReport:
    value: float
    value_left: float | None
    value_right: float | None
    holds: bool

    def __str__(self) -> str:
        return (
            f"val(q.u)={self.value_left} <= val(u)={self.value} <= val(u.q)={self.value_right}: "
            f"{'ok' if self.holds else 'VIOLATED'}"
        )


def monotonicity_check(
    u: InfoStructure,
    g: PayoffFunction,
    q_left: Garbling | None = None,
    q_right: Garbling | None = None,
    tol: float = VALUE_TOL,
) -> MonotonicityReport:
    """Garbling player 1's signal cannot help player 1; garbling player 2's cannot hurt."""
    v = value(u, g).value
    vl = value(garble_left(q_left, u), g).value if q_left is not None else None
    vr = value(garble_right(u, q_right), g).value if q_right is not None else None
    holds = (vl is None or vl <= v + tol) and (vr is None or v <= vr + tol)
    return MonotonicityReport(v, vl, vr, holds)


def random_payoff(rng: np.random.Generator, state_count: int, i_count: int, j_count: int) -> PayoffFunction:
    return PayoffFunction(rng.uniform(-1.0, 1.0, size=(state_count, i_count, j_count)))


def is_close(a, b, tol: float = VALUE_TOL) -> bool:
    return math.isclose(float(a), float(b), abs_tol=tol, rel_tol=0.0)
