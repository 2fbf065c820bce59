"""Sampled-game lower bounds on the distance, checked against the LP.

Every zero-sum game ``g`` gives ``|val(u, g) - val(v, g)| <= d(u, v)``. The
searches here evaluate many games at once through their normal forms: each
structure turns a batch of payoff tables into a batch of matrix games over
pure signal-to-action maps, which are solved by enumerating square kernels
(Shapley-Snow). Every kernel candidate gives a valid guarantee, so the best
row candidate is a lower bound and the best column candidate an upper bound
on the value; games where the two disagree are re-solved by LP.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distance import distance
from .games import PayoffFunction, guess_the_state, value
from .lp import solve_matrix_game
from .mertens import worker_count
from .structures import InfoStructure, to_float

SOUNDNESS_SLACK = 1e-6
KERNEL_MAX_SIDE = 6
DEFAULT_CHUNK = 5000


@dataclass(frozen=True)
class GameSampler:
    """I.i.d. payoff tables of shape ``(K, I, J)``.

    Entries are uniform on ``[-1, 1]``, or uniform on the grid
    ``{-1, -1 + step, ..., 1}`` when ``step`` is set. Chunk ``n`` of the stream
    is drawn from the ``n``-th child of ``seed``, so results do not depend on
    how chunks are scheduled.
    """

    seed: int
    i_count: int
    j_count: int
    trials: int = 100_000
    step: float | None = None
    include_named: bool = True
    chunk: int = DEFAULT_CHUNK

    def grid(self) -> np.ndarray:
        n = int(round(2 / self.step))
        if n < 1 or not math.isclose(n * self.step, 2.0):
            raise ValueError(f"step must divide 2, got {self.step}")
        return np.linspace(-1.0, 1.0, n + 1)

    def chunks(self, state_count: int):
        n_chunks = -(-self.trials // self.chunk)
        children = np.random.SeedSequence(self.seed).spawn(n_chunks)
        shape = (state_count, self.i_count, self.j_count)
        for n, child in enumerate(children):
            rng = np.random.Generator(np.random.Philox(child))
            size = min(self.chunk, self.trials - n * self.chunk)
            if self.step is None:
                yield rng.uniform(-1.0, 1.0, size=(size,) + shape)
            else:
                g = self.grid()
                yield g[rng.integers(0, len(g), size=(size,) + shape)]

    def named_games(self, state_count: int) -> list[np.ndarray]:
        """Hand-picked games that separate the extreme structures."""
        if not self.include_named:
            return []
        guess = guess_the_state(state_count)
        out = []
        for g in (guess, guess.negated_swapped()):
            if g.i_count <= self.i_count and g.j_count <= self.j_count:
                out.append(to_float(g.extended(self.i_count, self.j_count).table))
        return out


def _pure_maps(n_signals: int, n_actions: int) -> np.ndarray:
    """Indicator ``A[s, signal, action]`` of every pure map."""
    maps = list(itertools.product(range(n_actions), repeat=n_signals))
    A = np.zeros((len(maps), n_signals, n_actions))
    for s, f in enumerate(maps):
        A[s, np.arange(n_signals), list(f)] = 1.0
    return A


def normal_forms(u: InfoStructure, games: np.ndarray) -> np.ndarray:
    """Batched normal forms ``M[b, s, t]`` of the games ``games[b]`` played on ``u``."""
    p = to_float(u.prob)
    K, C, D = p.shape
    I, J = games.shape[2], games.shape[3]
    A1, A2 = _pure_maps(C, I), _pure_maps(D, J)
    cell = np.einsum("kcd,bkij->bcdij", p, games, optimize=True)
    tmp = np.einsum("bcdij,sci->bsdj", cell, A1, optimize=True)
    return np.einsum("bsdj,tdj->bst", tmp, A2, optimize=True)


def _kernel_bound(M: np.ndarray) -> np.ndarray:
    """Best row-player guarantee over all square-kernel candidates (a lower bound on the value)."""
    B, m, n = M.shape
    best = np.full(B, -np.inf)
    for k in range(1, min(m, n) + 1):
        for R in itertools.combinations(range(m), k):
            sub_rows = M[:, list(R), :]
            for S in itertools.combinations(range(n), k):
                # x^T M[R, S] = v 1^T, sum x = 1
                A = np.zeros((B, k + 1, k + 1))
                A[:, :k, :k] = sub_rows[:, :, list(S)].transpose(0, 2, 1)
                A[:, :k, k] = -1.0
                A[:, k, :k] = 1.0
                det = np.linalg.det(A)
                ok = np.abs(det) > 1e-12
                A[~ok] = np.eye(k + 1)
                rhs = np.zeros((B, k + 1, 1))
                rhs[:, k, 0] = 1.0
                x = np.linalg.solve(A, rhs)[:, :k, 0]
                ok &= (x >= -1e-12).all(axis=1)
                x = np.clip(x, 0.0, None)
                x /= np.where(x.sum(axis=1, keepdims=True) > 0, x.sum(axis=1, keepdims=True), 1.0)
                guarantee = np.einsum("br,brt->bt", x, sub_rows).min(axis=1)
                best = np.where(ok & (guarantee > best), guarantee, best)
    return best


def batched_values(M: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, int]:
    """Values of a batch of matrix games and the number that needed the LP fallback."""
    B, m, n = M.shape
    if max(m, n) > KERNEL_MAX_SIDE:
        return np.array([float(solve_matrix_game(g)[0]) for g in M]), B
    lower = _kernel_bound(M)
    upper = -_kernel_bound(-M.transpose(0, 2, 1))
    vals = lower.copy()
    bad = np.nonzero(upper - lower > tol)[0]
    for b in bad:
        vals[b] = float(solve_matrix_game(M[b])[0])
    return vals, len(bad)


def _vertex_bound(p: np.ndarray, games: np.ndarray) -> np.ndarray:
    """Player 1's exact max-min for two-action games, by vertex enumeration.

    With ``x[c]`` the probability of action 0 after signal ``c``, player 1's
    guarantee is ``sum_d min_j (x . alpha[:, d, j] + beta[d, j])``: concave and
    piecewise linear on the unit box, so its maximum sits where ``C`` of the
    tie hyperplanes and box faces meet.
    """
    B = games.shape[0]
    K, C, D = p.shape
    J = games.shape[3]
    diff = games[:, :, 0, :] - games[:, :, 1, :]  # (B, K, J)
    alpha = np.einsum("kcd,bkj->bcdj", p, diff)
    beta = np.einsum("kcd,bkj->bdj", p, games[:, :, 1, :])
    normals, offsets = [], []
    for c in range(C):
        e = np.zeros((B, C))
        e[:, c] = 1.0
        normals += [e, e]
        offsets += [np.zeros(B), np.ones(B)]
    for d in range(D):
        for j, jj in itertools.combinations(range(J), 2):
            normals.append(alpha[:, :, d, j] - alpha[:, :, d, jj])
            offsets.append(beta[:, d, jj] - beta[:, d, j])
    normals = np.stack(normals, axis=1)  # (B, H, C)
    offsets = np.stack(offsets, axis=1)
    best = np.full(B, -np.inf)
    for combo in itertools.combinations(range(normals.shape[1]), C):
        A = normals[:, list(combo), :]
        det = np.linalg.det(A)
        ok = np.abs(det) > 1e-12
        A = np.where(ok[:, None, None], A, np.eye(C))
        x = np.linalg.solve(A, offsets[:, list(combo), None])[:, :, 0]
        ok &= ((x >= -1e-9) & (x <= 1 + 1e-9)).all(axis=1)
        x = np.clip(x, 0.0, 1.0)
        f = (np.einsum("bc,bcdj->bdj", x, alpha) + beta).min(axis=2).sum(axis=1)
        best = np.where(ok & (f > best), f, best)
    return best


def _vertex_combos(C: int, D: int, J: int) -> int:
    return math.comb(2 * C + D * math.comb(J, 2), C)


def game_value_batch(u: InfoStructure, games: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, int]:
    """Values of ``games[b]`` on ``u`` and the number that needed the LP fallback."""
    p = to_float(u.prob)
    K, C, D = p.shape
    I, J = games.shape[2], games.shape[3]
    if I == 2 and J == 2 and max(_vertex_combos(C, D, J), _vertex_combos(D, C, I)) <= 200:
        lower = _vertex_bound(p, games)
        upper = -_vertex_bound(p.transpose(0, 2, 1), -games.transpose(0, 1, 3, 2))
        vals = lower.copy()
        bad = np.nonzero(upper - lower > tol)[0]
        for b in bad:
            vals[b] = float(solve_matrix_game(normal_forms(u, games[b : b + 1])[0])[0])
        return vals, len(bad)
    if I**C > KERNEL_MAX_SIDE or J**D > KERNEL_MAX_SIDE:
        return np.array([value(u, PayoffFunction(g)).value for g in games]), len(games)
    return batched_values(normal_forms(u, games), tol)


@dataclass(frozen=True)
class GapSearchResult:
    """Largest sampled value difference, with the LP distance for comparison."""

    best_gap: float
    best_game: PayoffFunction | None
    lp_distance: float
    trials: int
    violations: int
    lp_fallbacks: int
    note: str = ""
    values: tuple[float, float] | None = field(default=None)

    @property
    def sound(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "lp_distance": self.lp_distance,
            "best_gap": self.best_gap,
            "best_game": None if self.best_game is None else to_float(self.best_game.table).tolist(),
            "best_game_values": None if self.values is None else list(self.values),
            "trials": self.trials,
            "violations": self.violations,
            "lp_fallbacks": self.lp_fallbacks,
            "sound": self.sound,
            "note": self.note,
        }


def _scan(u: InfoStructure, v: InfoStructure, batches, d: float, workers: int | None) -> tuple:
    def run(games: np.ndarray):
        vu, fu = game_value_batch(u, games)
        vv, fv = game_value_batch(v, games)
        gaps = np.abs(vu - vv)
        b = int(np.argmax(gaps))
        return float(gaps[b]), games[b], (float(vu[b]), float(vv[b])), int((gaps > d + SOUNDNESS_SLACK).sum()), fu + fv, len(games)

    n = worker_count(workers)
    if n == 1:
        results = [run(g) for g in batches]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(run, batches))
    best, game, vals, viol, fb, total = -1.0, None, None, 0, 0, 0
    for gap, g, vv, bad, f, size in results:  # fixed order keeps ties deterministic
        if gap > best:
            best, game, vals = gap, g, vv
        viol += bad
        fb += f
        total += size
    return best, game, vals, viol, fb, total


def _common_actions(u: InfoStructure, v: InfoStructure) -> int:
    return max(u.c_count, u.d_count, v.c_count, v.d_count)


def random_game_gap_search(
    u: InfoStructure, v: InfoStructure, sampler: GameSampler | None = None, workers: int | None = None
) -> GapSearchResult:
    """Largest ``|val(u, g) - val(v, g)|`` over sampled games (a lower bound on the distance)."""
    if u.state_count != v.state_count:
        raise ValueError("structures must share the state space")
    if sampler is None:
        L = _common_actions(u, v)
        sampler = GameSampler(0, L, L)
    K = u.state_count
    d = distance(u, v).d
    batches = list(sampler.chunks(K))
    named = sampler.named_games(K)
    if named:
        batches.append(np.stack(named))
    best, game, vals, viol, fb, total = _scan(u, v, batches, d, workers)
    return GapSearchResult(
        best, PayoffFunction(game) if game is not None else None, float(d), total, viol, fb, "sampled lower bound", vals
    )


def grid_game_gap_search(
    u: InfoStructure,
    v: InfoStructure,
    L: int | tuple[int, int],
    step: float,
    cap: int = 2_000_000,
    workers: int | None = None,
) -> GapSearchResult:
    """Exhaustive search over payoff tables on a grid with ``L`` actions per player.

    Values are 1-Lipschitz in the payoffs (sup norm), so the grid optimum is
    within ``step`` of the best game with ``L`` actions, which in turn reaches
    the distance once ``L`` is at least every signal count.
    """
    I, J = (L, L) if isinstance(L, int) else L
    K = u.state_count
    grid = GameSampler(0, I, J, step=step).grid()
    cells = K * I * J
    count = len(grid) ** cells
    if count > cap:
        raise ValueError(f"{len(grid)}^{cells} = {count} grid games exceed the cap {cap}")
    d = distance(u, v).d

    def batches():
        for start in range(0, count, DEFAULT_CHUNK):
            idx = np.arange(start, min(count, start + DEFAULT_CHUNK))
            digits = np.stack([(idx // len(grid) ** t) % len(grid) for t in range(cells)], axis=1)
            yield grid[digits].reshape(-1, K, I, J)

    best, game, vals, viol, fb, total = _scan(u, v, list(batches()), d, workers)
    note = f"grid step {step}: the best game with {I}x{J} actions is within {step} of this bound"
    return GapSearchResult(best, PayoffFunction(game), float(d), total, viol, fb, note, vals)
