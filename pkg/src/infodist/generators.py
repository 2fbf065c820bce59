"""Named information structures used in examples, tests and the CLI.

Every generator returns a canonical structure (no zero-mass signals). Priors
given as :class:`fractions.Fraction` produce exact tables.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .structures import FactoredStructure, InfoStructure, as_table


def _prior(prior: Sequence) -> tuple[np.ndarray, bool]:
    exact = any(isinstance(p, Fraction) for p in prior)
    arr = as_table(list(prior), exact=exact)
    if arr.ndim != 1 or len(arr) < 1:
        raise ValueError("prior must be a nonempty vector")
    if exact:
        if any(p < 0 for p in arr) or sum(arr) != 1:
            raise ValueError(f"invalid prior {list(prior)}")
    elif (arr < 0).any() or abs(arr.sum() - 1) > 1e-9:
        raise ValueError(f"invalid prior {list(prior)}")
    return arr, exact


def _zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out[...] = Fraction(0)
        return out
    return np.zeros(shape)


def _finish(table: np.ndarray) -> InfoStructure:
    return InfoStructure(table).canonical().structure


def gen_no_info(prior: Sequence) -> InfoStructure:
    p, exact = _prior(prior)
    t = _zeros((len(p), 1, 1), exact)
    t[:, 0, 0] = p
    return InfoStructure(t)


def gen_full_info_p1(prior: Sequence) -> InfoStructure:
    """Player 1 observes the state, player 2 nothing."""
    p, exact = _prior(prior)
    K = len(p)
    t = _zeros((K, K, 1), exact)
    t[np.arange(K), np.arange(K), 0] = p
    return _finish(t)


def gen_full_info_p2(prior: Sequence) -> InfoStructure:
    p, exact = _prior(prior)
    K = len(p)
    t = _zeros((K, 1, K), exact)
    t[np.arange(K), 0, np.arange(K)] = p
    return _finish(t)


def gen_common_knowledge(prior: Sequence) -> InfoStructure:
    """Both players observe the state."""
    p, exact = _prior(prior)
    K = len(p)
    t = _zeros((K, K, K), exact)
    t[np.arange(K), np.arange(K), np.arange(K)] = p
    return _finish(t)


def gen_extreme_pair(p: Sequence, q: Sequence) -> tuple[InfoStructure, InfoStructure]:
    """Player 1 informed under ``p`` versus player 2 informed under ``q``.

    This pair sits at the largest possible distance for the two priors.
    """
    return gen_full_info_p1(p), gen_full_info_p2(q)


def gen_example6(n: int) -> InfoStructure:
    """Chain structure with ``n + 1`` player-1 and ``n + 2`` player-2 signals.

    Each line ``(0, l, l)`` and ``(1, l, l + 1)`` for ``l = 0..n`` carries mass
    ``1 / (2 (n + 1))``; neither signal alone says much about the state, yet
    the pair reveals it.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    t = _zeros((2, n + 1, n + 2), exact=True)
    w = Fraction(1, 2 * (n + 1))
    for line in range(n + 1):
        t[0, line, line] = w
        t[1, line, line + 1] = w
    return _finish(t)


def gen_example2() -> tuple[InfoStructure, InfoStructure]:
    """Player 1's extra signal is independent of the state but not of player 2's.

    Returns ``(u, v)`` where ``u`` gives player 1 the binary signal and ``v``
    drops it.
    """
    t = _zeros((2, 2, 2), exact=True)
    for k in range(2):
        for c in range(2):
            t[k, c, 1] = Fraction(k + c, 8)
            t[k, c, 0] = (1 - Fraction(k + c, 2)) / 4
    u = InfoStructure(t)
    v = InfoStructure(t.sum(axis=1, keepdims=True))
    return u, v


def gen_rubinstein(p, alpha, T: int) -> InfoStructure:
    """Email-game structure truncated after ``T`` message trips.

    With probability ``p`` the state is 1 and player 1 sends a message that
    bounces back and forth, each trip lost with probability ``alpha``. A
    player's signal is the number of messages she sent. If trip ``t`` is the
    one lost, player 1 sent ``ceil(t / 2)`` and player 2 ``floor(t / 2)``.
    Histories still running after ``T`` trips get a dedicated last signal for
    each player, carrying the tail mass ``p (1 - alpha)^T``.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    exact = isinstance(p, Fraction) or isinstance(alpha, Fraction)
    if exact:
        p, alpha = Fraction(p), Fraction(alpha)
    c_tail = (T + 1) // 2 + 1
    d_tail = T // 2 + 1
    t = _zeros((2, c_tail + 1, d_tail + 1), exact)
    t[0, 0, 0] = 1 - p
    survive = p
    for trip in range(1, T + 1):
        t[1, (trip + 1) // 2, trip // 2] += survive * alpha
        survive = survive * (1 - alpha)
    t[1, c_tail, d_tail] += survive
    return _finish(t)


def gen_random(seed: int, dims: Sequence[int], exact: bool = False, sparsity: float = 0.0) -> InfoStructure:
    """Random ``(K, C, D)`` structure.

    Float tables are Dirichlet(1) draws; exact tables use integer weights in
    ``1..9``. With ``sparsity > 0`` each cell is zeroed with that probability
    (at least one cell survives) before canonicalisation.
    """
    if len(dims) != 3 or min(dims) < 1:
        raise ValueError(f"dims must be three positive sizes, got {dims}")
    rng = np.random.default_rng(seed)
    size = math.prod(dims)
    if exact:
        w = rng.integers(1, 10, size=size)
    else:
        w = rng.dirichlet(np.ones(size))
    if sparsity > 0:
        mask = rng.random(size) >= sparsity
        if not mask.any():
            mask[rng.integers(size)] = True
        w = w * mask
    if exact:
        total = int(w.sum())
        t = np.array([Fraction(int(x), total) for x in w], dtype=object)
    else:
        t = w / w.sum()
    return _finish(t.reshape(tuple(dims)))


def gen_cond_independent(
    prior: Sequence[float], c_kernel: np.ndarray, d_kernel: np.ndarray
) -> InfoStructure:
    """``u(k, c, d) = prior[k] c_kernel[k, c] d_kernel[k, d]``: signals independent given the state."""
    p, _ = _prior(prior)
    t = p[:, None, None] * np.asarray(c_kernel)[:, :, None] * np.asarray(d_kernel)[:, None, :]
    return _finish(t)


def gen_xor_substitutes() -> FactoredStructure:
    """State is the parity of two independent fair bits, both seen by player 1.

    Player 1's axis is ``(c, c1, c2)`` with trivial base ``c``; player 2 sees nothing.
    """
    t = _zeros((2, 1, 2, 2, 1), exact=True)
    for c1 in range(2):
        for c2 in range(2):
            t[(c1 + c2) % 2, 0, c1, c2, 0] = Fraction(1, 4)
    return FactoredStructure.from_tensor(t, 3)


def gen_complements_example() -> FactoredStructure:
    """Player 2's noisy signal ``d`` is right with probability 2/3 and ``d1`` reveals the state.

    Player 1 learns only whether ``d`` is right (``c1 = 1`` iff ``d = k``).
    Axes: player 1 ``(c, c1)`` with trivial ``c``, player 2 ``(d, d1)``.
    """
    t = _zeros((2, 1, 2, 2, 2), exact=True)
    for k in range(2):
        for d in range(2):
            w = Fraction(1, 2) * (Fraction(2, 3) if d == k else Fraction(1, 3))
            t[k, 0, int(d == k), d, k] = w
    return FactoredStructure.from_tensor(t, 2)


def with_trivial_base(u: InfoStructure) -> FactoredStructure:
    """View ``u`` as base signals of size 1 plus one extra component per player."""
    return FactoredStructure(u, (1, u.c_count), (1, u.d_count))
