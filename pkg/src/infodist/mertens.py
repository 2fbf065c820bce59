"""A family of structures that agree on low-order beliefs yet stay far apart.

Ingredients, for an even ``N`` and elements ``A = {1..N}``:

* one ``N/2``-subset ``S_a`` per element, drawn uniformly; the chain moves
  from ``a`` to a uniform element of ``S_a``;
* ``u^l``: draw ``(c1, d1, ..., cl, dl)`` from the chain started uniformly,
  give the odd entries to player 1 and the even entries to player 2, and let
  the state be 1 with probability ``c1 / (N + 1)``;
* ``g^p``: player 1 reports ``p`` elements, player 2 reports ``p - 1``; player
  1 is paid a proper scoring rule for the first report plus a bonus that
  depends on whether the interleaved report is a path of the chain and, if
  not, on who broke it first.

Conditions UI1/UI2 (conditional probabilities of keeping the reported path
valid, all close to 1/2) make ``val(u^l, g^p) >= eps`` for ``p <= l`` and
``val(u^l, g^{l+1}) <= -eps``. They are checked here both by brute force and
by closed forms in terms of overlap counts of the sets ``S_a``.

Elements are 1-based in the public API and 0-based internally. Composite
signals and reports use :func:`infodist.structures.encode` (first entry least
significant).
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .distance import distance
from .games import PayoffFunction, value
from .structures import FactoredStructure, InfoStructure

DEFAULT_ALPHA = Fraction(1, 25)
# Sizes at which the existence argument is known to go through. Documented
# for reference only: nothing in this package instantiates them.
EXISTENCE_N = 52_000_000
EXISTENCE_EPSILON = 3e-17
SAMPLER = "philox4x64/partial-fisher-yates"
DEFAULT_CELL_CAP = 4_000_000


def default_epsilon(N: int) -> Fraction:
    """``0.9 / (10 (N + 1)^2)``, safely below the ``1 / (10 (N + 1)^2)`` ceiling."""
    return Fraction(9, 100 * (N + 1) ** 2)


@dataclass(frozen=True)
class MertensSpec:
    """Even ``N``, the sets ``S[a - 1] = S_a`` (1-based, sorted), ``alpha`` and ``epsilon``."""

    N: int
    S: tuple[tuple[int, ...], ...]
    alpha: Fraction = DEFAULT_ALPHA
    epsilon: Fraction | None = None
    seed: int | None = None
    sampler: str | None = None

    def __post_init__(self) -> None:
        N = self.N
        if N < 4 or N % 2:
            raise ValueError(f"N must be even and at least 4, got {N}")
        S = tuple(tuple(sorted(int(b) for b in row)) for row in self.S)
        if len(S) != N:
            raise ValueError(f"need {N} sets, got {len(S)}")
        for a, row in enumerate(S, start=1):
            if len(row) != N // 2 or len(set(row)) != N // 2:
                raise ValueError(f"S_{a} must hold exactly {N // 2} distinct elements")
            if row[0] < 1 or row[-1] > N:
                raise ValueError(f"S_{a} has elements outside 1..{N}")
        object.__setattr__(self, "S", S)
        eps = default_epsilon(N) if self.epsilon is None else self.epsilon
        if not 0 < eps < Fraction(1, 10 * (N + 1) ** 2):
            raise ValueError(f"epsilon must lie in (0, 1/(10 (N+1)^2)), got {eps}")
        object.__setattr__(self, "epsilon", eps)

    @property
    def X(self) -> np.ndarray:
        """``X[a, b] = 1`` iff ``b + 1 in S_{a+1}`` (0-based)."""
        X = np.zeros((self.N, self.N), dtype=np.int64)
        for a, row in enumerate(self.S):
            X[a, np.asarray(row) - 1] = 1
        return X

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "S": [list(r) for r in self.S],
            "alpha": str(self.alpha),
            "epsilon": str(self.epsilon),
            "seed": self.seed,
            "sampler": self.sampler,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MertensSpec":
        return cls(
            int(d["N"]),
            tuple(tuple(r) for r in d["S"]),
            Fraction(d.get("alpha", DEFAULT_ALPHA)),
            Fraction(d["epsilon"]) if d.get("epsilon") is not None else None,
            d.get("seed"),
            d.get("sampler"),
        )


def sample_S(N: int, seed: int, alpha: Fraction = DEFAULT_ALPHA) -> MertensSpec:
    """Independent uniform ``N/2``-subsets, reproducible from ``seed``."""
    if N < 4 or N % 2:
        raise ValueError(f"N must be even and at least 4, got {N}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    rows = []
    for _ in range(N):
        pool = list(range(1, N + 1))
        for i in range(N // 2):
            j = int(rng.integers(i, N))
            pool[i], pool[j] = pool[j], pool[i]
        rows.append(tuple(sorted(pool[: N // 2])))
    return MertensSpec(N, tuple(rows), alpha=alpha, seed=seed, sampler=SAMPLER)


def paired_spec(N: int = 8) -> MertensSpec:
    """A hand-built spec for ``N = 8`` on which the level-1 conditions hold exactly.

    Elements are grouped into pairs ``P_j = {j, j + 4}``. Each set is a union of
    two pairs, every pair of pairs is used (the last one twice), and
    ``S_{a+4}`` is the complement of ``S_a``.
    """
    if N != 8:
        raise ValueError("the paired construction is only defined for N = 8")
    P = {j: (j, j + 4) for j in range(1, 5)}
    unions = {1: (1, 2), 2: (1, 3), 3: (1, 4), 4: (1, 2)}
    rows: dict[int, tuple[int, ...]] = {}
    for a, (x, y) in unions.items():
        rows[a] = P[x] + P[y]
        rows[a + 4] = tuple(b for b in range(1, 9) if b not in rows[a])
    return MertensSpec(8, tuple(rows[a] for a in range(1, 9)), sampler="paired")


# ---------------------------------------------------------------------------
# Niceness


class Blame(str, enum.Enum):
    NICE = "nice"
    PLAYER_1 = "blame_player_1"
    PLAYER_2 = "blame_player_2"


@dataclass(frozen=True)
class NicenessVerdict:
    """Whether a sequence is a path of the chain; if not, the first bad prefix length."""

    verdict: Blame
    first_failure: int | None = None

    @property
    def nice(self) -> bool:
        return self.verdict is Blame.NICE


def is_nice(spec: MertensSpec, sequence: Sequence[int]) -> NicenessVerdict:
    """Odd-length first failures are player 1's fault, even-length ones player 2's."""
    if not sequence:
        raise ValueError("empty sequence")
    for a in sequence:
        if not 1 <= a <= spec.N:
            raise ValueError(f"element {a} outside 1..{spec.N}")
    for t in range(1, len(sequence)):
        if sequence[t] not in spec.S[sequence[t - 1] - 1]:
            length = t + 1
            return NicenessVerdict(Blame.PLAYER_1 if length % 2 else Blame.PLAYER_2, length)
    return NicenessVerdict(Blame.NICE)


def count_nice(spec: MertensSpec, length: int) -> int:
    X = spec.X
    v = np.ones(spec.N, dtype=object)
    for _ in range(length - 1):
        v = v.dot(X)
    return int(sum(v))


# ---------------------------------------------------------------------------
# Structures and payoffs


def _path_counts(X: np.ndarray, length: int) -> np.ndarray:
    """``t[a1, ..., a_len] = prod X[a_t, a_{t+1}]`` as an integer tensor."""
    N = X.shape[0]
    t = np.ones(N, dtype=np.int64)
    for _ in range(length - 1):
        t = t[..., :, None] * X
    return t


def build_u_l(spec: MertensSpec, l: int, exact: bool = False, cap: int = DEFAULT_CELL_CAP) -> FactoredStructure:
    """``u^l`` with player components ``(c1..cl)`` and ``(d1..dl)``."""
    if l < 1:
        raise ValueError("l must be at least 1")
    N = spec.N
    if 2 * N ** (2 * l) > cap:
        raise ValueError(f"u^{l} has {2 * N ** (2 * l)} cells, above the cap {cap}")
    nice = _path_counts(spec.X, 2 * l)
    order = list(range(0, 2 * l, 2)) + list(range(1, 2 * l, 2))
    nice = nice.transpose(order)  # (c1..cl, d1..dl)
    c1 = np.arange(1, N + 1).reshape((N,) + (1,) * (2 * l - 1))
    # nu = nice / (N (N/2)^(2l-1)); state 1 with probability c1 / (N + 1)
    denom = N * (N // 2) ** (2 * l - 1) * (N + 1)
    if exact:
        w1 = np.vectorize(lambda n, c: Fraction(int(n) * int(c), denom), otypes=[object])(nice, c1)
        w0 = np.vectorize(lambda n, c: Fraction(int(n) * (N + 1 - int(c)), denom), otypes=[object])(nice, c1)
    else:
        w1 = nice * c1 / denom
        w0 = nice * (N + 1 - c1) / denom
    return FactoredStructure.from_tensor(np.stack([w0, w1]), l)


def _report_grid(N: int, p: int) -> list[np.ndarray]:
    """Interleaved 0-based report sequence ``(c'1, d'1, ..., c'p)`` over the action grid."""
    I, J = N**p, N ** (p - 1)
    ii, jj = np.meshgrid(np.arange(I), np.arange(J), indexing="ij")
    c_dig = [(ii // N**t) % N for t in range(p)]
    d_dig = [(jj // N**t) % N for t in range(p - 1)]
    seq = []
    for t in range(p):
        seq.append(c_dig[t])
        if t < p - 1:
            seq.append(d_dig[t])
    return seq


def blame_table(spec: MertensSpec, p: int) -> np.ndarray:
    """``0`` nice, ``1`` player 1 broke the path first, ``2`` player 2 did; indexed (I, J)."""
    X = spec.X
    seq = _report_grid(spec.N, p)
    out = np.zeros(seq[0].shape, dtype=np.int8)
    broken = np.zeros(seq[0].shape, dtype=bool)
    for t in range(1, len(seq)):
        fail = (X[seq[t - 1], seq[t]] == 0) & ~broken
        length = t + 1
        out[fail] = 1 if length % 2 else 2
        broken |= fail
    return out


def build_g_p(spec: MertensSpec, p: int, exact: bool = False, cap: int = DEFAULT_CELL_CAP) -> PayoffFunction:
    """``g^p(k, c', d') = g0(k, c'1) + h^p(c', d')`` on reports ``C^p x D^(p-1)``."""
    if p < 1:
        raise ValueError("p must be at least 1")
    N = spec.N
    if 2 * N ** (2 * p - 1) > cap:
        raise ValueError(f"g^{p} has {2 * N ** (2 * p - 1)} cells, above the cap {cap}")
    eps = spec.epsilon
    blame = blame_table(spec, p)
    first = _report_grid(N, p)[0] + 1  # c'1 as an element of 1..N
    if exact:
        bonus = {0: eps, 1: -5 * eps, 2: 5 * eps}
        shift = Fraction(N + 2, 6 * (N + 1))

        def cell(k, c, b):
            return -(k - Fraction(int(c), N + 1)) ** 2 + shift + bonus[int(b)]

        t = np.stack([np.vectorize(lambda c, b, k=k: cell(k, c, b), otypes=[object])(first, blame) for k in (0, 1)])
    else:
        e = float(eps)
        h = np.choose(blame, [e, -5 * e, 5 * e])
        shift = (N + 2) / (6 * (N + 1))
        t = np.stack([-(k - first / (N + 1)) ** 2 + shift + h for k in (0, 1)])
    return PayoffFunction(t)


# ---------------------------------------------------------------------------
# Overlap statistics and event E


@dataclass(frozen=True)
class YStats:
    """The eight overlap counts for one index tuple (each scaled to be about ``N``)."""

    Y_a: int
    Y_c: int
    Y_ab: int
    Y_cd: int
    Y_c_a: int
    Y_c_ab: int
    Y_cd_a: int
    Y_cd_ab: int


def y_statistics(spec: MertensSpec, a: int, b: int, c: int, d: int) -> YStats:
    """Counts for 1-based indices with ``a != b`` and ``c != d``.

    Upper indices select rows of ``X`` (successor sets), lower indices columns
    (predecessor sets).
    """
    if a == b or c == d:
        raise ValueError("need a != b and c != d")
    X = spec.X
    a, b, c, d = a - 1, b - 1, c - 1, d - 1
    col_a, col_b, row_c, row_d = X[:, a], X[:, b], X[c], X[d]
    return YStats(
        Y_a=int(2 * col_a.sum()),
        Y_c=int(2 * row_c.sum()),
        Y_ab=int(4 * (col_a * col_b).sum()),
        Y_cd=int(4 * (row_c * row_d).sum()),
        Y_c_a=int(4 * (col_a * row_c).sum()),
        Y_c_ab=int(8 * (col_a * col_b * row_c).sum()),
        Y_cd_a=int(8 * (col_a * row_c * row_d).sum()),
        Y_cd_ab=int(16 * (col_a * col_b * row_c * row_d).sum()),
    )


def _ratio_dev(num: np.ndarray, den: np.ndarray, mask: np.ndarray) -> float:
    """Largest ``|num / den - 1|`` over ``mask``; a zero denominator counts as infinite."""
    num, den = num[mask], den[mask]
    if num.size == 0:
        return 0.0
    if (den == 0).any():
        return math.inf
    return float(np.abs(num / den - 1.0).max())


def _four_index(X: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """``T[c, d, a, b] = sum_i X[c, i] X[d, i] X[i, a] X[i, b]``."""
    N = X.shape[0]
    rows = (X[:, None, :] * X[None, :, :]).reshape(N * N, N).astype(np.float32)
    cols = (X[:, :, None] * X[:, None, :]).reshape(N, N * N).astype(np.float32)
    out = np.empty((N * N, N * N), dtype=np.float32)
    for s in range(0, N * N, chunk):
        out[s : s + chunk] = rows[s : s + chunk] @ cols
    return out.reshape(N, N, N, N)


def check_event_E(spec: MertensSpec, two_alpha: float | None = None) -> tuple[bool, float]:
    """Exhaustive check of the seven ratio bounds over all ``a != b``, ``c != d``.

    Returns whether every ratio is within ``two_alpha`` of 1 and the largest
    deviation seen.
    """
    if two_alpha is None:
        two_alpha = float(2 * spec.alpha)
    X = spec.X
    N = spec.N
    if not (X.sum(axis=1) == N // 2).all():
        raise ValueError("every set must have N/2 elements")
    col = 2.0 * X.sum(axis=0)  # Y_a
    Yc = 2.0 * X.sum(axis=1)  # Y^c, = N
    Yab = 4.0 * (X.T @ X)  # [a, b]
    Yca = 4.0 * (X @ X)  # [c, a]
    Ycd = 4.0 * (X @ X.T)  # [c, d]
    Ycab = 8.0 * np.einsum("ia,ib,ci->cab", X, X, X)
    Ycda = 8.0 * np.einsum("ia,ci,di->cda", X, X, X)
    Ycdab = 16.0 * _four_index(X)
    off = ~np.eye(N, dtype=bool)
    full = np.ones((N, N), dtype=bool)
    devs = [
        _ratio_dev(Yab, np.broadcast_to(col[:, None], (N, N)), off),
        _ratio_dev(Ycab, np.broadcast_to(Yca[:, :, None], (N, N, N)), np.broadcast_to(off[None], (N, N, N))),
        _ratio_dev(Ycda, np.broadcast_to(Yca[:, None, :], (N, N, N)), np.broadcast_to(off[:, :, None], (N, N, N))),
        _ratio_dev(
            Ycdab,
            np.broadcast_to(Ycda[:, :, :, None], (N, N, N, N)),
            off[:, :, None, None] & off[None, None, :, :],
        ),
        _ratio_dev(Ycd, np.broadcast_to(Yc[:, None], (N, N)), off),
        _ratio_dev(Yca, np.broadcast_to(Yc[:, None], (N, N)), full),
        _ratio_dev(Ycda, np.broadcast_to(Ycd[:, :, None], (N, N, N)), np.broadcast_to(off[:, :, None], (N, N, N))),
    ]
    worst = max(devs)
    return worst <= two_alpha, worst


# ---------------------------------------------------------------------------
# UI conditions


@dataclass(frozen=True)
class UIFamily:
    """One closed-form family of conditional probabilities.

    ``count`` conditionals were defined (positive conditioning mass),
    ``undefined`` had zero mass; ``worst`` holds the 1-based indices of the
    largest deviation from 1/2.
    """

    name: str
    count: int
    undefined: int
    max_deviation: float
    worst: tuple[int, ...] | None


@dataclass(frozen=True)
class UIReport:
    level: int
    alpha: float
    max_deviation: float
    passes: bool
    families: tuple[UIFamily, ...]
    truthful_all_one: bool | None
    entries: tuple = field(default=(), repr=False)


def _family(name: str, num: np.ndarray, den: np.ndarray, mask: np.ndarray, detail: list | None) -> UIFamily:
    mask = np.broadcast_to(mask, num.shape)
    den = np.broadcast_to(den, num.shape)
    ok = mask & (den > 0)
    undefined = int((mask & (den == 0)).sum())
    if not ok.any():
        return UIFamily(name, 0, undefined, 0.0, None)
    ratio = np.where(ok, num / np.where(den > 0, den, 1), 0.5)
    dev = np.abs(ratio - 0.5)
    idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
    if detail is not None:
        for pos in zip(*np.nonzero(ok)):
            detail.append((name, tuple(int(i) + 1 for i in pos), Fraction(int(num[pos]), int(den[pos]))))
    return UIFamily(name, int(ok.sum()), undefined, float(dev.max()), tuple(int(i) + 1 for i in idx))


def ui_families(spec: MertensSpec, l: int, detail: bool = False) -> tuple[list[UIFamily], list]:
    """Closed forms of every UI conditional at level ``l`` as overlap-count ratios.

    Index conventions (0-based internally, reported 1-based): ``x`` is the
    true signal, ``y`` the misreport, ``z`` the neighbouring true signal,
    ``p, q`` the preceding reported and true signals.
    """
    X = spec.X
    N = spec.N
    eye = np.eye(N, dtype=bool)
    off = ~eye
    out: list[UIFamily] = []
    entries: list | None = [] if detail else None
    # sum_i X[x,i] X[y,i] X[i,z]
    xyz = np.einsum("xi,yi,iz->xyz", X, X, X)
    XXt = X @ X.T  # common successors
    XtX = X.T @ X  # common predecessors
    XX = X @ X  # two-step paths
    # player 1's extra report, given the last true and reported signals
    mask_last = eye[:, :, None] if l == 1 else np.ones((N, N, 1), dtype=bool)
    out.append(_family("ui1_extra_report", xyz, XXt[:, :, None], mask_last, entries))
    if l >= 2:
        # misreport of the last own signal
        out.append(_family("ui1_last_misreport", XXt, X.sum(axis=1)[:, None], off, entries))
        # misreport followed by the opponent's next signal (same preceding report)
        pxy = np.einsum("pi,ix,iy->pxy", X, X, X)  # sum_i X[p,i] X[i,x] X[i,y]
        out.append(_family("ui1_misreport_entry", pxy, XX[:, :, None], off[None], entries))
        # player 2's first misreport and later ones
        out.append(_family("ui2_first_misreport", XtX, X.sum(axis=0)[:, None], off, entries))
        out.append(_family("ui2_misreport_next", xyz, XX[:, None, :], off[:, :, None], entries))
    if l >= 3:
        out.append(_family("ui1_misreport_next", xyz, XX[:, None, :], off[:, :, None], entries))
        T = _four_index(X).astype(np.int64)  # [p, q, x, y]
        pqx = np.einsum("pi,qi,ix->pqx", X, X, X)
        out.append(_family("ui_misreport_after_history", T, pqx[:, :, :, None], off[None, None], entries))
    return out, entries or []


def check_UI(spec: MertensSpec, l: int, detail: bool = False, verify_truthful: bool = True) -> UIReport:
    """Largest deviation from 1/2 among the UI conditionals of ``u^l``."""
    if l < 1:
        raise ValueError("l must be at least 1")
    fams, entries = ui_families(spec, l, detail)
    worst = max(f.max_deviation for f in fams)
    truthful = None
    if verify_truthful and spec.N ** (2 * l) <= 1_000_000:
        truthful = truthful_conditionals_are_one(spec, l)
    alpha = float(spec.alpha)
    return UIReport(l, alpha, worst, worst <= alpha, tuple(fams), truthful, tuple(entries))


def _digits(n_items: int, N: int, length: int) -> np.ndarray:
    idx = np.arange(n_items)
    return np.stack([(idx // N**t) % N for t in range(length)], axis=1) if length else np.zeros((n_items, 0), int)


def _prefix_ok(X: np.ndarray, firsts: np.ndarray, seconds: np.ndarray, max_len: int) -> list[np.ndarray]:
    """``ok[r][u, v]``: interleaving of row ``u`` of ``firsts`` and row ``v`` of ``seconds`` is nice up to ``r``."""
    U, V = firsts.shape[0], seconds.shape[0]
    ok = [None, np.ones((U, V), dtype=bool)]
    prev = np.broadcast_to(firsts[:, None, 0], (U, V))
    cur = ok[1]
    for r in range(2, max_len + 1):
        t = r - 1  # 0-based position of the new element
        nxt = firsts[:, None, t // 2] if t % 2 == 0 else seconds[None, :, t // 2]
        nxt = np.broadcast_to(nxt, (U, V))
        cur = cur & (X[prev, nxt] == 1)
        ok.append(cur)
        prev = nxt
    return ok


def ui_conditionals_bruteforce(spec: MertensSpec, l: int) -> dict[str, list[Fraction]]:
    """Every UI conditional of ``u^l`` straight from the definition, as exact fractions.

    Returns lists keyed ``"ui1_extra"``, ``"ui1_misreport"``, ``"ui2"`` and
    ``"truthful"`` (the conditionals with truthful reports, which must be 1).
    Cost grows like ``N^(3l+1)``; meant for small ``N`` and ``l``.
    """
    N, X = spec.N, spec.X
    n = N**l
    weights = _path_counts(X, 2 * l).transpose(list(range(0, 2 * l, 2)) + list(range(1, 2 * l, 2)))
    # weights[c1..cl, d1..dl] -> W[c, d] with the first entry least significant
    W = weights.transpose(list(range(l - 1, -1, -1)) + list(range(2 * l - 1, l - 1, -1))).reshape(n, n)
    digs = _digits(n, N, l)
    out: dict[str, list[Fraction]] = {"ui1_extra": [], "ui1_misreport": [], "ui2": [], "truthful": []}

    def cond(w: np.ndarray, hi: np.ndarray, lo: np.ndarray) -> list[Fraction | None]:
        den = lo.astype(np.int64) @ w
        num = hi.astype(np.int64) @ w
        return [Fraction(int(a), int(b)) if b else None for a, b in zip(num, den)]

    # UI1: player 1 holds c and reports c' (length l + 1, same first entry)
    ext = _digits(N**l, N, l)  # c'2..c'_{l+1}
    for c in range(n):
        w = W[c]
        if not w.any():
            continue
        rep = np.concatenate([np.full((ext.shape[0], 1), digs[c, 0]), ext], axis=1)
        ok = _prefix_ok(X, rep, digs, 2 * l + 1)
        for v in cond(w, ok[2 * l + 1], ok[2 * l]):
            if v is not None:
                out["ui1_extra"].append(v)
        for m in range(2, l + 1):
            differs = rep[:, m - 1] != digs[c, m - 1]
            for r in (2 * m - 2, 2 * m - 1):
                vals = cond(w, ok[r + 1][differs], ok[r][differs])
                out["ui1_misreport"].extend(v for v in vals if v is not None)
        truthful = np.all(rep[:, :l] == digs[c], axis=1)
        for r in range(1, 2 * l):
            out["truthful"].extend(v for v in cond(w, ok[r + 1][truthful], ok[r][truthful]) if v is not None)

    # UI2: player 2 holds d and reports d' of length p - 1
    for p in range(2, l + 1):
        reps = _digits(N ** (p - 1), N, p - 1)
        for d in range(n):
            w = W[:, d]
            if not w.any():
                continue
            ok = _prefix_ok(X, digs, reps, 2 * p - 1)
            # ok[r][c, d'] ; conditionals over c weighted by w
            for m in range(1, p):
                differs = reps[:, m - 1] != digs[d, m - 1]
                for r in (2 * m - 1, 2 * m):
                    vals = cond(w, ok[r + 1].T[differs], ok[r].T[differs])
                    out["ui2"].extend(v for v in vals if v is not None)
            truthful = np.all(reps == digs[d, : p - 1], axis=1)
            for r in range(1, 2 * p - 2):
                out["truthful"].extend(v for v in cond(w, ok[r + 1].T[truthful], ok[r].T[truthful]) if v is not None)
    return out


def truthful_conditionals_are_one(spec: MertensSpec, l: int) -> bool:
    """Conditionals along truthful reports equal 1 exactly (checked by enumeration)."""
    return all(v == 1 for v in ui_conditionals_bruteforce(spec, l)["truthful"])


def ui_deviation_bruteforce(spec: MertensSpec, l: int) -> float:
    vals = ui_conditionals_bruteforce(spec, l)
    devs = [abs(v - Fraction(1, 2)) for key in ("ui1_extra", "ui1_misreport", "ui2") for v in vals[key]]
    return float(max(devs, default=0))


# ---------------------------------------------------------------------------
# Value experiments


@dataclass(frozen=True)
class ValueExperiment:
    """Values on ``u^l`` and ``u^m`` (``m > l``) for the games ``g^l`` and ``g^(l+1)``.

    ``game_gap = val(u^m, g^(l+1)) - val(u^l, g^(l+1))`` is a lower bound on
    ``d(u^l, u^m)``; ``lp_distance`` is the exact distance.
    """

    N: int
    l: int
    m: int
    epsilon: float
    ui_deviation: float
    ui_passes: bool
    val_l_own: float
    val_l_next: float
    val_m_next: float
    game_gap: float
    lp_distance: float
    signs_ok: bool
    sound: bool

    def as_dict(self) -> dict:
        return asdict(self)


def truthful_gap_experiment(spec: MertensSpec, l: int = 1, m: int | None = None, tol: float = 1e-7) -> ValueExperiment:
    m = l + 1 if m is None else m
    if m <= l:
        raise ValueError("m must exceed l")
    eps = float(spec.epsilon)
    ul = build_u_l(spec, l).structure
    um = build_u_l(spec, m).structure
    g_own = build_g_p(spec, l)
    g_next = build_g_p(spec, l + 1)
    v_own = value(ul, g_own).value
    v_next = value(ul, g_next).value
    vm_next = value(um, g_next).value
    gap = vm_next - v_next
    d = distance(ul, um).d
    ui = check_UI(spec, l, verify_truthful=False)
    signs = v_own >= eps - tol and v_next <= -eps + tol
    return ValueExperiment(
        spec.N, l, m, eps, ui.max_deviation, ui.passes, v_own, v_next, vm_next, gap, float(d), signs, gap <= d + 1e-6
    )


# ---------------------------------------------------------------------------
# Sweeps

SWEEP_COLUMNS = (
    "N",
    "seed",
    "max_ui_deviation",
    "event_e_holds",
    "event_e_deviation",
    "val_u1_g1",
    "val_u1_g2",
    "lp_distance_u1_u2",
)


def _sweep_row(args: tuple) -> dict:
    N, seed, values_max_N, ui_level = args
    spec = sample_S(N, seed)
    ui = check_UI(spec, ui_level, verify_truthful=False)
    e_holds, e_dev = check_event_E(spec)
    row = {
        "N": N,
        "seed": seed,
        "max_ui_deviation": ui.max_deviation,
        "event_e_holds": e_holds,
        "event_e_deviation": e_dev,
        "val_u1_g1": None,
        "val_u1_g2": None,
        "lp_distance_u1_u2": None,
    }
    if N <= values_max_N:
        exp = truthful_gap_experiment(spec, 1, 2)
        row.update(val_u1_g1=exp.val_l_own, val_u1_g2=exp.val_l_next, lp_distance_u1_u2=exp.lp_distance)
    return row


def worker_count(requested: int | None = None) -> int:
    cap = int(os.environ.get("INFODIST_THREADS", "0") or 0)
    n = requested or os.cpu_count() or 1
    return max(1, min(n, cap) if cap > 0 else n)


def sweep(
    N_values: Iterable[int],
    seeds: Iterable[int],
    values_max_N: int = 0,
    ui_level: int = 1,
    workers: int | None = None,
) -> list[dict]:
    """One row per ``(N, seed)``, in input order regardless of scheduling."""
    tasks = [(N, s, values_max_N, ui_level) for N in N_values for s in seeds]
    n_workers = worker_count(workers)
    if n_workers == 1 or len(tasks) < 4:
        return [_sweep_row(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * n_workers))))


def median_deviation_by_N(rows: list[dict]) -> dict[int, float]:
    by_N: dict[int, list[float]] = {}
    for r in rows:
        by_N.setdefault(r["N"], []).append(r["max_ui_deviation"])
    return {N: float(np.median(v)) for N, v in sorted(by_N.items())}
