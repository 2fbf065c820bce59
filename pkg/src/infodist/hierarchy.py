"""Finite-order belief hierarchies of finite structures.

Signals are grouped level by level: at level 1 two signals of a player are
equivalent when they induce the same posterior on the state; at level ``n``
when they induce the same law of (state, opponent's level ``n - 1`` class).

Each class carries a digest computed from its belief record alone, so classes
of different structures can be matched without reference to signal labels.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .structures import FactoredStructure, InfoStructure, _is_exact

ROUND_DIGITS = 12
_ROOT = "root"


def _fmt(p) -> str:
    if isinstance(p, Fraction):
        return f"{p.numerator}/{p.denominator}"
    r = round(float(p), ROUND_DIGITS)
    return repr(r + 0.0)  # folds -0.0


def _digest(record: tuple) -> str:
    return hashlib.sha256(repr(record).encode()).hexdigest()[:20]


@dataclass(frozen=True)
class HierarchyPartition:
    """Classes of both players' signals at one level.

    ``classes_p1[c]`` is the class id of original player-1 signal ``c`` (``-1``
    for zero-mass signals); ids follow first occurrence. ``digests_p1[i]`` and
    ``records_p1[i]`` describe class ``i``: the record lists
    ``(state, opponent digest, probability)`` triples.
    """

    level: int
    classes_p1: tuple[int, ...]
    classes_p2: tuple[int, ...]
    digests_p1: tuple[str, ...]
    digests_p2: tuple[str, ...]
    records_p1: tuple[tuple, ...]
    records_p2: tuple[tuple, ...]

    @property
    def n_classes(self) -> tuple[int, int]:
        return len(self.digests_p1), len(self.digests_p2)

    def refines(self, other: "HierarchyPartition") -> bool:
        """Every class of ``self`` lies inside one class of ``other``."""
        for mine, theirs in ((self.classes_p1, other.classes_p1), (self.classes_p2, other.classes_p2)):
            seen: dict[int, int] = {}
            for a, b in zip(mine, theirs):
                if a < 0:
                    continue
                if seen.setdefault(a, b) != b:
                    return False
        return True

    def same_partition(self, other: "HierarchyPartition") -> bool:
        return self.classes_p1 == other.classes_p1 and self.classes_p2 == other.classes_p2


def _group(records: list[tuple]) -> tuple[list[int], list[str], list[tuple]]:
    ids: dict[str, int] = {}
    digests, recs, out = [], [], []
    for rec in records:
        dg = _digest(rec)
        if dg not in ids:
            ids[dg] = len(digests)
            digests.append(dg)
            recs.append(rec)
        out.append(ids[dg])
    return out, digests, recs


def _beliefs(joint: np.ndarray, opp_classes: list[int], opp_digests: list[str]) -> list[tuple]:
    """Record of each own signal's law over (state, opponent class).

    ``joint`` is indexed (state, own signal, opponent signal).
    """
    K, S, T = joint.shape
    n_cls = len(opp_digests)
    ind = np.zeros((T, n_cls), dtype=joint.dtype)
    if _is_exact(joint):
        ind[...] = Fraction(0)
    for t, cl in enumerate(opp_classes):
        ind[t, cl] = 1
    grouped = np.einsum("kst,tm->skm", joint, ind)
    mass = joint.sum(axis=(0, 2))
    records = []
    for s in range(S):
        entries = []
        for k in range(K):
            for m in range(n_cls):
                p = grouped[s, k, m] / mass[s]
                if p != 0 and _fmt(p) not in ("0.0", "0/1"):
                    entries.append((k, opp_digests[m], _fmt(p)))
        records.append(tuple(sorted(entries)))
    return records


def _levels(u: InfoStructure, n: int | None):
    """Yield the canonical partitions for levels 1, 2, ... up to ``n`` (or the fixed point)."""
    canon = u.canonical()
    p = canon.structure.prob
    C, D = p.shape[1], p.shape[2]
    cls1, dig1 = [0] * C, [_ROOT]
    cls2, dig2 = [0] * D, [_ROOT]
    level = 0
    prev_sizes = (1, 1)
    while n is None or level < n:
        level += 1
        rec1 = _beliefs(p, cls2, dig2)
        rec2 = _beliefs(p.transpose(0, 2, 1), cls1, dig1)
        cls1, dig1, r1 = _group(rec1)
        cls2, dig2, r2 = _group(rec2)
        sizes = (len(dig1), len(dig2))
        yield level, canon, (cls1, dig1, r1), (cls2, dig2, r2)
        if n is None and sizes == prev_sizes and level > 1:
            return
        prev_sizes = sizes


def _expand(canon_kept: tuple[int, ...], classes: list[int], size: int) -> tuple[int, ...]:
    out = [-1] * size
    for new, orig in enumerate(canon_kept):
        out[orig] = classes[new]
    return tuple(out)


def _partition(u: InfoStructure, n: int | None) -> tuple[HierarchyPartition, tuple]:
    if isinstance(u, FactoredStructure):
        u = u.flat()
    last = None
    for level, canon, p1, p2 in _levels(u, n):
        last = (level, canon, p1, p2)
    level, canon, (c1, d1, r1), (c2, d2, r2) = last
    part = HierarchyPartition(
        level,
        _expand(canon.c_kept, c1, u.c_count),
        _expand(canon.d_kept, c2, u.d_count),
        tuple(d1),
        tuple(d2),
        tuple(r1),
        tuple(r2),
    )
    return part, (canon, c1, c2, d1, d2)


def hierarchy_partition(u: InfoStructure, n: int) -> HierarchyPartition:
    """Partition of both players' signals by their level-``n`` beliefs."""
    if n < 1:
        raise ValueError("level must be at least 1")
    return _partition(u, n)[0]


def fixed_point_partition(u: InfoStructure) -> HierarchyPartition:
    """First level at which further refinement changes nothing."""
    return _partition(u, None)[0]


def is_non_redundant(u: InfoStructure) -> bool:
    """True when every positive-mass signal has its own belief hierarchy."""
    part = fixed_point_partition(u)
    n1 = sum(1 for c in part.classes_p1 if c >= 0)
    n2 = sum(1 for c in part.classes_p2 if c >= 0)
    return part.n_classes == (n1, n2)


@dataclass(frozen=True)
class HierarchyJoint:
    """Law of (state, player-1 class, player-2 class) at one level, keyed by digests."""

    level: int
    table: dict[tuple[int, str, str], object]

    def close_to(self, other: "HierarchyJoint", tol: float = 1e-9) -> bool:
        keys = set(self.table) | set(other.table)
        return all(abs(float(self.table.get(k, 0)) - float(other.table.get(k, 0))) <= tol for k in keys)

    def max_difference(self, other: "HierarchyJoint") -> float:
        keys = set(self.table) | set(other.table)
        return max((abs(float(self.table.get(k, 0)) - float(other.table.get(k, 0))) for k in keys), default=0.0)

    def as_array(self) -> tuple[np.ndarray, list[str], list[str]]:
        """Dense ``(K, classes1, classes2)`` array with digests in sorted order."""
        d1 = sorted({k[1] for k in self.table})
        d2 = sorted({k[2] for k in self.table})
        K = 1 + max(k[0] for k in self.table)
        out = np.zeros((K, len(d1), len(d2)))
        for (k, a, b), p in self.table.items():
            out[k, d1.index(a), d2.index(b)] = float(p)
        return out, d1, d2


def hierarchy_joint_distribution(u: InfoStructure, n: int) -> HierarchyJoint:
    part, (canon, c1, c2, d1, d2) = _partition(u, n)
    p = canon.structure.prob
    table: dict[tuple[int, str, str], object] = {}
    K, C, D = p.shape
    for k in range(K):
        for c in range(C):
            for d in range(D):
                w = p[k, c, d]
                if w != 0:
                    key = (k, d1[c1[c]], d2[c2[d]])
                    table[key] = table.get(key, 0) + w
    return HierarchyJoint(n, {k: v if isinstance(v, Fraction) else float(v) for k, v in table.items()})
