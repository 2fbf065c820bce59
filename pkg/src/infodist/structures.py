"""Finite information structures and their algebra.

An information structure is a joint law ``u(k, c, d)`` of a state ``k`` and one
private signal per player, stored as a dense ``(K, C, D)`` array. Tables are
either ``float64`` or ``object`` arrays of :class:`fractions.Fraction` (the
exact mode used by oracle tests); every operation here preserves the mode.

Composite signals (a player observing several components) use mixed-radix
integers with the *first* component least significant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

MASS_TOL = 1e-9


def _is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def as_table(values, exact: bool = False) -> np.ndarray:
    """Coerce nested sequences to a float or Fraction array."""
    if exact:
        arr = np.asarray(values, dtype=object)
        flat = [v if isinstance(v, Fraction) else Fraction(v) for v in arr.ravel()]
        return np.array(flat, dtype=object).reshape(arr.shape)
    return np.asarray(values, dtype=float)


def to_float(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float) if _is_exact(a) else a


def _mass_error(total, exact: bool) -> float:
    return 0.0 if exact and total == 1 else abs(float(total) - 1.0)


# ---------------------------------------------------------------------------
# Garblings


@dataclass(frozen=True, eq=False)
class Garbling:
    """Row-stochastic kernel ``rows[s, t] = q(t | s)``.

    Also used as a behaviour strategy (signals to mixed actions).
    """

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = self.rows
        if not isinstance(rows, np.ndarray):
            rows = as_table(rows)
        if rows.ndim != 2 or rows.shape[1] == 0:
            raise ValueError(f"garbling needs a 2-d table with a target axis, got {rows.shape}")
        if _is_exact(rows):
            bad = any(v < 0 or v > 1 for v in rows.ravel())
            sums_ok = all(sum(r) == 1 for r in rows)
        else:
            bad = bool((rows < -MASS_TOL).any() or (rows > 1 + MASS_TOL).any())
            sums_ok = bool(np.all(np.abs(rows.sum(axis=1) - 1) <= MASS_TOL))
        if bad:
            raise ValueError("garbling entries must lie in [0, 1]")
        if not sums_ok:
            raise ValueError("garbling rows must sum to 1")
        object.__setattr__(self, "rows", rows)

    @property
    def source_count(self) -> int:
        return self.rows.shape[0]

    @property
    def target_count(self) -> int:
        return self.rows.shape[1]

    @property
    def exact(self) -> bool:
        return _is_exact(self.rows)

    @classmethod
    def identity(cls, n: int, exact: bool = False) -> "Garbling":
        return cls(as_table(np.eye(n, dtype=int), exact=exact))

    @classmethod
    def constant(cls, n: int, m: int, target: int = 0, exact: bool = False) -> "Garbling":
        rows = np.zeros((n, m), dtype=int)
        rows[:, target] = 1
        return cls(as_table(rows, exact=exact))

    @classmethod
    def from_map(cls, mapping: Sequence[int], m: int, exact: bool = False) -> "Garbling":
        """Deterministic kernel sending source ``s`` to ``mapping[s]``."""
        rows = np.zeros((len(mapping), m), dtype=int)
        rows[np.arange(len(mapping)), list(mapping)] = 1
        return cls(as_table(rows, exact=exact))

    def then(self, other: "Garbling") -> "Garbling":
        """Apply ``self`` first and ``other`` second."""
        return compose(self, other)

    def __repr__(self) -> str:
        return f"Garbling({self.source_count}->{self.target_count})"


def compose(q: Garbling, q_next: Garbling) -> Garbling:
    """Kernel of ``q`` followed by ``q_next``: ``(q q')(t|s) = sum_m q(m|s) q'(t|m)``."""
    if q.target_count != q_next.source_count:
        raise ValueError(f"cannot compose {q} with {q_next}")
    return Garbling(q.rows.dot(q_next.rows))


# ---------------------------------------------------------------------------
# Information structures


@dataclass(frozen=True, eq=False)
class InfoStructure:
    """Joint law over (state, player-1 signal, player-2 signal).

    ``labels`` is an optional ``{"k": [...], "c": [...], "d": [...]}`` mapping
    used only when reporting.
    """

    prob: np.ndarray
    labels: dict | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        prob = self.prob
        if not isinstance(prob, np.ndarray):
            prob = as_table(prob)
        if prob.ndim != 3:
            raise ValueError(f"information structure must be a (K, C, D) table, got shape {prob.shape}")
        if prob.shape[0] < 1 or prob.shape[1] < 1 or prob.shape[2] < 1:
            raise ValueError("every axis needs at least one index")
        exact = _is_exact(prob)
        if exact:
            if any(v < 0 for v in prob.ravel()):
                raise ValueError("probabilities must be nonnegative")
        elif not np.all(np.isfinite(prob)) or (prob < 0).any():
            raise ValueError("probabilities must be finite and nonnegative")
        if _mass_error(prob.sum(), exact) > MASS_TOL:
            raise ValueError(f"total mass is {float(prob.sum())!r}, expected 1")
        object.__setattr__(self, "prob", prob)

    @property
    def state_count(self) -> int:
        return self.prob.shape[0]

    @property
    def c_count(self) -> int:
        return self.prob.shape[1]

    @property
    def d_count(self) -> int:
        return self.prob.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.prob.shape

    @property
    def exact(self) -> bool:
        return _is_exact(self.prob)

    def as_float(self) -> "InfoStructure":
        return self if not self.exact else InfoStructure(to_float(self.prob), self.labels)

    def as_exact(self) -> "InfoStructure":
        """Exact copy; float entries are converted to the nearest simple fraction."""
        if self.exact:
            return self
        fr = np.array([Fraction(v).limit_denominator(10**12) for v in self.prob.ravel()], dtype=object)
        fr = fr.reshape(self.shape)
        return InfoStructure(fr / fr.sum(), self.labels)

    def prior(self) -> np.ndarray:
        return self.prob.sum(axis=(1, 2))

    def padded(self, c_count: int, d_count: int) -> "InfoStructure":
        """Append zero-mass signals so the table has at least the given sizes."""
        K, C, D = self.shape
        if c_count <= C and d_count <= D:
            return self
        out = np.zeros((K, max(C, c_count), max(D, d_count)), dtype=self.prob.dtype)
        if self.exact:
            out[...] = Fraction(0)
        out[:, :C, :D] = self.prob
        return InfoStructure(out)

    def canonical(self, tol: float = 0.0) -> "CanonicalForm":
        """Drop signals whose total mass is ``<= tol`` (exactly zero by default)."""
        c_mass = self.prob.sum(axis=(0, 2))
        d_mass = self.prob.sum(axis=(0, 1))
        c_keep = [i for i, m in enumerate(c_mass) if m > tol]
        d_keep = [i for i, m in enumerate(d_mass) if m > tol]
        prob = self.prob[:, c_keep][:, :, d_keep]
        if tol > 0 and not self.exact:
            prob = prob / prob.sum()
        labels = None
        if self.labels:
            labels = dict(self.labels)
            if "c" in labels:
                labels["c"] = [labels["c"][i] for i in c_keep]
            if "d" in labels:
                labels["d"] = [labels["d"][i] for i in d_keep]
        return CanonicalForm(InfoStructure(prob, labels), tuple(c_keep), tuple(d_keep))

    def is_canonical(self) -> bool:
        c_mass = self.prob.sum(axis=(0, 2))
        d_mass = self.prob.sum(axis=(0, 1))
        return all(m > 0 for m in c_mass) and all(m > 0 for m in d_mass)

    def relabeled(self, c_perm: Sequence[int], d_perm: Sequence[int]) -> "InfoStructure":
        """Signal ``c`` becomes ``c_perm[c]`` (same for ``d``)."""
        out = np.empty_like(self.prob)
        out[:, np.asarray(c_perm)[:, None], np.asarray(d_perm)[None, :]] = self.prob
        return InfoStructure(out)

    def swap_players(self) -> "InfoStructure":
        return InfoStructure(self.prob.transpose(0, 2, 1).copy())

    def __repr__(self) -> str:
        mode = "exact" if self.exact else "float"
        return f"InfoStructure(K={self.state_count}, C={self.c_count}, D={self.d_count}, {mode})"


@dataclass(frozen=True)
class CanonicalForm:
    """A canonical structure plus, per player, the original index of each kept signal."""

    structure: InfoStructure
    c_kept: tuple[int, ...]
    d_kept: tuple[int, ...]

    def c_index(self, original: int) -> int:
        """New index of an original player-1 signal, or -1 when it was dropped."""
        return self.c_kept.index(original) if original in self.c_kept else -1

    def d_index(self, original: int) -> int:
        return self.d_kept.index(original) if original in self.d_kept else -1


# ---------------------------------------------------------------------------
# Mixed-radix composite signals


def encode(digits: Sequence[int], radices: Sequence[int]) -> int:
    """Flat index of a tuple; the first digit is least significant."""
    if len(digits) != len(radices):
        raise ValueError("digits and radices differ in length")
    idx = 0
    for dgt, r in zip(reversed(digits), reversed(radices)):
        if not 0 <= dgt < r:
            raise ValueError(f"digit {dgt} out of range for radix {r}")
        idx = idx * r + dgt
    return idx


def decode(index: int, radices: Sequence[int]) -> tuple[int, ...]:
    if not 0 <= index < math.prod(radices):
        raise ValueError(f"index {index} out of range for radices {tuple(radices)}")
    out = []
    for r in radices:
        index, dgt = divmod(index, r)
        out.append(dgt)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class FactoredStructure:
    """An information structure whose signal axes are products of components.

    ``c_factors = (n1, n2, ...)`` means player 1 observes ``(c1, c2, ...)``
    with ``ci < ni``, flattened by :func:`encode`.
    """

    structure: InfoStructure
    c_factors: tuple[int, ...]
    d_factors: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "c_factors", tuple(int(n) for n in self.c_factors))
        object.__setattr__(self, "d_factors", tuple(int(n) for n in self.d_factors))
        if math.prod(self.c_factors) != self.structure.c_count:
            raise ValueError(f"c factors {self.c_factors} do not multiply to {self.structure.c_count}")
        if math.prod(self.d_factors) != self.structure.d_count:
            raise ValueError(f"d factors {self.d_factors} do not multiply to {self.structure.d_count}")

    @property
    def prob(self) -> np.ndarray:
        return self.structure.prob

    @property
    def state_count(self) -> int:
        return self.structure.state_count

    def axis_names(self) -> list[str]:
        return ["k"] + [f"c{i}" for i in range(len(self.c_factors))] + [
            f"d{i}" for i in range(len(self.d_factors))
        ]

    def tensor(self) -> np.ndarray:
        """Table indexed ``(k, c1, c2, ..., d1, d2, ...)``."""
        nc, nd = len(self.c_factors), len(self.d_factors)
        t = self.prob.reshape((self.state_count, *reversed(self.c_factors), *reversed(self.d_factors)))
        order = [0] + [nc - i for i in range(nc)] + [1 + nc + nd - 1 - i for i in range(nd)]
        return t.transpose(order)

    @classmethod
    def from_tensor(cls, t: np.ndarray, n_c: int) -> "FactoredStructure":
        """Inverse of :meth:`tensor`; the first ``n_c`` signal axes belong to player 1."""
        K = t.shape[0]
        c_factors = t.shape[1 : 1 + n_c]
        d_factors = t.shape[1 + n_c :]
        nc, nd = len(c_factors), len(d_factors)
        order = [0] + [nc - i for i in range(nc)] + [1 + nc + nd - 1 - i for i in range(nd)]
        inv = np.argsort(order)
        flat = t.transpose(inv).reshape(K, math.prod(c_factors), math.prod(d_factors))
        return cls(InfoStructure(np.ascontiguousarray(flat)), c_factors, d_factors)

    def project(self, c_keep: Iterable[int], d_keep: Iterable[int]) -> "FactoredStructure":
        """Marginal keeping the listed components (in the given order) for each player."""
        c_keep, d_keep = list(c_keep), list(d_keep)
        nc = len(self.c_factors)
        t = self.tensor()
        axes = [0] + [1 + i for i in c_keep] + [1 + nc + j for j in d_keep]
        drop = tuple(a for a in range(t.ndim) if a not in axes)
        m = t.sum(axis=drop) if drop else t
        # summing keeps the remaining axes in increasing order; reorder as requested
        remaining = [a for a in range(t.ndim) if a not in drop]
        m = m.transpose([remaining.index(a) for a in axes])
        if not c_keep:
            m = np.expand_dims(m, 1)
        if not d_keep:
            m = np.expand_dims(m, m.ndim)
        n_c = max(1, len(c_keep))
        return FactoredStructure.from_tensor(m, n_c)

    def flat(self) -> InfoStructure:
        return self.structure

    def __repr__(self) -> str:
        return f"FactoredStructure(K={self.state_count}, c={self.c_factors}, d={self.d_factors})"


def _table_of(u) -> np.ndarray:
    return u.prob if isinstance(u, (InfoStructure, FactoredStructure)) else np.asarray(u)


def marginal(u: InfoStructure | FactoredStructure, kept_axes: Iterable[str]) -> np.ndarray:
    """Marginal law over the named axes, returned in canonical axis order.

    Names are ``"k"``, ``"c"``, ``"d"`` and, for factored structures, the
    component names ``"c0", "c1", ...`` and ``"d0", ...``.
    """
    kept = list(dict.fromkeys(kept_axes))
    if not kept:
        raise ValueError("marginal needs at least one axis")
    if isinstance(u, FactoredStructure) and any(a not in ("k", "c", "d") for a in kept):
        names = u.axis_names()
        expanded = []
        for a in kept:
            if a in ("c", "d"):
                expanded += [n for n in names if n[0] == a]
            elif a in names:
                expanded.append(a)
            else:
                raise ValueError(f"unknown axis {a!r}; available: {names}")
        t = u.tensor()
        keep_idx = sorted(names.index(a) for a in expanded)
        drop = tuple(i for i in range(t.ndim) if i not in keep_idx)
        return t.sum(axis=drop) if drop else t
    names = ["k", "c", "d"]
    for a in kept:
        if a not in names:
            raise ValueError(f"unknown axis {a!r}; available: {names}")
    prob = _table_of(u)
    drop = tuple(i for i, n in enumerate(names) if n not in kept)
    return prob.sum(axis=drop) if drop else prob


def _pad_pair(u: InfoStructure, v: InfoStructure) -> tuple[InfoStructure, InfoStructure]:
    if u.state_count != v.state_count:
        raise ValueError(f"state counts differ: {u.state_count} vs {v.state_count}")
    C = max(u.c_count, v.c_count)
    D = max(u.d_count, v.d_count)
    return u.padded(C, D), v.padded(C, D)


def tv_norm(u: InfoStructure, v: InfoStructure, pad: bool = True) -> float:
    """``sum |u - v|`` over all cells, padding the smaller signal axes with zero mass."""
    if pad:
        u, v = _pad_pair(u, v)
    elif u.shape != v.shape:
        raise ValueError(f"shapes differ: {u.shape} vs {v.shape}")
    total = abs(u.prob - v.prob).sum()
    return total if (u.exact and v.exact) else float(total)


def _mixed(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if _is_exact(a) != _is_exact(b):
        return to_float(a), to_float(b)
    return a, b


def garble_left(q: Garbling, u: InfoStructure) -> InfoStructure:
    """``q.u(k, c, d) = sum_c' u(k, c', d) q(c | c')``."""
    if q.source_count != u.c_count:
        raise ValueError(f"garbling source {q.source_count} != player-1 signals {u.c_count}")
    p, r = _mixed(u.prob, q.rows)
    return InfoStructure(np.einsum("kxd,xc->kcd", p, r))


def garble_right(u: InfoStructure, q: Garbling) -> InfoStructure:
    """``u.q(k, c, d) = sum_d' u(k, c, d') q(d | d')``."""
    if q.source_count != u.d_count:
        raise ValueError(f"garbling source {q.source_count} != player-2 signals {u.d_count}")
    p, r = _mixed(u.prob, q.rows)
    return InfoStructure(np.einsum("kcx,xd->kcd", p, r))


def _axes_tuple(a) -> tuple:
    if a is None:
        return ()
    if isinstance(a, (int, np.integer, str)):
        return (a,)
    return tuple(a)


def eps_cond_independence(mu, x_axes, y_axes, z_axes=()) -> float:
    """``sum_z mu(z) sum_{x,y} |mu(x,y|z) - mu(x|z) mu(y|z)|``.

    ``mu`` is an array or a (factored) structure; axes are integers or, for
    structures, axis names as in :func:`marginal`. Axes listed nowhere are
    summed out. Conditioning values with zero mass contribute nothing.
    """
    xs, ys, zs = _axes_tuple(x_axes), _axes_tuple(y_axes), _axes_tuple(z_axes)
    if isinstance(mu, (InfoStructure, FactoredStructure)):
        if isinstance(mu, InfoStructure):
            names, table = ["k", "c", "d"], mu.prob
        else:
            names, table = mu.axis_names(), mu.tensor()

        def resolve(axs):
            out = []
            for a in axs:
                if isinstance(a, str):
                    if a in ("c", "d") and a not in names:
                        out += [i for i, n in enumerate(names) if n[0] == a]
                    elif a in names:
                        out.append(names.index(a))
                    else:
                        raise ValueError(f"unknown axis {a!r}")
                else:
                    out.append(int(a))
            return tuple(out)

        xs, ys, zs = resolve(xs), resolve(ys), resolve(zs)
    else:
        table = np.asarray(mu) if not isinstance(mu, np.ndarray) else mu
    used = xs + ys + zs
    if len(set(used)) != len(used):
        raise ValueError("x, y and z axes must be disjoint")
    if not xs or not ys:
        raise ValueError("x and y need at least one axis each")
    drop = tuple(i for i in range(table.ndim) if i not in used)
    m = table.sum(axis=drop) if drop else table
    remaining = [i for i in range(table.ndim) if i not in drop]
    m = m.transpose([remaining.index(a) for a in used])
    nx = math.prod(table.shape[a] for a in xs)
    ny = math.prod(table.shape[a] for a in ys)
    nz = math.prod(table.shape[a] for a in zs) if zs else 1
    m = m.reshape(nx, ny, nz)
    mxz = m.sum(axis=1)
    myz = m.sum(axis=0)
    mz = m.sum(axis=(0, 1))
    exact = _is_exact(m)
    safe = np.array([z if z != 0 else 1 for z in mz], dtype=m.dtype)
    prod = mxz[:, None, :] * myz[None, :, :] / safe[None, None, :]
    total = abs(m - prod).sum()
    return total if exact else float(total)


# ---------------------------------------------------------------------------
# One-step transition


def transition_F(u: InfoStructure, s1: Garbling, s2: Garbling, trans: np.ndarray) -> FactoredStructure:
    """Structure of tomorrow's state and signals after today's actions.

    ``trans[k', i, j]`` is a law over ``(k, c, d)``. The output gives player 1
    the components ``(c0, i, c)`` and player 2 ``(d0, j, d)``.
    """
    trans = trans if isinstance(trans, np.ndarray) else np.asarray(trans)
    if trans.ndim != 6:
        raise ValueError("transition kernel must be indexed (k', i, j, k, c, d)")
    K0, I, J = trans.shape[:3]
    if K0 != u.state_count:
        raise ValueError(f"kernel is defined on {K0} states, structure has {u.state_count}")
    if s1.source_count != u.c_count or s1.target_count != I:
        raise ValueError(f"player-1 strategy {s1} does not map {u.c_count} signals to {I} actions")
    if s2.source_count != u.d_count or s2.target_count != J:
        raise ValueError(f"player-2 strategy {s2} does not map {u.d_count} signals to {J} actions")
    sums = trans.reshape(K0, I, J, -1).sum(axis=3)
    if _is_exact(trans):
        stochastic = all(s == 1 for s in sums.ravel()) and all(v >= 0 for v in trans.ravel())
    else:
        stochastic = bool(np.all(np.abs(sums - 1) <= MASS_TOL) and (trans >= -MASS_TOL).all())
    if not stochastic:
        raise ValueError("transition rows must be probability distributions")
    p, a = _mixed(u.prob, s1.rows)
    p, b = _mixed(p, s2.rows)
    p, tr = _mixed(p, trans)
    # axes: x = yesterday's state, c0/d0 = yesterday's signals
    t = np.einsum("xpq,pi,qj,xijkcd->kpicqjd", p, a, b, tr)
    return FactoredStructure.from_tensor(t, 3)
