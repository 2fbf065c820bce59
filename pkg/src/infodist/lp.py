"""Small linear-programming layer used by every value and distance computation.

Two routes solve the same :class:`LinearProgram`:

* the float route hands the problem to HiGHS (through ``scipy.optimize.linprog``)
  and then re-checks primal feasibility and the duality gap itself;
* the exact route is a dense two-phase tableau simplex over ``fractions.Fraction``
  with Bland's rule, meant for small oracle instances.

Dual values are reported as sensitivities ``d(objective)/d(rhs)`` in the sense
of the problem as stated (so a binding ``<=`` row of a maximisation has a
nonnegative dual).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical_failure"

_RELATIONS = ("<=", "=", ">=")


class LPError(RuntimeError):
    """Raised when a caller needs an optimum and the solver did not find one."""

    def __init__(self, solution: "LPSolution", context: str = ""):
        self.solution = solution
        msg = f"LP not solved to optimality: {solution.status}"
        if context:
            msg = f"{context}: {msg}"
        if solution.message:
            msg += f" ({solution.message})"
        super().__init__(msg)


@dataclass
class LinearProgram:
    """``sense c.x`` subject to ``A[i].x rel[i] b[i]`` and per-variable bounds.

    Rows are appended with :meth:`add_row`; coefficients are kept sparse as
    ``{column: value}`` dicts so that the exact route never sees floats it did
    not ask for. Bounds use ``None`` for an infinite side.
    """

    n_vars: int
    sense: str = "min"
    objective: dict[int, object] = field(default_factory=dict)
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    rows: list[dict[int, object]] = field(default_factory=list)
    relations: list[str] = field(default_factory=list)
    rhs: list = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if not self.lower:
            self.lower = [0] * self.n_vars
        if not self.upper:
            self.upper = [None] * self.n_vars
        if len(self.lower) != self.n_vars or len(self.upper) != self.n_vars:
            raise ValueError("bounds must have one entry per variable")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def set_bounds(self, j: int, lo=0, hi=None) -> None:
        self.lower[j] = lo
        self.upper[j] = hi

    def add_row(self, coeffs: dict[int, object], relation: str, rhs) -> int:
        if relation not in _RELATIONS:
            raise ValueError(f"relation must be one of {_RELATIONS}, got {relation!r}")
        for j, a in coeffs.items():
            if not 0 <= j < self.n_vars:
                raise ValueError(f"column {j} out of range")
            if isinstance(a, float) and not math.isfinite(a):
                raise ValueError("coefficients must be finite")
        self.rows.append(dict(coeffs))
        self.relations.append(relation)
        self.rhs.append(rhs)
        return len(self.rows) - 1

    def add_rows(self, matrix, relation: str, rhs, col_offset: int = 0) -> None:
        """Append every row of a dense 2-d array (columns start at ``col_offset``)."""
        matrix = np.asarray(matrix)
        rhs = np.broadcast_to(np.asarray(rhs, dtype=matrix.dtype), (matrix.shape[0],))
        if col_offset + matrix.shape[1] > self.n_vars:
            raise ValueError("block exceeds the variable count")
        if relation not in _RELATIONS:
            raise ValueError(f"relation must be one of {_RELATIONS}, got {relation!r}")
        if matrix.dtype != object and not np.all(np.isfinite(matrix)):
            raise ValueError("coefficients must be finite")
        for row, b in zip(matrix, rhs):
            nz = np.flatnonzero(row != 0)
            self.rows.append(dict(zip((nz + col_offset).tolist(), row[nz].tolist())))
            self.relations.append(relation)
            self.rhs.append(b.item() if hasattr(b, "item") and matrix.dtype != object else b)

    def dense(self) -> tuple[np.ndarray, sparse.csr_matrix, np.ndarray]:
        """Float ``(c, A, b)`` with the objective in the stated sense (``A`` sparse)."""
        c = np.zeros(self.n_vars)
        for j, a in self.objective.items():
            c[j] = float(a)
        lengths = [len(row) for row in self.rows]
        ri = np.repeat(np.arange(self.n_rows), lengths)
        ci = np.fromiter((j for row in self.rows for j in row), dtype=np.int64, count=int(sum(lengths)))
        vals = np.fromiter((float(a) for row in self.rows for a in row.values()), dtype=float, count=ci.size)
        A = sparse.csr_matrix((vals, (ri, ci)), shape=(self.n_rows, self.n_vars))
        b = np.array([float(v) for v in self.rhs], dtype=float)
        return c, A, b


@dataclass
class LPSolution:
    status: str
    objective: object = None
    x: object = None
    duals: object = None
    primal_residual: float = math.nan
    duality_gap: float = math.nan
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    def require(self, context: str = "") -> "LPSolution":
        if not self.ok:
            raise LPError(self, context)
        return self


def solve_lp(lp: LinearProgram, exact: bool = False, tol: float = 1e-7) -> LPSolution:
    """Solve ``lp``; ``exact=True`` selects the rational simplex."""
    if exact:
        return _solve_exact(lp)
    return _solve_float(lp, tol)


# ---------------------------------------------------------------------------
# float route


def _solve_float(lp: LinearProgram, tol: float) -> LPSolution:
    c, A, b = lp.dense()
    sign = -1.0 if lp.sense == "max" else 1.0
    rel = np.array(lp.relations)
    ub_rows = np.flatnonzero(rel != "=")
    eq_rows = np.flatnonzero(rel == "=")
    flip = np.where(rel[ub_rows] == ">=", -1.0, 1.0)
    A_ub = sparse.diags(flip) @ A[ub_rows] if len(ub_rows) else None
    b_ub = b[ub_rows] * flip if len(ub_rows) else None
    A_eq = A[eq_rows] if len(eq_rows) else None
    b_eq = b[eq_rows] if len(eq_rows) else None
    bounds = [
        (None if lo is None else float(lo), None if hi is None else float(hi))
        for lo, hi in zip(lp.lower, lp.upper)
    ]
    res = linprog(
        sign * c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status == 2:
        return LPSolution(INFEASIBLE, message=res.message)
    if res.status == 3:
        return LPSolution(UNBOUNDED, message=res.message)
    if res.status != 0:
        return LPSolution(NUMERICAL_FAILURE, message=res.message)

    x = np.asarray(res.x, dtype=float)
    obj = float(c @ x)

    duals = np.zeros(lp.n_rows)
    if len(ub_rows):
        duals[ub_rows] = sign * flip * res.ineqlin.marginals
    if len(eq_rows):
        duals[eq_rows] = sign * res.eqlin.marginals

    # primal residual, measured on the problem as stated
    ax = A @ x if lp.n_rows else np.zeros(0)
    viol = np.zeros(lp.n_rows)
    le = rel == "<="
    ge = rel == ">="
    eq = rel == "="
    viol[le] = np.maximum(ax[le] - b[le], 0.0)
    viol[ge] = np.maximum(b[ge] - ax[ge], 0.0)
    viol[eq] = np.abs(ax[eq] - b[eq])
    lo = np.array([-np.inf if v is None else float(v) for v in lp.lower])
    hi = np.array([np.inf if v is None else float(v) for v in lp.upper])
    bound_viol = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    residual = float(max(viol.max(initial=0.0), bound_viol.max(initial=0.0)))

    # dual objective from row and bound multipliers (HiGHS sensitivities)
    dual_obj = float(b @ duals) if lp.n_rows else 0.0
    lo_m = sign * np.asarray(res.lower.marginals)
    hi_m = sign * np.asarray(res.upper.marginals)
    dual_obj += float(np.sum(np.where(np.isfinite(lo), lo, 0.0) * lo_m))
    dual_obj += float(np.sum(np.where(np.isfinite(hi), hi, 0.0) * hi_m))
    gap = abs(obj - dual_obj)

    sol = LPSolution(OPTIMAL, obj, x, duals, residual, gap, res.message)
    if residual > tol or gap > tol * (1.0 + abs(obj)):
        sol.status = NUMERICAL_FAILURE
        sol.message = f"residual={residual:.3g} gap={gap:.3g}"
    return sol


# ---------------------------------------------------------------------------
# exact route


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(float(v))


def _solve_exact(lp: LinearProgram) -> LPSolution:
    n = lp.n_vars
    # x_j = offset_j + sum(coef * y_col) with y >= 0
    offset: list[Fraction] = []
    columns: list[list[tuple[int, int]]] = []
    extra_rows: list[tuple[int, Fraction]] = []  # y_col <= bound
    n_y = 0
    for j in range(n):
        lo = None if lp.lower[j] is None else _frac(lp.lower[j])
        hi = None if lp.upper[j] is None else _frac(lp.upper[j])
        if lo is not None:
            offset.append(lo)
            columns.append([(n_y, 1)])
            if hi is not None:
                if hi < lo:
                    return LPSolution(INFEASIBLE, message=f"empty bounds on x{j}")
                extra_rows.append((n_y, hi - lo))
            n_y += 1
        elif hi is not None:
            offset.append(hi)
            columns.append([(n_y, -1)])
            n_y += 1
        else:
            offset.append(Fraction(0))
            columns.append([(n_y, 1), (n_y + 1, -1)])
            n_y += 2

    # rows over y, all normalised to rhs >= 0
    rows: list[list[Fraction]] = []
    rels: list[str] = []
    rhs: list[Fraction] = []
    flipped: list[bool] = []
    for row, rel, b in zip(lp.rows, lp.relations, lp.rhs):
        coeffs = [Fraction(0)] * n_y
        shift = Fraction(0)
        for j, a in row.items():
            a = _frac(a)
            shift += a * offset[j]
            for col, s in columns[j]:
                coeffs[col] += s * a
        rows.append(coeffs)
        rels.append(rel)
        rhs.append(_frac(b) - shift)
        flipped.append(False)
    n_orig = len(rows)
    for col, bound in extra_rows:
        coeffs = [Fraction(0)] * n_y
        coeffs[col] = Fraction(1)
        rows.append(coeffs)
        rels.append("<=")
        rhs.append(bound)
        flipped.append(False)
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-a for a in rows[i]]
            rhs[i] = -rhs[i]
            rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[rels[i]]
            flipped[i] = True

    sign = Fraction(-1) if lp.sense == "max" else Fraction(1)
    cost = [Fraction(0)] * n_y
    const = Fraction(0)
    for j, a in lp.objective.items():
        a = _frac(a)
        const += a * offset[j]
        for col, s in columns[j]:
            cost[col] += s * a
    cost = [sign * a for a in cost]  # minimise sign * c.x

    m = len(rows)
    # column layout: y | slack/surplus | artificial
    n_slack = sum(1 for r in rels if r != "=")
    n_art = sum(1 for r in rels if r != "<=")
    width = n_y + n_slack + n_art
    T = [[Fraction(0)] * (width + 1) for _ in range(m)]
    basis = [0] * m
    init_col = [0] * m  # column holding B^-1 e_i in the final tableau
    init_sign = [1] * m
    s_next = n_y
    a_next = n_y + n_slack
    artificial = set()
    for i in range(m):
        T[i][:n_y] = rows[i]
        T[i][width] = rhs[i]
        if rels[i] == "<=":
            T[i][s_next] = Fraction(1)
            basis[i] = init_col[i] = s_next
            s_next += 1
        else:
            if rels[i] == ">=":
                T[i][s_next] = Fraction(-1)
                s_next += 1
            T[i][a_next] = Fraction(1)
            basis[i] = init_col[i] = a_next
            artificial.add(a_next)
            a_next += 1

    def pivot(r: int, col: int) -> None:
        pr = T[r]
        pv = pr[col]
        if pv != 1:
            T[r] = pr = [v / pv for v in pr]
        for i in range(m):
            if i != r:
                f = T[i][col]
                if f != 0:
                    Ti = T[i]
                    T[i] = [a - f * b for a, b in zip(Ti, pr)]
        basis[r] = col

    def run(obj: list[Fraction], allowed: list[bool]) -> str:
        while True:
            cb = [obj[basis[i]] for i in range(m)]
            in_basis = set(basis)
            entering = -1
            for col in range(width):
                if not allowed[col] or col in in_basis:
                    continue
                red = obj[col] - sum(cb[i] * T[i][col] for i in range(m) if T[i][col] != 0)
                if red < 0:
                    entering = col
                    break
            if entering < 0:
                return OPTIMAL
            best = None
            for i in range(m):
                a = T[i][entering]
                if a > 0:
                    ratio = T[i][width] / a
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            pivot(best[1], entering)

    # phase 1
    if artificial:
        obj1 = [Fraction(0)] * width
        for col in artificial:
            obj1[col] = Fraction(1)
        run(obj1, [True] * width)
        infeas = sum(T[i][width] for i in range(m) if basis[i] in artificial)
        if infeas > 0:
            return LPSolution(INFEASIBLE, message="phase 1 optimum is positive")
        for i in range(m):
            if basis[i] in artificial:
                for col in range(n_y + n_slack):
                    if T[i][col] != 0 and col not in basis:
                        pivot(i, col)
                        break

    obj2 = cost + [Fraction(0)] * (width - n_y)
    allowed = [col not in artificial for col in range(width)]
    status = run(obj2, allowed)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, message="ray found in phase 2")

    y = [Fraction(0)] * n_y
    for i in range(m):
        if basis[i] < n_y:
            y[basis[i]] = T[i][width]
    x = []
    for j in range(n):
        xj = offset[j]
        for col, s in columns[j]:
            xj += s * y[col]
        x.append(xj)
    z = sum(cost[col] * y[col] for col in range(n_y))
    objective = sign * z + const

    cb = [obj2[basis[i]] for i in range(m)]
    duals = []
    for i in range(n_orig):
        col = init_col[i]
        yi = sum(cb[r] * T[r][col] for r in range(m))
        if flipped[i]:
            yi = -yi
        duals.append(sign * yi)
    return LPSolution(
        OPTIMAL,
        objective,
        x,
        duals,
        primal_residual=0.0,
        duality_gap=0.0,
        message="exact simplex (Bland)",
    )


def matrix_game_lp(M: Sequence[Sequence[object]]) -> LinearProgram:
    """Row player's LP for the matrix game ``M``: variables ``x_0..x_{m-1}, v``."""
    m = len(M)
    n = len(M[0])
    lp = LinearProgram(m + 1, sense="max")
    lp.objective = {m: 1}
    lp.set_bounds(m, None, None)
    for j in range(n):
        row = {i: M[i][j] for i in range(m)}
        row[m] = -1
        lp.add_row(row, ">=", 0)
    lp.add_row({i: 1 for i in range(m)}, "=", 1)
    return lp


def solve_matrix_game(M, exact: bool = False) -> tuple[object, list, list]:
    """Value and optimal mixed strategies of the zero-sum matrix game ``M``.

    The column player's strategy is read from the duals of the row player's
    LP; the exact route therefore needs no second solve.
    """
    M = [list(r) for r in M]
    m, n = len(M), len(M[0])
    sol = solve_lp(matrix_game_lp(M), exact=exact).require("matrix game")
    x = list(sol.x[:m])
    y = [abs(v) for v in sol.duals[:n]]
    s = sum(y)
    y = [v / s for v in y] if s else [Fraction(1, n) if exact else 1.0 / n] * n
    return sol.objective, x, y
