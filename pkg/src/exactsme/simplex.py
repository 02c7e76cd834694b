"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Only meant for the small programs of the oracle (a few hundred columns at
most). Pivoting is deterministic, so identical inputs give identical bases.
Dantzig pricing is used while pivots make progress; Bland's rule takes over
on degenerate stalls so the method cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

Status = Literal["optimal", "infeasible", "unbounded"]

PIVOT_EPS = 1e-9
BLAND_AFTER = 50
REFACTOR_EVERY = 40


@dataclass(frozen=True)
class StandardResult:
    """Outcome of ``min c.x  s.t.  A x = b, x >= 0``.

    ``duals`` solve ``A_B^T lam = c_B`` for the final basis, so at optimality
    ``A^T lam <= c`` (up to ``tol_opt``) and ``lam.b`` equals the value.
    ``degenerate_columns`` lists nonbasic columns with zero reduced cost; when
    nonempty the optimum need not be unique.
    """

    status: Status
    x: np.ndarray | None
    value: float
    basis: tuple[int, ...]
    duals: np.ndarray | None
    reduced_costs: np.ndarray | None
    degenerate_columns: tuple[int, ...]
    iterations: int

    @property
    def basis_note(self) -> str:
        if self.status != "optimal":
            return f"{self.status} after {self.iterations} pivots"
        tie = f"; {len(self.degenerate_columns)} nonbasic zero reduced costs (optimum may not be unique)" \
            if self.degenerate_columns else "; unique reduced-cost certificate"
        return f"optimal after {self.iterations} pivots, basis {list(self.basis)}{tie}"


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row])


def _refactor(T: np.ndarray, A_full: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: list[int]) -> None:
    """Rebuild the tableau from the original data to shed accumulated pivot error."""
    rows = T.shape[0] - 1
    AB = A_full[:, basis]
    if np.linalg.cond(AB) > 1e12:
        return  # keep the pivoted tableau rather than trust a near-singular solve
    T[:rows, :-1] = np.linalg.solve(AB, A_full)
    T[:rows, -1] = np.linalg.solve(AB, b)
    T[-1, :-1] = cost - cost[basis] @ T[:rows, :-1]
    T[-1, -1] = -cost[basis] @ T[:rows, -1]


def _run(T: np.ndarray, basis: list[int], allowed: np.ndarray, tol_opt: float, max_iter: int,
         refactor=None) -> tuple[str, int]:
    """Iterate on tableau T whose last row holds reduced costs and last column the rhs.

    Pricing is Dantzig's most-negative reduced cost with a largest-pivot
    tie-break in the ratio test. After ``BLAND_AFTER`` consecutive degenerate
    pivots both choices switch to Bland's lowest-index rule, which cannot
    cycle; a nondegenerate pivot switches back.
    """
    rows = T.shape[0] - 1
    it = 0
    stall = 0
    while it < max_iter:
        rc = T[-1, :-1]
        candidates = np.flatnonzero((rc < -tol_opt) & allowed)
        if candidates.size == 0:
            return "optimal", it
        bland = stall >= BLAND_AFTER
        col = int(candidates[0]) if bland else int(candidates[np.argmin(rc[candidates])])
        column = T[:rows, col]
        pos = column > PIVOT_EPS * max(1.0, float(np.abs(column).max()))
        if not pos.any():
            return "unbounded", it
        ratios = np.full(rows, np.inf)
        ratios[pos] = np.maximum(T[:rows, -1][pos], 0.0) / column[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
        if bland:
            row = int(min(ties, key=lambda r: basis[r]))
        else:
            row = int(ties[np.argmax(column[ties])])
        stall = stall + 1 if best <= 1e-12 else 0
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        if refactor is not None and it % REFACTOR_EVERY == 0:
            refactor()
    raise RuntimeError("simplex iteration limit reached")


def simplex_standard(c, A, b, tol_feas: float = 1e-8, tol_opt: float = 1e-9, max_iter: int = 50_000) -> StandardResult:
    c = np.asarray(c, dtype=float).ravel()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    rows, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A1 = A * sign[:, None]
    b1 = b * sign
    scale = max(1.0, float(np.abs(b1).max()) if rows else 1.0)

    # reuse identity columns as the starting basis, add artificials elsewhere
    basis = [-1] * rows
    for j in range(n):
        col = A1[:, j]
        nz = np.flatnonzero(col)
        if len(nz) == 1 and col[nz[0]] == 1.0 and basis[nz[0]] < 0:
            basis[nz[0]] = j
    missing = [i for i in range(rows) if basis[i] < 0]
    na = len(missing)
    T = np.zeros((rows + 1, n + na + 1))
    T[:rows, :n] = A1
    T[:rows, -1] = b1
    for a, i in enumerate(missing):
        T[i, n + a] = 1.0
        basis[i] = n + a

    it_total = 0
    active_rows = np.ones(rows, dtype=bool)
    if na:
        cost1 = np.zeros(n + na)
        cost1[n:] = 1.0
        T[-1, :-1] = cost1
        T[-1, -1] = 0.0
        for i in range(rows):
            if basis[i] >= n:
                T[-1] -= T[i]
        A_art = np.hstack([A1, np.zeros((rows, na))])
        for a, i in enumerate(missing):
            A_art[i, n + a] = 1.0
        status, it = _run(T, basis, np.ones(n + na, dtype=bool), tol_opt, max_iter,
                          lambda: _refactor(T, A_art, b1, cost1, basis))
        it_total += it
        if -T[-1, -1] > tol_feas * scale:
            return StandardResult("infeasible", None, float("nan"), tuple(basis), None, None, (), it_total)
        # drive zero-level artificials out of the basis
        for i in range(rows):
            if basis[i] >= n:
                row = np.abs(T[i, :n])
                j = int(np.argmax(row))
                if row[j] > 1e-9:
                    _pivot(T, i, j)
                    basis[i] = j
                    it_total += 1
                else:
                    active_rows[i] = False  # redundant equality

    keep = np.flatnonzero(active_rows)
    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = T[keep, :n]
    T2[:-1, -1] = T[keep, -1]
    basis2 = [basis[i] for i in keep]
    T2[-1, :n] = c
    for r, j in enumerate(basis2):
        T2[-1] -= c[j] * T2[r]
    A2, b2 = A1[keep], b1[keep]
    if na:
        _refactor(T2, A2, b2, c, basis2)
    status, it = _run(T2, basis2, np.ones(n, dtype=bool), tol_opt, max_iter,
                      lambda: _refactor(T2, A2, b2, c, basis2))
    it_total += it
    if status == "unbounded":
        return StandardResult("unbounded", None, float("-inf"), tuple(basis2), None, None, (), it_total)

    # recompute the vertex from the original data to shed accumulated pivot error
    AB = A1[np.ix_(keep, basis2)]
    xB = np.linalg.solve(AB, b1[keep])
    x = np.zeros(n)
    x[basis2] = np.maximum(xB, 0.0)
    lam_kept = np.linalg.solve(AB.T, c[basis2])
    lam = np.zeros(rows)
    lam[keep] = lam_kept
    lam *= sign
    rc = c - A.T @ lam
    nonbasic = np.setdiff1d(np.arange(n), basis2)
    degenerate = tuple(int(j) for j in nonbasic if abs(rc[j]) <= tol_opt * max(1.0, abs(c[j])))
    return StandardResult("optimal", x, float(c @ x), tuple(basis2), lam, rc, degenerate, it_total)


@dataclass(frozen=True)
class LPResult:
    status: Status
    x: np.ndarray | None
    value: float
    note: str
    standard: StandardResult


def linprog(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None,
            bounds: Sequence[tuple[float | None, float | None]] | None = None,
            maximize: bool = False, tol_feas: float = 1e-8, tol_opt: float = 1e-9) -> LPResult:
    """General LP front end over :func:`simplex_standard`.

    Bounded variables are shifted to ``[0, hi - lo]`` with an explicit slack
    row, upper-bounded ones are reflected, and free ones are split.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = len(c)
    bounds = list(bounds) if bounds is not None else [(0.0, None)] * n
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    sense = -1.0 if maximize else 1.0

    # x = shift + M @ x_std[:n_std_vars]
    cols: list[tuple[int, float]] = []  # (original index, coefficient)
    shift = np.zeros(n)
    box_rows: list[tuple[int, float]] = []  # (std column, width)
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None and np.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if hi is not None and np.isfinite(hi):
                box_rows.append((len(cols) - 1, hi - lo))
        elif hi is not None and np.isfinite(hi):
            shift[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    nv = len(cols)
    M = np.zeros((n, nv))
    for s, (j, coef) in enumerate(cols):
        M[j, s] = coef
    n_ub, n_box = len(b_ub), len(box_rows)
    total = nv + n_ub + n_box
    rows = len(b_eq) + n_ub + n_box
    A = np.zeros((rows, total))
    b = np.zeros(rows)
    r = 0
    A[r:r + len(b_eq), :nv] = A_eq @ M
    b[r:r + len(b_eq)] = b_eq - A_eq @ shift
    r += len(b_eq)
    A[r:r + n_ub, :nv] = A_ub @ M
    A[r:r + n_ub, nv:nv + n_ub] = np.eye(n_ub)
    b[r:r + n_ub] = b_ub - A_ub @ shift
    r += n_ub
    for q, (s, width) in enumerate(box_rows):
        A[r + q, s] = 1.0
        A[r + q, nv + n_ub + q] = 1.0
        b[r + q] = width
    cost = np.zeros(total)
    cost[:nv] = sense * (c @ M)
    res = simplex_standard(cost, A, b, tol_feas, tol_opt)
    if res.status != "optimal":
        return LPResult(res.status, None, float("nan"), res.basis_note, res)
    x = shift + M @ res.x[:nv]
    return LPResult("optimal", x, float(c @ x), res.basis_note, res)


def format_tableau(c, A, b, precision: int = 6) -> str:
    """Plain-text dump of a standard-form instance for debugging."""
    c = np.asarray(c, dtype=float).ravel()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    width = precision + 8
    fmt = f"{{:>{width}.{precision}g}}"
    lines = [f"# standard form: min c.x s.t. A x = b, x >= 0 ({A.shape[0]} rows, {A.shape[1]} cols)"]
    lines.append("c   " + "".join(fmt.format(v) for v in c))
    for i in range(A.shape[0]):
        lines.append(f"r{i:<3d}" + "".join(fmt.format(v) for v in A[i]) + " | " + fmt.format(b[i]))
    return "\n".join(lines) + "\n"
