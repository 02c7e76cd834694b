"""Independent ground truth: the estimator and regulator programs as explicit
linear programs, alignment checks, and the exact set recursion for m <= 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import geometry as geo
from .errors import EmptySet, Infeasible, NotFeasible, Unbounded
from .plant import System, lower_toeplitz, regulator_state_from_window, toeplitz_blocks
from .simplex import linprog, simplex_standard
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class ProblemHistory:
    system: System
    x0: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(self.system.m))
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float).ravel())
        if len(self.z) < 1:
            raise ValueError("a problem history needs at least one measurement")

    @property
    def k(self) -> int:
        return len(self.z)

    def truncated(self, k: int) -> "ProblemHistory":
        return ProblemHistory(self.system, self.x0, self.z[:k])


@dataclass(frozen=True)
class LPSolution:
    value: float
    primal: np.ndarray
    status: Literal["optimal", "infeasible", "unbounded"]
    basis_note: str
    duals: np.ndarray | None = None

    def split(self) -> tuple[np.ndarray, np.ndarray]:
        """(first half, second half) of the primal: (y, v) or (y*, v*)."""
        k = len(self.primal) // 2
        return self.primal[:k], self.primal[k:]


def _terminal_map(h: ProblemHistory) -> tuple[np.ndarray, np.ndarray]:
    """Affine map (y, v) -> x_k as (matrix G, offset g) with x_k = G @ [y; v] + g."""
    sysm, k, m = h.system, h.k, h.system.m
    G = np.zeros((m, 2 * k))
    if k >= m:
        D_L, D_U, N_L, N_U = toeplitz_blocks(sysm.plant)
        G[:, k - m:k] = -sysm.bez.B_inv @ D_U
        G[:, 2 * k - m:] = sysm.bez.B_inv @ N_U
        return G, np.zeros(m)
    A, B = sysm.est.A, sysm.est.B_col
    Aj_B = B.copy()
    for j in range(k):
        G[:, k + (k - 1 - j)] = Aj_B
        Aj_B = A @ Aj_B
    return G, np.linalg.matrix_power(A, k) @ h.x0


def terminal_state(h: ProblemHistory, y, v) -> np.ndarray:
    G, g = _terminal_map(h)
    return G @ np.concatenate([y, v]) + g


def _convolution_constraints(h: ProblemHistory) -> tuple[np.ndarray, np.ndarray]:
    p, k, m = h.system.plant, h.k, h.system.m
    D_k = lower_toeplitz(p.d, k)
    N_k = lower_toeplitz(p.n, k)
    rhs = np.zeros(k)
    bx = h.system.bez.B @ h.x0
    rhs[:min(k, m)] = bx[:min(k, m)]
    return np.hstack([D_k, -N_k]), rhs


def solve_estimator(h: ProblemHistory, x_star, tol: Tolerances = DEFAULT) -> tuple[LPSolution, np.ndarray]:
    """Maximise <x*, x_k(y, v)> over the feasible disturbance histories."""
    k = h.k
    x_star = np.asarray(x_star, dtype=float).reshape(h.system.m)
    A_eq, b_eq = _convolution_constraints(h)
    G, g = _terminal_map(h)
    bounds = [(zj - 1.0, zj + 1.0) for zj in h.z] + [(-1.0, 1.0)] * k
    res = linprog(x_star @ G, A_eq, b_eq, bounds=bounds, maximize=True, tol_feas=tol.feas, tol_opt=tol.opt)
    if res.status != "optimal":
        raise Infeasible(f"estimator program infeasible at k={k}: {res.note}")
    x_term = G @ res.x + g
    value = float(x_star @ x_term)
    return LPSolution(value, res.x, "optimal", res.note), x_term


def regulator_standard_form(h: ProblemHistory, x_star) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split-variable LP (cost, matrix, rhs) over (y*+, y*-, v*+, v*-) >= 0."""
    sysm, k, m = h.system, h.k, h.system.m
    if k < m:
        raise ValueError("the regulator program needs k >= m")
    p = sysm.plant
    D_L, D_U, N_L, N_U = toeplitz_blocks(p)
    Nt = lower_toeplitz(p.n, k).T
    Dt = lower_toeplitz(p.d, k).T
    A = np.hstack([Nt, -Nt, Dt, -Dt])
    b = np.zeros(k)
    b[k - m:] = np.asarray(x_star, dtype=float).reshape(m)
    dy = np.zeros(k)
    dv = np.zeros(k)
    dy[:m] = -(N_U @ h.x0)
    dv[:m] = -(D_U @ h.x0)
    cost = np.ones(4 * k) + np.concatenate([dy, -dy, dv, -dv]) + np.concatenate([h.z, -h.z, np.zeros(2 * k)])
    return cost, A, b


def solve_regulator(h: ProblemHistory, x_star, tol: Tolerances = DEFAULT) -> LPSolution:
    k = h.k
    cost, A, b = regulator_standard_form(h, x_star)
    res = simplex_standard(cost, A, b, tol.feas, tol.opt)
    if res.status == "unbounded":
        raise Unbounded(f"regulator program unbounded at k={k}: the uncertainty set is empty")
    if res.status != "optimal":
        raise Infeasible(f"regulator program {res.status} at k={k}")
    w = res.x
    ys = w[:k] - w[k:2 * k]
    vs = w[2 * k:3 * k] - w[3 * k:]
    return LPSolution(res.value, np.concatenate([ys, vs]), "optimal", res.basis_note, res.duals)


def regulator_cost(h: ProblemHistory, ys, vs) -> float:
    """||y*||_1 + ||v*||_1 + <y*, z> + <x0*, x0>."""
    m = h.system.m
    D_L, D_U, N_L, N_U = toeplitz_blocks(h.system.plant)
    x0s = -(N_U.T @ ys[:m] + D_U.T @ vs[:m])
    return float(np.abs(ys).sum() + np.abs(vs).sum() + ys @ h.z + x0s @ h.x0)


def estimator_feasible(h: ProblemHistory, y, v, tol: float) -> bool:
    A_eq, b_eq = _convolution_constraints(h)
    resid = np.abs(A_eq @ np.concatenate([y, v]) - b_eq).max()
    return bool(np.abs(v).max() <= 1 + tol and np.abs(y - h.z).max() <= 1 + tol and resid <= tol * max(1.0, np.abs(b_eq).max()))


def regulator_feasible(h: ProblemHistory, ys, vs, x_star, tol: float) -> bool:
    k, m = h.k, h.system.m
    p = h.system.plant
    lhs = lower_toeplitz(p.n, k).T @ ys + lower_toeplitz(p.d, k).T @ vs
    rhs = np.zeros(k)
    rhs[k - m:] = x_star
    return bool(np.abs(lhs - rhs).max() <= tol * max(1.0, np.abs(rhs).max()))


def aligned(y: float, v: float, y_star: float, v_star: float, z_k: float, tol: float = DEFAULT.align) -> bool:
    """Scalar complementary slackness between (y, v) and (y*, v*) at one time step."""
    if v_star > tol and abs(v - 1.0) > tol:
        return False
    if v_star < -tol and abs(v + 1.0) > tol:
        return False
    if abs(v) < 1.0 - tol and abs(v_star) > tol:
        return False
    if y_star > tol and abs(y - (z_k + 1.0)) > tol:
        return False
    if y_star < -tol and abs(y - (z_k - 1.0)) > tol:
        return False
    if abs(y - z_k) < 1.0 - tol and abs(y_star) > tol:
        return False
    return True


def check_alignment_optimality(yv, ysvs, h: ProblemHistory, x_star, tol: Tolerances = DEFAULT) -> bool:
    """True iff the feasible primal and dual histories are aligned at every step."""
    y, v = (np.asarray(a, dtype=float) for a in yv)
    ys, vs = (np.asarray(a, dtype=float) for a in ysvs)
    x_star = np.asarray(x_star, dtype=float).reshape(h.system.m)
    if not estimator_feasible(h, y, v, tol.feas):
        raise NotFeasible("estimator pair is not feasible")
    if not regulator_feasible(h, ys, vs, x_star, tol.feas):
        raise NotFeasible("regulator pair is not feasible")
    scale_star = max(1.0, float(np.abs(ys).max(initial=0.0)), float(np.abs(vs).max(initial=0.0)))
    t = max(tol.align, tol.feas) * scale_star
    return all(aligned(y[j], v[j], ys[j], vs[j], h.z[j], t) for j in range(h.k))


def regulator_multipliers_state(h: ProblemHistory, sol: LPSolution) -> np.ndarray:
    """Last m simplex multipliers of the regulator LP: the estimator terminal state."""
    return sol.duals[h.k - h.system.m:]


# ---------------------------------------------------------------------------
# exact set recursion
# ---------------------------------------------------------------------------

def _lifted_vertices(S: geo.Polytope, sysm: System, z_k: float, tol: float = DEFAULT.geom) -> list:
    """Vertices of {(x, v): x in S, |v| <= 1, |C x + n_1 v - z_k| <= 1}.

    The two slab planes are parallel, so every vertex lies on a prism edge:
    a vertical edge over a vertex of S, or a horizontal edge over an edge of S
    at v = +-1. Constraints are relaxed by ``tol`` (relative) so that sets
    pinned exactly by saturated disturbances survive rounding.
    """
    C, n1 = sysm.est.C_row, sysm.est.D1
    slack = tol * max(1.0, abs(z_k), S.scale * float(np.abs(C).max()))
    pts = []
    for x in S.vertices:
        # |v| <= 1 and z-1 <= Cx + n1 v <= z+1
        lo, hi = -1.0, 1.0
        cx = float(C @ x)
        if n1 != 0.0:
            a, b = (z_k - 1.0 - cx) / n1, (z_k + 1.0 - cx) / n1
            lo, hi = max(lo, min(a, b)), min(hi, max(a, b))
        elif abs(cx - z_k) > 1.0 + slack:
            continue
        if lo <= hi + slack / max(abs(n1), 1e-300):
            if lo > hi:
                lo = hi = 0.5 * (lo + hi)
            pts.append((x, lo))
            pts.append((x, hi))
    for a, b in geo.edges(S):
        ca, cb = float(C @ a), float(C @ b)
        for sigma in (-1.0, 1.0):
            # |ca + lam (cb - ca) + n1 sigma - z| <= 1 for lam in [0, 1]
            base = ca + n1 * sigma - z_k
            slope = cb - ca
            if slope == 0.0:
                continue  # covered by the vertical edges
            l1, l2 = (-1.0 - base) / slope, (1.0 - base) / slope
            lo, hi = max(0.0, min(l1, l2)), min(1.0, max(l1, l2))
            if lo <= hi:
                pts.append((a + lo * (b - a), sigma))
                pts.append((a + hi * (b - a), sigma))
    return pts


def exact_step(S: geo.Polytope, sysm: System, z_k: float, tol: float = DEFAULT.geom) -> geo.Polytope | None:
    """One exact Witsenhausen step; None when the result is empty."""
    pts = _lifted_vertices(S, sysm, z_k, tol)
    if not pts:
        return None
    A, B = sysm.est.A, sysm.est.B_col
    images = np.array([A @ x + B * v for x, v in pts])
    return geo.convex_hull(images, tol)


def exact_set_recursion(h: ProblemHistory, tol: float = DEFAULT.geom) -> list[geo.Polytope]:
    """S_1 ... S_k by exact lifted-prism geometry (m <= 2)."""
    if h.system.m > 2:
        raise NotImplementedError("exact set recursion is implemented for m <= 2")
    S = geo.convex_hull(h.x0[None, :], tol)
    out = []
    for j, zj in enumerate(h.z, start=1):
        nxt = exact_step(S, h.system, float(zj), tol)
        if nxt is None:
            raise EmptySet(j)
        out.append(nxt)
        S = nxt
    return out


def dp_truncation_check(h: ProblemHistory, x_star, tol: Tolerances = DEFAULT, value_tol: float = 1e-7) -> bool:
    """Principle-of-optimality check on a regulator optimum truncated by one step."""
    m, k = h.system.m, h.k
    if k < 2:
        raise ValueError("truncation needs k >= 2")
    x_star = np.asarray(x_star, dtype=float).reshape(m)
    if not np.any(x_star):
        return True
    if k - 1 < m:
        raise ValueError("truncation needs k - 1 >= m")
    reg = solve_regulator(h, x_star, tol)
    ys, vs = reg.split()
    est, _ = solve_estimator(h, x_star, tol)
    y, v = est.split()
    hp = h.truncated(k - 1)
    ys1, vs1 = ys[:k - 1], vs[:k - 1]
    xs_prev = regulator_state_from_window(h.system.plant, ys1[k - 1 - m:], vs1[k - 1 - m:], "backward")
    truncated_cost = regulator_cost(hp, ys1, vs1)
    scale = 1.0 + abs(truncated_cost)
    if not np.any(np.abs(xs_prev) > 1e-12):
        # zero target: the truncated dual must cost nothing
        return abs(truncated_cost) <= value_tol * scale
    reg_prev = solve_regulator(hp, xs_prev, tol)
    if abs(reg_prev.value - truncated_cost) > value_tol * scale:
        return False
    est_prev, _ = solve_estimator(hp, xs_prev, tol)
    x_prev = terminal_state(hp, y[:k - 1], v[:k - 1])
    if abs(float(xs_prev @ x_prev) - est_prev.value) > value_tol * (1.0 + abs(est_prev.value)):
        return False
    return abs(est_prev.value - reg_prev.value) <= value_tol * (1.0 + abs(est_prev.value))
