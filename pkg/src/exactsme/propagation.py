"""Boundary-point propagation of the uncertainty set with supporting directions.

One step maps a boundary point x_{k-1} of S_{k-1} and a direction from its
normal cone to successor points on the boundary of S_k, each paired with a
direction from the normal cone of S_k there. The scalar machinery is the set
of quadruples (v, y, v*, y*) that satisfy the measurement window, the
terminal dual equation and complementary slackness at time k.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from . import geometry as geo
from .errors import ConePrecondition, DegenerateFront, EmptyFront
from .oracle import aligned, exact_step
from .plant import PlantSpec, System
from .tolerances import DEFAULT, Tolerances

log = logging.getLogger(__name__)

RTag = Literal["R1", "R2", "R3"]
ZERO_DUAL = 1e-12


# ---------------------------------------------------------------------------
# the quadruple set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Quadruple:
    v: float
    y: float
    v_star: float
    y_star: float

    @property
    def pattern(self) -> tuple[int, int]:
        return int(np.sign(self.v_star)), int(np.sign(self.y_star))


@dataclass(frozen=True)
class SignFamily:
    """All quadruples sharing one sign pattern of (v*, y*).

    ``v_lo``/``v_hi`` bound the primal v values and ``ystar_lo``/``ystar_hi``
    the admissible y* values (open ends at +-inf, or open at zero when the
    pattern requires a strict sign). v* follows from y* through the terminal
    dual equation.
    """

    sign_v: int
    sign_y: int
    v_lo: float
    v_hi: float
    ystar_lo: float
    ystar_hi: float
    t: float
    d_last: float
    n_last: float

    def v_star(self, y_star: float) -> float:
        return (-self.t - self.n_last * y_star) / self.d_last

    def canonical_ystar(self) -> float:
        if self.sign_y == 0:
            return 0.0
        lo, hi = self.ystar_lo, self.ystar_hi
        if lo == hi:
            return lo
        if np.isfinite(lo) and np.isfinite(hi):
            return 0.5 * (lo + hi)
        if np.isfinite(lo):
            return 2.0 * lo if lo > 0 else lo + 1.0
        return 2.0 * hi if hi < 0 else hi - 1.0

    def alternative_ystar(self, avoid: float) -> float | None:
        """Another admissible y* different from ``avoid``, if the family has one."""
        lo, hi = self.ystar_lo, self.ystar_hi
        if lo == hi:
            return None
        for cand in (self.canonical_ystar(), 0.5 * (self.canonical_ystar() + (hi if np.isfinite(hi) else lo)),
                     (lo + 1.0) if np.isfinite(lo) and not np.isfinite(hi) else None,
                     (hi - 1.0) if np.isfinite(hi) and not np.isfinite(lo) else None,
                     0.25 * lo + 0.75 * hi if np.isfinite(lo) and np.isfinite(hi) else None):
            if cand is not None and lo <= cand <= hi and abs(cand - avoid) > ZERO_DUAL * max(1.0, abs(avoid)):
                if self.sign_y == 0 or np.sign(cand) == self.sign_y:
                    return float(cand)
        return None

    @property
    def is_range(self) -> bool:
        return self.v_hi > self.v_lo


@dataclass(frozen=True)
class MResult:
    kind: Literal["empty", "finite", "segment"]
    quadruples: tuple[Quadruple, ...]
    v_range: tuple[float, float] | None
    families: tuple[SignFamily, ...] = ()


def line_square_interval(s: float, z_k: float, n1: float, tol: float) -> tuple[float, float] | None:
    """v-extent of the line y - n1 v = s inside the square |v| <= 1, |y - z_k| <= 1."""
    lo, hi = -1.0, 1.0
    if n1 != 0.0:
        a, b = (z_k - 1.0 - s) / n1, (z_k + 1.0 - s) / n1
        lo, hi = max(lo, min(a, b)), min(hi, max(a, b))
    elif abs(s - z_k) > 1.0 + tol:
        return None
    if lo > hi + tol:
        return None
    if lo > hi:
        lo = hi = 0.5 * (lo + hi)
    return lo, hi


def _ystar_interval(sign_v: int, sign_y: int, t: float, d: float, n: float) -> tuple[float, float] | None:
    """Closed hull of the y* values whose signs match the pattern, or None."""
    lo, hi = {0: (0.0, 0.0), 1: (0.0, np.inf), -1: (-np.inf, 0.0)}[sign_y]
    strict_lo = sign_y == 1
    strict_hi = sign_y == -1
    # sign of v* = (-t - n y*) / d must equal sign_v
    if sign_v == 0:
        if n == 0.0:
            return (lo, hi) if t == 0.0 else None
        root = -t / n
        if not (lo <= root <= hi) or (strict_lo and root <= 0) or (strict_hi and root >= 0):
            return None
        return root, root
    # sign_v (-t - n y*) / d > 0  <=>  a y* + b > 0
    a = -sign_v * n / d
    b = -sign_v * t / d
    if a == 0.0:
        return (lo, hi) if b > 0 else None
    root = -b / a
    if a > 0:
        lo, strict_lo = (root, True) if root >= lo else (lo, strict_lo)
    else:
        hi, strict_hi = (root, True) if root <= hi else (hi, strict_hi)
    if lo > hi or (lo == hi and (strict_lo or strict_hi)):
        return None
    return lo, hi


def compute_M(s: float, t: float, z_k: float, p: PlantSpec, tol: float = DEFAULT.align) -> MResult:
    """Canonical quadruples of M(s, t, z_k), one family per feasible sign pattern."""
    n1 = p.n1
    span = line_square_interval(s, z_k, n1, tol)
    if span is None:
        return MResult("empty", (), None)
    lo, hi = span
    families: list[SignFamily] = []
    for sign_v in (0, 1, -1):
        for sign_y in (0, 1, -1):
            ys = _ystar_interval(sign_v, sign_y, t, p.d_last, p.n_last)
            if ys is None:
                continue
            vlo, vhi = lo, hi
            if sign_v != 0:
                if not (vlo - tol <= sign_v <= vhi + tol):
                    continue
                vlo = vhi = float(sign_v)
            if sign_y != 0:
                target = z_k + sign_y
                if n1 != 0.0:
                    vv = (target - s) / n1
                    if not (vlo - tol <= vv <= vhi + tol):
                        continue
                    vv = min(max(vv, vlo), vhi)
                    vlo = vhi = vv
                elif abs(s - target) > tol:
                    continue
            families.append(SignFamily(sign_v, sign_y, vlo, vhi, ys[0], ys[1], t, p.d_last, p.n_last))
    quads: list[Quadruple] = []
    seen: dict[float, int] = {}
    segment = None
    for fam in families:
        ystar = fam.canonical_ystar()
        vstar = fam.v_star(ystar)
        ends = (fam.v_lo, fam.v_hi) if fam.is_range else (fam.v_lo,)
        if fam.is_range and fam.v_hi - fam.v_lo > tol:
            segment = (fam.v_lo, fam.v_hi) if segment is None else (min(segment[0], fam.v_lo), max(segment[1], fam.v_hi))
        for v in ends:
            q = Quadruple(float(v), float(s + n1 * v), float(vstar), float(ystar))
            key = next((k for k in seen if abs(k - v) <= tol), None)
            if key is None:
                seen[float(v)] = len(quads)
                quads.append(q)
            elif quads[seen[key]].y_star != 0.0 and ystar == 0.0:
                quads[seen[key]] = q
    if not quads:
        return MResult("empty", (), None, tuple(families))
    kind = "segment" if segment is not None else "finite"
    return MResult(kind, tuple(quads), segment, tuple(families))


def quadruple_in_M(q: Quadruple, s: float, t: float, z_k: float, p: PlantSpec, tol: float = 1e-9) -> bool:
    """Membership test for the four defining conditions."""
    scale = max(1.0, abs(s), abs(t), abs(q.y), abs(q.y_star), abs(q.v_star))
    return (abs(q.v) <= 1 + tol and abs(q.y - z_k) <= 1 + tol
            and abs(q.y - p.n1 * q.v - s) <= tol * scale
            and abs(p.d_last * q.v_star + p.n_last * q.y_star + t) <= tol * scale
            and aligned(q.y, q.v, q.y_star, q.v_star, z_k, tol * scale))


# ---------------------------------------------------------------------------
# cone partition and single-point propagation
# ---------------------------------------------------------------------------

def partition_R(cone: geo.SupportCone, tol: float = DEFAULT.cone_angle) -> tuple[RTag, np.ndarray]:
    """Select the part of the cone the sign of the first component dictates, and a member."""
    G = np.asarray(cone.generators, dtype=float)
    if G.size == 0:
        raise ConePrecondition("empty supporting cone")
    first = G[:, 0]
    zero = np.abs(first) <= tol
    if zero.any():
        g = G[int(np.argmax(zero))].copy()
        g[0] = 0.0
        return "R1", g / np.linalg.norm(g)
    pos, neg = first > 0, first < 0
    if pos.any() and neg.any():
        gp, gn = G[int(np.argmax(pos))], G[int(np.argmax(neg))]
        g = abs(gn[0]) * gp + abs(gp[0]) * gn
        g[0] = 0.0
        return "R1", g / np.linalg.norm(g)
    g = G.sum(axis=0)
    g = g / np.linalg.norm(g)
    return ("R2" if pos.all() else "R3"), g


def successor_interval(x_prev, z_k: float, p: PlantSpec, est, tol: float = DEFAULT.align) -> tuple[float, float] | None:
    """Disturbance values v with A x_prev + B v a successor, or None."""
    s = float(est.C_row @ np.asarray(x_prev, dtype=float))
    if abs(s - z_k) > abs(p.n1) + 1.0 + tol:
        return None
    return line_square_interval(s, z_k, p.n1, tol)


@dataclass(frozen=True)
class PropagatedPair:
    x: np.ndarray
    x_star: np.ndarray
    quadruple: Quadruple


@dataclass(frozen=True)
class PointPropagation:
    x_prev: np.ndarray
    tag: RTag | None
    representative: np.ndarray | None
    pairs: tuple[PropagatedPair, ...]
    segment: tuple[np.ndarray, np.ndarray] | None = None
    successor_count: int = 0  # distinct successors before dropping zero directions


def _emit(x_prev, x_star_prev, m_result: MResult, sysm: System, keep_zero_ystar: bool, tol: float) -> list[PropagatedPair]:
    A, B = sysm.est.A, sysm.est.B_col
    As, Bs = sysm.reg.A_star, sysm.reg.B_star
    base_star = As @ x_star_prev
    fam_for = {}
    for fam in m_result.families:
        fam_for.setdefault((fam.sign_v, fam.sign_y), fam)
    out: list[PropagatedPair] = []
    scale = max(1.0, float(np.abs(x_prev).max()))
    for q in m_result.quadruples:
        if not keep_zero_ystar and q.y_star == 0.0:
            continue
        xs = base_star + Bs * q.y_star
        if np.linalg.norm(xs) <= ZERO_DUAL:
            fam = fam_for.get(q.pattern)
            alt = fam.alternative_ystar(q.y_star) if fam is not None else None
            if alt is None:
                continue
            q = Quadruple(q.v, q.y, fam.v_star(alt), alt)
            xs = base_star + Bs * alt
            if np.linalg.norm(xs) <= ZERO_DUAL:
                continue
        xn = A @ x_prev + B * q.v
        if any(np.abs(pp.x - xn).max() <= tol * scale for pp in out):
            continue
        out.append(PropagatedPair(xn, xs, q))
    return out


def propagate_point(x_prev, cone: geo.SupportCone, z_k: float, sysm: System,
                    tol: Tolerances = DEFAULT, representative=None) -> PointPropagation:
    """Successors of a boundary point on the next boundary, with supporting directions.

    ``representative`` overrides the canonical member of the selected cone
    part; it must lie in that part.
    """
    x_prev = np.asarray(x_prev, dtype=float).reshape(sysm.m)
    tag, rep = partition_R(cone, tol.cone_angle)
    if representative is not None:
        rep = np.asarray(representative, dtype=float).reshape(sysm.m)
    s = float(sysm.est.C_row @ x_prev)
    t = 0.0 if tag == "R1" else float(rep[0])
    mres = compute_M(s, t, z_k, sysm.plant, tol.align)
    pairs = _emit(x_prev, rep, mres, sysm, True, tol.align)
    segment = None
    if mres.kind == "segment":
        A, B = sysm.est.A, sysm.est.B_col
        segment = (A @ x_prev + B * mres.v_range[0], A @ x_prev + B * mres.v_range[1])
    return PointPropagation(x_prev, tag, rep, tuple(pairs), segment, len(mres.quadruples))


def propagate_zero_dual(x_prev, z_k: float, sysm: System, tol: Tolerances = DEFAULT) -> PointPropagation:
    """Successors reached with a zero incoming direction.

    Any point of S_{k-1} may use the zero direction, so this covers interior
    precursors; every emitted direction is a multiple of B*.
    """
    x_prev = np.asarray(x_prev, dtype=float).reshape(sysm.m)
    s = float(sysm.est.C_row @ x_prev)
    mres = compute_M(s, 0.0, z_k, sysm.plant, tol.align)
    # the deduplicated quadruples prefer y* = 0, which is useless here
    quads = []
    for fam in mres.families:
        if fam.sign_y == 0:
            continue
        ystar = fam.canonical_ystar()
        for v in {fam.v_lo, fam.v_hi}:
            quads.append(Quadruple(float(v), float(s + sysm.plant.n1 * v), fam.v_star(ystar), ystar))
    pairs = _emit(x_prev, np.zeros(sysm.m), MResult(mres.kind, tuple(quads), mres.v_range, mres.families),
                  sysm, False, tol.align)
    return PointPropagation(x_prev, None, None, tuple(pairs), None, len(pairs))


def propagate_point_set(x0, z_k: float, sysm: System, tol: Tolerances = DEFAULT) -> list[PointPropagation]:
    """Propagate a singleton S_0 = {x0}; its normal cone is every nonzero direction."""
    x0 = np.asarray(x0, dtype=float).reshape(sysm.m)
    if sysm.m == 1:
        cones = [geo.SupportCone(x0, np.array([[1.0]])), geo.SupportCone(x0, np.array([[-1.0]]))]
    else:
        e2 = np.zeros(sysm.m)
        e2[1] = 1.0
        cones = [geo.SupportCone(x0, e2[None, :])]
    return [propagate_point(x0, c, z_k, sysm, tol) for c in cones]


# ---------------------------------------------------------------------------
# fronts
# ---------------------------------------------------------------------------

@dataclass
class StepDiagnostics:
    candidates: np.ndarray
    pairs: list[tuple[np.ndarray, np.ndarray, str]]
    point_records: list[PointPropagation]
    oracle: geo.Polytope | None = None
    defects: list[np.ndarray] = field(default_factory=list)


@dataclass
class Front:
    polytope: geo.Polytope
    boundary_points: list[tuple[np.ndarray, geo.SupportCone]]
    k: int
    z_history: list[float]
    diagnostics: StepDiagnostics | None = None

    @classmethod
    def from_polytope(cls, P: geo.Polytope, k: int, z_history) -> "Front":
        if P.degenerate or P.is_empty:
            raise DegenerateFront(k)
        pts = [(v.copy(), geo.vertex_cone(P, i)) for i, v in enumerate(P.vertices)]
        return cls(P, pts, k, [float(z) for z in z_history])

    def to_dict(self) -> dict:
        out = {
            "k": self.k,
            "z_history": list(self.z_history),
            "polytope": self.polytope.to_dict(),
            "boundary_points": [cone.to_dict() for _, cone in self.boundary_points],
        }
        if self.diagnostics is not None:
            out["defects"] = [d.tolist() for d in self.diagnostics.defects]
            if self.diagnostics.oracle is not None:
                out["oracle"] = self.diagnostics.oracle.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Front":
        P = geo.Polytope.from_dict(data["polytope"])
        pts = []
        for c in data["boundary_points"]:
            cone = geo.SupportCone.from_dict(c)
            pts.append((cone.base_point, cone))
        return cls(P, pts, int(data["k"]), list(data["z_history"]))


def critical_points(P: geo.Polytope, z_k: float, sysm: System, tol: float) -> list[tuple[np.ndarray, np.ndarray | None]]:
    """Points x of S_{k-1} on an edge with C x = z_k + rho - n1 sigma (rho, sigma = +-1).

    These are where the line L(x) passes through a corner of the square, the
    only non-vertex boundary points that can precede a vertex of S_k. Each is
    returned with its edge normal (None for m = 1, where the point may be
    interior).
    """
    C, n1 = sysm.est.C_row, sysm.plant.n1
    levels = sorted({z_k + rho - n1 * sigma for rho in (-1.0, 1.0) for sigma in (-1.0, 1.0)})
    out = []
    es = geo.edges(P)
    for i, (a, b) in enumerate(es):
        ca, cb = float(C @ a), float(C @ b)
        if ca == cb:
            continue
        normal = P.normals[i] if P.dim == 2 else None
        for level in levels:
            lam = (level - ca) / (cb - ca)
            if tol < lam < 1.0 - tol:
                out.append((a + lam * (b - a), normal))
    return out


def propagate_front(front: Front, z_k: float, sysm: System, tol: Tolerances = DEFAULT,
                    sample_density: int = 64,
                    oracle_hook: Callable[[list[float]], geo.Polytope] | None = None) -> Front:
    """Advance S_{k-1} to S_k by propagating boundary points and directions."""
    P = front.polytope
    k = front.k + 1
    if P.degenerate or P.is_empty:
        raise DegenerateFront(front.k)
    C, n1 = sysm.est.C_row, sysm.plant.n1
    cvals = P.vertices @ C
    if cvals.min() - z_k > abs(n1) + 1.0 + tol.align or z_k - cvals.max() > abs(n1) + 1.0 + tol.align:
        raise EmptyFront(k)

    records: list[PointPropagation] = []
    pairs: list[tuple[np.ndarray, np.ndarray, str]] = []

    def take(rec: PointPropagation, source: str):
        records.append(rec)
        for pp in rec.pairs:
            pairs.append((pp.x, pp.x_star, source))

    for x, cone in front.boundary_points:
        take(propagate_point(x, cone, z_k, sysm, tol), "vertex")
        take(propagate_zero_dual(x, z_k, sysm, tol), "vertex-zero-dual")
    if sysm.m == 2:
        for x, normal in geo.boundary_samples(P, sample_density):
            take(propagate_point(x, geo.SupportCone(x, normal[None, :]), z_k, sysm, tol), "edge-sample")
    for x, normal in critical_points(P, z_k, sysm, 1e-12):
        if normal is not None:
            take(propagate_point(x, geo.SupportCone(x, normal[None, :]), z_k, sysm, tol), "critical")
        take(propagate_zero_dual(x, z_k, sysm, tol), "critical-zero-dual")

    if not pairs:
        raise EmptyFront(k)
    cand = np.array([p[0] for p in pairs])
    hull = geo.convex_hull(cand, tol.geom)
    if hull.degenerate:
        raise DegenerateFront(k)
    diag = StepDiagnostics(cand, pairs, records)
    if oracle_hook is not None:
        oracle = oracle_hook(front.z_history + [float(z_k)])
        diag.oracle = oracle
        thresh = 1e-7 * max(1.0, oracle.diameter)
        for v in oracle.vertices:
            if np.sqrt(((cand - v) ** 2).sum(axis=1)).min() > thresh:
                diag.defects.append(v.copy())
        if diag.defects:
            log.warning("step %d: %d oracle vertices missing from the candidates", k, len(diag.defects))
    nxt = Front.from_polytope(hull, k, front.z_history + [float(z_k)])
    nxt.diagnostics = diag
    return nxt


def seed_front(sysm: System, x0, z, tol: Tolerances = DEFAULT, max_steps: int | None = None) -> tuple[Front, list[geo.Polytope]]:
    """Warm up with the exact recursion until the set has interior.

    Returns the first nondegenerate front and the exact sets S_1 .. S_j used.
    """
    z = [float(v) for v in z]
    S = geo.convex_hull(np.asarray(x0, dtype=float).reshape(1, sysm.m), tol.geom)
    exact = []
    limit = len(z) if max_steps is None else min(len(z), max_steps)
    for j in range(limit):
        nxt = exact_step(S, sysm, z[j], tol.geom)
        if nxt is None:
            raise EmptyFront(j + 1)
        exact.append(nxt)
        S = nxt
        if not S.degenerate:
            return Front.from_polytope(S, j + 1, z[:j + 1]), exact
    raise DegenerateFront(limit)
