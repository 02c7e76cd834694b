"""Convex polytopes in R^m for m <= 3.

Intervals (m = 1) and polygons (m = 2) get exact, tolerance-documented
algorithms. For m = 3 only hulls and support queries are offered, backed by
Qhull. Predicates are tolerance based: ``geom`` tolerances are relative to the
extent of the point set involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegeneratePolytope, NotOnBoundary, ZeroDirection
from .tolerances import DEFAULT


@dataclass(frozen=True)
class Polytope:
    """V-rep plus H-rep of a convex polytope.

    For m = 2 the vertices run counter-clockwise and halfspace ``i`` is the
    edge from vertex ``i`` to vertex ``i + 1``. ``degenerate`` marks sets with
    empty interior (points, segments), which the propagation refuses.
    """

    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    @property
    def halfspaces(self) -> list[tuple[np.ndarray, float]]:
        return [(nrm, float(b)) for nrm, b in zip(self.normals, self.offsets)]

    @property
    def diameter(self) -> float:
        if len(self.vertices) < 2:
            return 0.0
        diff = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())

    @property
    def scale(self) -> float:
        return max(1.0, self.diameter, float(np.abs(self.vertices).max()) if len(self.vertices) else 0.0)

    def contains(self, x, tol: float = 1e-9) -> bool:
        if self.is_empty:
            return False
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            return distance_to_set(self, x) <= tol * self.scale
        return bool(np.all(self.normals @ x <= self.offsets + tol * self.scale))

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "halfspaces": [{"normal": nrm.tolist(), "offset": float(b)} for nrm, b in self.halfspaces],
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Polytope":
        verts = np.asarray(data["vertices"], dtype=float)
        hs = data.get("halfspaces", [])
        dim = verts.shape[1] if verts.ndim == 2 and verts.size else (len(hs[0]["normal"]) if hs else 0)
        normals = np.asarray([h["normal"] for h in hs], dtype=float).reshape(-1, dim)
        offsets = np.asarray([h["offset"] for h in hs], dtype=float)
        return cls(verts.reshape(-1, dim), normals, offsets, bool(data.get("degenerate", False)))


def empty_polytope(dim: int) -> Polytope:
    return Polytope(np.zeros((0, dim)), np.zeros((0, dim)), np.zeros(0), degenerate=True)


@dataclass(frozen=True)
class SupportCone:
    """Normal cone of a polytope at a boundary point.

    ``generators`` are unit extreme rays. For m = 2 they are ordered
    counter-clockwise and ``interval`` holds their polar angles.
    """

    base_point: np.ndarray
    generators: np.ndarray
    interval: tuple[float, float] | None = None

    def interior_direction(self) -> np.ndarray:
        g = self.generators.sum(axis=0)
        return g / np.linalg.norm(g)

    def contains(self, direction, tol: float = 1e-9) -> bool:
        """Membership of a nonzero direction in the closed cone (m <= 2)."""
        u = np.asarray(direction, dtype=float)
        u = u / np.linalg.norm(u)
        if len(self.generators) == 1:
            return float(np.linalg.norm(u - self.generators[0])) <= tol
        g0, g1 = self.generators[0], self.generators[-1]
        if self.generators.shape[1] != 2:
            raise NotImplementedError("cone membership is implemented for m <= 2")
        return _cross(g0, u) >= -tol and _cross(u, g1) >= -tol and float(u @ (g0 + g1)) > 0

    def to_dict(self) -> dict:
        out = {"point": self.base_point.tolist(), "generators": self.generators.tolist()}
        if self.interval is not None:
            out["interval"] = list(self.interval)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SupportCone":
        interval = tuple(data["interval"]) if "interval" in data else None
        return cls(np.asarray(data["point"], float), np.asarray(data["generators"], float), interval)


def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _angle(g) -> float:
    return float(np.arctan2(g[1], g[0]))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def interval(lo: float, hi: float, tol: float = DEFAULT.geom) -> Polytope:
    lo, hi = float(lo), float(hi)
    if hi < lo:
        raise ValueError("empty interval")
    degenerate = hi - lo <= tol * max(1.0, abs(lo), abs(hi))
    verts = np.array([[lo]]) if degenerate else np.array([[lo], [hi]])
    return Polytope(verts, np.array([[1.0], [-1.0]]), np.array([hi, -lo]), degenerate)


def polygon_from_ccw(vertices) -> Polytope:
    V = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(V) < 3:
        return _degenerate_planar(V)
    E = np.roll(V, -1, axis=0) - V
    normals = np.column_stack([E[:, 1], -E[:, 0]])
    normals = normals / np.linalg.norm(normals, axis=1)[:, None] + 0.0
    offsets = np.einsum("ij,ij->i", normals, V)
    return Polytope(V, normals, offsets, False)


def _degenerate_planar(V: np.ndarray) -> Polytope:
    if len(V) == 1:
        normals = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        return Polytope(V, normals, normals @ V[0], True)
    a, b = V
    u = (b - a) / np.linalg.norm(b - a)
    perp = np.array([u[1], -u[0]])
    normals = np.array([perp, u, -perp, -u])
    offsets = np.array([perp @ a, u @ b, -perp @ a, -u @ a])
    return Polytope(V, normals, offsets, True)


def convex_hull(points, tol: float = DEFAULT.geom) -> Polytope:
    """Minimal hull of a finite point set.

    Duplicates and points within ``tol * extent`` of a hull edge are pruned.
    Collinear or coincident inputs come back tagged ``degenerate``.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if len(P) == 0:
        raise ValueError("convex hull of an empty point set")
    dim = P.shape[1]
    if dim == 1:
        return interval(P[:, 0].min(), P[:, 0].max(), tol)
    if dim == 2:
        return _hull2(P, tol)
    if dim == 3:
        return _hull3(P, tol)
    raise NotImplementedError("convex hulls are implemented for m <= 3")


def _chord_distances(V: np.ndarray) -> np.ndarray:
    """Distance of each vertex of a closed ccw loop from the chord of its two neighbours."""
    prev, nxt = np.roll(V, 1, axis=0), np.roll(V, -1, axis=0)
    u = nxt - prev
    cross = u[:, 0] * (V[:, 1] - prev[:, 1]) - u[:, 1] * (V[:, 0] - prev[:, 0])
    length = np.hypot(u[:, 0], u[:, 1])
    out = np.where(length > 0, -cross / np.where(length > 0, length, 1.0), 0.0)
    return out


def _hull2(P: np.ndarray, tol: float) -> Polytope:
    extent = max(1.0, float(np.ptp(P, axis=0).max()), float(np.abs(P).max()))
    eps_dist = tol * extent
    pts = np.unique(P, axis=0)  # lexicographic order

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def chain(seq):
        out: list = []
        for p in seq:
            while len(out) >= 2 and cross(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    # exact hull first; tolerance pruning afterwards removes the flattest
    # corners first, so a dense run of near-collinear samples cannot
    # swallow a genuine shallow vertex
    tuples = [tuple(p) for p in pts]
    lower = chain(tuples)
    upper = chain(reversed(tuples))
    V = np.array(lower[:-1] + upper[:-1], dtype=float).reshape(-1, 2)
    if len(V) == 0:
        V = pts[:1].copy()
    while len(V) >= 3:
        dist = _chord_distances(V)
        weak = dist <= eps_dist
        if not weak.any():
            break
        # drop local minima only, so neighbours are re-judged after each round
        local_min = weak & (dist <= np.roll(dist, 1)) & (dist <= np.roll(dist, -1))
        idx = np.flatnonzero(local_min)
        if len(idx) > 1 and idx[0] == 0 and idx[-1] == len(V) - 1:
            idx = idx[:-1]
        keep_mask = np.ones(len(V), dtype=bool)
        last = -2
        for i in idx:
            if i != last + 1:
                keep_mask[i] = False
                last = i
        V = V[keep_mask]
    if len(V) >= 3:
        return polygon_from_ccw(V)
    if len(V) == 2 and np.linalg.norm(V[1] - V[0]) <= eps_dist:
        V = V[:1]
    return _degenerate_planar(V)


def _hull3(P: np.ndarray, tol: float) -> Polytope:
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(P)
    except QhullError:
        return Polytope(np.unique(P, axis=0), np.zeros((0, 3)), np.zeros(0), True)
    eq = hull.equations
    normals, offsets = [], []
    for row in eq:
        nrm, b = row[:3], -row[3]
        if not any(np.linalg.norm(nrm - q) <= 1e-9 and abs(b - c) <= 1e-9 * max(1.0, abs(b)) for q, c in zip(normals, offsets)):
            normals.append(nrm)
            offsets.append(b)
    return Polytope(P[hull.vertices], np.array(normals), np.array(offsets), False)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def support(P: Polytope, direction) -> tuple[float, list[np.ndarray]]:
    d = np.asarray(direction, dtype=float).reshape(P.dim)
    nd = float(np.linalg.norm(d))
    if nd == 0.0:
        raise ZeroDirection("support direction must be nonzero")
    vals = P.vertices @ d
    best = float(vals.max())
    slack = 1e-9 * nd * max(P.diameter, 1.0)
    return best, [v.copy() for v, val in zip(P.vertices, vals) if val >= best - slack]


def _active(P: Polytope, x: np.ndarray, tol: float) -> np.ndarray:
    gaps = P.offsets - P.normals @ x
    if np.any(gaps < -tol):
        raise NotOnBoundary("point lies outside the polytope")
    return np.flatnonzero(np.abs(gaps) <= tol)


def supporting_cone(P: Polytope, x, tol: float = 1e-9) -> SupportCone:
    if P.degenerate or P.is_empty:
        raise DegeneratePolytope("supporting cones need a polytope with interior")
    x = np.asarray(x, dtype=float).reshape(P.dim)
    t = tol * P.scale
    act = _active(P, x, t)
    if len(act) == 0:
        raise NotOnBoundary("point is interior")
    if P.dim == 1:
        return SupportCone(x, P.normals[act[:1]].copy())
    if P.dim == 2:
        N = len(P.normals)
        if len(act) == 1:
            g = P.normals[act]
            return SupportCone(x, g.copy(), (_angle(g[0]), _angle(g[0])))
        if len(act) > 2:
            raise NotOnBoundary("point is ambiguous between several vertices")
        a, b = int(act[0]), int(act[1])
        if (a + 1) % N != b:
            a, b = b, a
        if (a + 1) % N != b:
            raise NotOnBoundary("active edges are not adjacent")
        g = P.normals[[a, b]].copy()
        return SupportCone(x, g, (_angle(g[0]), _angle(g[1])))
    return SupportCone(x, P.normals[act].copy())


def vertex_cone(P: Polytope, index: int) -> SupportCone:
    """Normal cone at vertex ``index`` read off the adjacent facets, with no point lookup."""
    if P.degenerate or P.is_empty:
        raise DegeneratePolytope("supporting cones need a polytope with interior")
    x = P.vertices[index]
    if P.dim != 2:
        return supporting_cone(P, x)
    g = P.normals[[index - 1, index]].copy()
    return SupportCone(x.copy(), g, (_angle(g[0]), _angle(g[1])))


def edges(P: Polytope) -> list[tuple[np.ndarray, np.ndarray]]:
    """1-dimensional faces for m = 2, the interval itself for m = 1."""
    V = P.vertices
    if len(V) < 2:
        return []
    if P.dim == 1 or len(V) == 2:
        return [(V[0], V[-1])]
    if P.dim != 2:
        raise NotImplementedError("edges are implemented for m <= 2")
    return [(V[i], V[(i + 1) % len(V)]) for i in range(len(V))]


def _point_segment_distance(x, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    lam = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((x - a) @ ab) / denom))
    return float(np.linalg.norm(x - (a + lam * ab)))


def distance_to_boundary(P: Polytope, x) -> float:
    x = np.asarray(x, dtype=float).reshape(P.dim)
    if P.dim == 1:
        return float(np.abs(P.vertices[:, 0] - x[0]).min())
    if P.dim != 2:
        raise NotImplementedError
    return min(_point_segment_distance(x, a, b) for a, b in edges(P))


def boundary_distances(P: Polytope, X) -> np.ndarray:
    """Vectorized distance_to_boundary for the rows of X."""
    X = np.asarray(X, dtype=float).reshape(-1, P.dim)
    if P.dim == 1:
        return np.abs(X[:, :1] - P.vertices[:, 0][None, :]).min(axis=1)
    if P.dim != 2:
        raise NotImplementedError
    A = np.array([a for a, _ in edges(P)])
    AB = np.array([b for _, b in edges(P)]) - A
    denom = np.einsum("ij,ij->i", AB, AB)
    rel = X[:, None, :] - A[None, :, :]
    lam = np.einsum("pij,ij->pi", rel, AB) / np.where(denom == 0.0, 1.0, denom)
    lam = np.clip(np.where(denom == 0.0, 0.0, lam), 0.0, 1.0)
    return np.linalg.norm(rel - lam[..., None] * AB[None], axis=2).min(axis=1)


def distance_to_set(P: Polytope, x) -> float:
    """Euclidean distance from x to P (zero inside), m <= 2."""
    x = np.asarray(x, dtype=float).reshape(P.dim)
    if P.dim == 1:
        lo, hi = P.vertices[:, 0].min(), P.vertices[:, 0].max()
        return float(max(lo - x[0], x[0] - hi, 0.0))
    if len(P.vertices) == 1:
        return float(np.linalg.norm(x - P.vertices[0]))
    if not P.degenerate and np.all(P.normals @ x <= P.offsets):
        return 0.0
    return distance_to_boundary(P, x)


def hausdorff_points(A, B) -> float:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if len(A) == 0 and len(B) == 0:
        return 0.0
    if len(A) == 0 or len(B) == 0:
        return float("inf")
    D = np.sqrt(((A[:, None, :] - B[None, :, :]) ** 2).sum(-1))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def hausdorff_polytopes(P: Polytope, Q: Polytope) -> float:
    """Set-level Hausdorff distance for m <= 2 (attained at vertices)."""
    a = max((distance_to_set(Q, v) for v in P.vertices), default=0.0)
    b = max((distance_to_set(P, v) for v in Q.vertices), default=0.0)
    return float(max(a, b))


# ---------------------------------------------------------------------------
# clipping and faces
# ---------------------------------------------------------------------------

def intersect_halfspaces(P: Polytope, cuts: Sequence[tuple], tol: float = DEFAULT.geom) -> Polytope:
    """Clip P by halfspaces ``normal . x <= offset`` (Sutherland-Hodgman for m = 2)."""
    if P.is_empty:
        return P
    dim = P.dim
    eps = tol * P.scale
    if dim == 1:
        lo, hi = float(P.vertices[:, 0].min()), float(P.vertices[:, 0].max())
        for nrm, b in cuts:
            a = float(np.asarray(nrm).ravel()[0])
            if a > 0:
                hi = min(hi, b / a)
            elif a < 0:
                lo = max(lo, b / a)
            elif b < -eps:
                return empty_polytope(1)
        if hi < lo - eps:
            return empty_polytope(1)
        return interval(lo, max(lo, hi), tol)
    if dim != 2:
        raise NotImplementedError("halfspace intersection is implemented for m <= 2")
    poly = [v.copy() for v in P.vertices]
    for nrm, b in cuts:
        nrm = np.asarray(nrm, dtype=float)
        if not poly:
            break
        out = []
        k = len(poly)
        for i in range(k):
            cur, nxt = poly[i], poly[(i + 1) % k]
            fc, fn = float(nrm @ cur) - b, float(nrm @ nxt) - b
            if fc <= eps:
                out.append(cur)
            if (fc < -eps and fn > eps) or (fc > eps and fn < -eps):
                lam = fc / (fc - fn)
                out.append(cur + lam * (nxt - cur))
            if k == 1:
                break
        poly = out
    if not poly:
        return empty_polytope(2)
    return convex_hull(np.array(poly), tol)


@dataclass(frozen=True)
class Face:
    vertices: np.ndarray
    tol: float = 1e-9

    @property
    def has_relint(self) -> bool:
        return len(self.vertices) >= 2

    def contains_relint(self, x) -> bool:
        """Relative-interior membership; single-point faces have none."""
        if not self.has_relint:
            return False
        x = np.asarray(x, dtype=float)
        a, b = self.vertices[0], self.vertices[-1]
        if _point_segment_distance(x, a, b) > self.tol:
            return False
        return min(np.linalg.norm(x - a), np.linalg.norm(x - b)) > self.tol


def faces_F(P: Polytope, B_star, tol: float = 1e-9) -> tuple[Face, Face, Callable[[np.ndarray], bool]]:
    """Faces of P maximising +B* and -B*, with a relint(F+) U relint(F-) test."""
    if P.degenerate or P.is_empty:
        raise DegeneratePolytope("faces F+/F- need a polytope with interior")
    if P.dim > 2:
        raise NotImplementedError("faces are implemented for m <= 2")
    b = np.asarray(B_star, dtype=float).reshape(P.dim)
    t = tol * P.scale
    _, plus = support(P, b)
    _, minus = support(P, -b)

    def as_face(pts):
        pts = np.array(pts)
        if len(pts) > 2:
            # keep the extreme pair along the face
            u = np.array([-b[1], b[0]]) if P.dim == 2 else np.ones(1)
            s = pts @ u
            pts = pts[[int(np.argmin(s)), int(np.argmax(s))]]
        return Face(pts, t)

    Fp, Fm = as_face(plus), as_face(minus)
    return Fp, Fm, lambda x: Fp.contains_relint(x) or Fm.contains_relint(x)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def boundary_samples(P: Polytope, per_edge: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """``per_edge`` evenly spaced points strictly inside each edge, with the edge normal."""
    if per_edge <= 0 or P.dim != 2 or P.degenerate:
        return []
    out = []
    lam = np.arange(1, per_edge + 1) / (per_edge + 1)
    for i, (a, b) in enumerate(edges(P)):
        for t in lam:
            out.append((a + t * (b - a), P.normals[i]))
    return out


def sample_interior(P: Polytope, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from a polygon (fan triangulation) or interval."""
    if P.dim == 1:
        lo, hi = P.vertices[:, 0].min(), P.vertices[:, 0].max()
        return rng.uniform(lo, hi, (count, 1))
    V = P.vertices
    tris = [(V[0], V[i], V[i + 1]) for i in range(1, len(V) - 1)]
    areas = np.array([abs(_cross(b - a, c - a)) / 2 for a, b, c in tris])
    idx = rng.choice(len(tris), size=count, p=areas / areas.sum())
    r1, r2 = rng.random(count), rng.random(count)
    flip = r1 + r2 > 1
    r1[flip], r2[flip] = 1 - r1[flip], 1 - r2[flip]
    out = np.empty((count, 2))
    for j, (i, s, t) in enumerate(zip(idx, r1, r2)):
        a, b, c = tris[i]
        out[j] = a + s * (b - a) + t * (c - a)
    return out
