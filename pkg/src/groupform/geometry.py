"""Convex-hull primitives: hull construction, diameter, measures, containment.

Dimensions 1 and 2 are handled with exact geometric tests (up to a tolerance).
Higher dimensions support hull vertex extraction, diameter and containment;
containment there is decided by a small linear program.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .errors import GeometryError

DEFAULT_TOL = 1e-9

Point = tuple[float, ...]


class CoverageKind(enum.Enum):
    DIAMETER = "diameter"
    HULL_VOLUME = "hull_volume"
    HULL_PERIMETER = "hull_perimeter"


@dataclass(frozen=True)
class Hull:
    """Closed convex hull of a finite point set.

    ``vertices`` are counterclockwise for a full-rank planar hull, the sorted
    endpoint pair for segments (any d), and a single point for rank 0.
    """

    dimension: int
    vertices: tuple[Point, ...]
    affine_rank: int

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float).reshape(len(self.vertices), self.dimension)


def _as_points(points: Iterable[Sequence[float]]) -> list[Point]:
    pts = [tuple(float(c) for c in p) for p in points]
    if not pts:
        raise GeometryError("empty point set")
    d = len(pts[0])
    if d < 1:
        raise GeometryError("points must have at least one coordinate")
    for p in pts:
        if len(p) != d:
            raise GeometryError(f"mixed dimensions: {len(p)} vs {d}")
        if not all(math.isfinite(c) for c in p):
            raise GeometryError(f"non-finite coordinate in {p}")
    return pts


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(pts: list[Point]) -> list[Point]:
    """Andrew's monotone chain; drops collinear points. Returns CCW vertices."""
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts

    def half(seq):
        chain: list[Point] = []
        for p in seq:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= 0.0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def _hull_2d(pts: list[Point]) -> Hull:
    verts = _monotone_chain(pts)
    if len(verts) == 1:
        return Hull(2, (verts[0],), 0)
    if len(verts) == 2:
        return Hull(2, tuple(sorted(verts)), 1)
    return Hull(2, tuple(verts), 2)


def _hull_nd(pts: list[Point], d: int) -> Hull:
    arr = np.unique(np.asarray(pts, dtype=float), axis=0)
    if len(arr) == 1:
        return Hull(d, (tuple(arr[0]),), 0)
    center = arr.mean(axis=0)
    centered = arr - center
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(s[0], 1.0)
    rank = int(np.sum(s > 1e-12 * scale))
    proj = centered @ vt[:rank].T
    if rank == 1:
        lo, hi = int(np.argmin(proj[:, 0])), int(np.argmax(proj[:, 0]))
        verts = sorted([tuple(arr[lo]), tuple(arr[hi])])
        return Hull(d, tuple(verts), 1)
    if rank == 2:
        lookup = {tuple(q): tuple(p) for q, p in zip(proj.tolist(), arr.tolist())}
        chain = _monotone_chain([tuple(q) for q in proj.tolist()])
        return Hull(d, tuple(lookup[q] for q in chain), 2)
    idx = ConvexHull(proj).vertices
    return Hull(d, tuple(tuple(arr[i]) for i in sorted(idx)), rank)


def convex_hull(points: Iterable[Sequence[float]]) -> Hull:
    pts = _as_points(points)
    d = len(pts[0])
    if d == 1:
        lo, hi = min(pts), max(pts)
        if lo == hi:
            return Hull(1, (lo,), 0)
        return Hull(1, (lo, hi), 1)
    if d == 2:
        return _hull_2d(pts)
    return _hull_nd(pts, d)


def diameter(points: Iterable[Sequence[float]]) -> float:
    """Maximum pairwise Euclidean distance (0 for a single point)."""
    pts = _as_points(points)
    if len(pts) == 1:
        return 0.0
    return max(math.dist(p, q) for p, q in itertools.combinations(pts, 2))


def _polygon_area(verts: Sequence[Point]) -> float:
    n = len(verts)
    s = math.fsum(verts[i][0] * verts[(i + 1) % n][1] - verts[(i + 1) % n][0] * verts[i][1]
                  for i in range(n))
    return abs(s) / 2.0


def _polygon_perimeter(verts: Sequence[Point]) -> float:
    n = len(verts)
    return math.fsum(math.dist(verts[i], verts[(i + 1) % n]) for i in range(n))


def hull_measure(hull: Hull, kind: CoverageKind) -> float:
    if hull.affine_rank == 0:
        return 0.0
    if kind is CoverageKind.DIAMETER:
        return diameter(hull.vertices)
    d = hull.dimension
    if d > 2:
        raise GeometryError(f"coverage unsupported in dimension {d}")
    length = math.dist(hull.vertices[0], hull.vertices[-1]) if hull.affine_rank == 1 else None
    if kind is CoverageKind.HULL_VOLUME:
        if hull.affine_rank == 1:
            return length if d == 1 else 0.0
        return _polygon_area(hull.vertices)
    if kind is CoverageKind.HULL_PERIMETER:
        if hull.affine_rank == 1:
            return 2.0 * length
        return _polygon_perimeter(hull.vertices)
    raise GeometryError(f"unknown coverage kind {kind!r}")


def coverage(points: Iterable[Sequence[float]], kind: CoverageKind) -> float:
    """Coverage of a point set; diameter skips hull construction."""
    if kind is CoverageKind.DIAMETER:
        return diameter(points)
    return hull_measure(convex_hull(points), kind)


def point_segment_distance(p: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    pa = np.subtract(p, a, dtype=float)
    ba = np.subtract(b, a, dtype=float)
    denom = float(ba @ ba)
    if denom == 0.0:
        return float(np.linalg.norm(pa))
    t = min(1.0, max(0.0, float(pa @ ba) / denom))
    return float(np.linalg.norm(pa - t * ba))


def _edges(hull: Hull) -> list[tuple[Point, Point]]:
    v = hull.vertices
    if hull.affine_rank == 0:
        return []
    if hull.affine_rank == 1:
        return [(v[0], v[1])]
    return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


def _contains_lp(vertices: np.ndarray, p: np.ndarray, tol: float) -> bool:
    # min t  s.t.  |V^T lam - p|_inf <= t, lam in simplex
    k, d = vertices.shape
    c = np.zeros(k + 1)
    c[-1] = 1.0
    a_ub = np.block([[vertices.T, -np.ones((d, 1))], [-vertices.T, -np.ones((d, 1))]])
    b_ub = np.concatenate([p, -p])
    a_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (k + 1), method="highs")
    if not res.success:
        raise GeometryError(f"containment LP failed: {res.message}")
    return res.fun <= tol


def contains(hull: Hull, p: Sequence[float], tol: float = DEFAULT_TOL) -> bool:
    """True iff ``p`` lies in the closed hull or within ``tol`` of it."""
    p = tuple(float(c) for c in p)
    if len(p) != hull.dimension:
        raise GeometryError(f"dimension mismatch: point {len(p)} vs hull {hull.dimension}")
    v = hull.vertices
    if hull.affine_rank == 0:
        return math.dist(p, v[0]) <= tol
    if hull.dimension == 1:
        return v[0][0] - tol <= p[0] <= v[-1][0] + tol
    if hull.affine_rank == 1:
        return point_segment_distance(p, v[0], v[1]) <= tol
    if hull.dimension == 2:
        edges = _edges(hull)
        if all(_cross(a, b, p) >= 0.0 for a, b in edges):
            return True
        return min(point_segment_distance(p, a, b) for a, b in edges) <= tol
    return _contains_lp(hull.as_array(), np.asarray(p), tol)


def _segments_intersect(a: Point, b: Point, c: Point, d: Point, tol: float) -> bool:
    d1, d2 = _cross(c, d, a), _cross(c, d, b)
    d3, d4 = _cross(a, b, c), _cross(a, b, d)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    return min(point_segment_distance(a, c, d), point_segment_distance(b, c, d),
               point_segment_distance(c, a, b), point_segment_distance(d, a, b)) <= tol


def hulls_intersect(h1: Hull, h2: Hull, tol: float = DEFAULT_TOL) -> bool:
    """Whether two closed hulls share a point (up to ``tol``).

    Exact for d <= 2. For d >= 3 this solves the joint convex-combination LP,
    so the answer is subject to solver tolerance.
    """
    if h1.dimension != h2.dimension:
        raise GeometryError("dimension mismatch between hulls")
    if h1.dimension == 1:
        return h1.vertices[0][0] <= h2.vertices[-1][0] + tol and h2.vertices[0][0] <= h1.vertices[-1][0] + tol
    if h1.dimension == 2:
        if any(contains(h2, p, tol) for p in h1.vertices):
            return True
        if any(contains(h1, p, tol) for p in h2.vertices):
            return True
        return any(_segments_intersect(a, b, c, d, tol)
                   for (a, b), (c, d) in itertools.product(_edges(h1), _edges(h2)))
    # min t s.t. |V1^T lam - V2^T mu|_inf <= t, lam and mu in simplices
    v1, v2 = h1.as_array(), h2.as_array()
    k1, k2, d = len(v1), len(v2), h1.dimension
    c = np.zeros(k1 + k2 + 1)
    c[-1] = 1.0
    diff = np.hstack([v1.T, -v2.T])
    ones = np.ones((d, 1))
    a_ub = np.block([[diff, -ones], [-diff, -ones]])
    b_ub = np.zeros(2 * d)
    a_eq = np.zeros((2, k1 + k2 + 1))
    a_eq[0, :k1] = 1.0
    a_eq[1, k1:k1 + k2] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0, 1.0],
                  bounds=[(0, None)] * (k1 + k2 + 1), method="highs")
    if not res.success:
        raise GeometryError(f"intersection LP failed: {res.message}")
    return res.fun <= tol
