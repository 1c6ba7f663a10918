"""Planar Delaunay triangulations.

:func:`triangulate` wraps Qhull and is what the estimators use.
:func:`bowyer_watson` is a small incremental implementation with
filtered-exact predicates; it is quadratic and meant for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import Delaunay, QhullError


@dataclass(frozen=True)
class Triangulation:
    points: np.ndarray
    triangles: np.ndarray  # (t, 3) vertex indices, counter-clockwise
    edges: np.ndarray  # (m, 2) with i < j, lexicographically sorted
    hull: np.ndarray  # indices of convex hull vertices
    degenerate: bool = False

    @property
    def n_points(self):
        return len(self.points)

    def neighbors(self):
        """CSR adjacency ``(indptr, indices)`` built from the edge list."""
        n = len(self.points)
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.argsort(src * n + dst, kind="stable")
        indptr = np.searchsorted(src[order], np.arange(n + 1))
        return indptr, dst[order]

    def circumcircles(self):
        return circumcircles(self.points, self.triangles)


def _edges_from_triangles(tri):
    a = np.concatenate([tri[:, 0], tri[:, 1], tri[:, 2]])
    b = np.concatenate([tri[:, 1], tri[:, 2], tri[:, 0]])
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    n = int(hi.max()) + 1
    keys = np.unique(lo * n + hi)
    return np.column_stack([keys // n, keys % n])


def circumcircles(points, triangles):
    """Circumcentres ``(t, 2)`` and circumradii ``(t,)`` of the triangles."""
    a = points[triangles[:, 0]]
    b = points[triangles[:, 1]] - a
    c = points[triangles[:, 2]] - a
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    bb = np.sum(b * b, axis=1)
    cc = np.sum(c * c, axis=1)
    ux = (c[:, 1] * bb - b[:, 1] * cc) / d
    uy = (b[:, 0] * cc - c[:, 0] * bb) / d
    return a + np.column_stack([ux, uy]), np.hypot(ux, uy)


def _collinear(points):
    if len(points) < 3:
        return True
    centred = points - points.mean(axis=0)
    s = np.linalg.svd(centred, compute_uv=False)
    return s[1] <= 1e-12 * max(s[0], 1e-300)


def _path(points):
    n = len(points)
    if n < 2:
        return np.empty((0, 2), dtype=np.int64), np.arange(n)
    centred = points - points.mean(axis=0)
    direction = np.linalg.svd(centred)[2][0]
    order = np.argsort(centred @ direction, kind="stable")
    e = np.column_stack([order[:-1], order[1:]])
    e.sort(axis=1)
    e = e[np.lexsort((e[:, 1], e[:, 0]))]
    return e.astype(np.int64), order[[0, -1]]


def triangulate(points) -> Triangulation:
    """Delaunay triangulation of planar points.

    Collinear input (or fewer than three points) yields the path through the
    points in order along their common line, flagged ``degenerate``.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("triangulate expects an (n, 2) array")
    empty_tri = np.empty((0, 3), dtype=np.int64)
    if _collinear(points):
        edges, hull = _path(points)
        return Triangulation(points, empty_tri, edges, hull, degenerate=True)
    try:
        dt = Delaunay(points)
    except QhullError:
        edges, hull = _path(points)
        return Triangulation(points, empty_tri, edges, hull, degenerate=True)
    tri = dt.simplices.astype(np.int64)
    # Qhull does not promise orientation
    p = points
    orient = (p[tri[:, 1], 0] - p[tri[:, 0], 0]) * (p[tri[:, 2], 1] - p[tri[:, 0], 1]) - (
        p[tri[:, 1], 1] - p[tri[:, 0], 1]
    ) * (p[tri[:, 2], 0] - p[tri[:, 0], 0])
    flip = orient < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    hull = np.unique(dt.convex_hull)
    return Triangulation(points, tri, _edges_from_triangles(tri), hull)


def delaunay_2d(config) -> Triangulation:
    """Delaunay mosaic of a planar realization."""
    if config.dim != 2:
        raise ValueError("delaunay_2d needs a planar configuration")
    return triangulate(config.points)


# --- incremental construction -------------------------------------------

_EPS_ORIENT = 3.3e-16
_EPS_INCIRCLE = 1.2e-15


def orient2d(a, b, c):
    """Sign of the orientation determinant, exact when the float value is unsure."""
    l = (a[0] - c[0]) * (b[1] - c[1])
    r = (a[1] - c[1]) * (b[0] - c[0])
    det = l - r
    if abs(det) > _EPS_ORIENT * 4 * (abs(l) + abs(r)):
        return 1 if det > 0 else -1
    fa, fb, fc = [tuple(map(Fraction, p)) for p in (a, b, c)]
    det = (fa[0] - fc[0]) * (fb[1] - fc[1]) - (fa[1] - fc[1]) * (fb[0] - fc[0])
    return (det > 0) - (det < 0)


def incircle(a, b, c, d):
    """Positive when ``d`` lies strictly inside the circle through CCW ``a, b, c``."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    t1 = bdx * cdy - bdy * cdx
    t2 = cdx * ady - cdy * adx
    t3 = adx * bdy - ady * bdx
    det = alift * t1 + blift * t2 + clift * t3
    perm = alift * (abs(bdx * cdy) + abs(bdy * cdx)) + blift * (abs(cdx * ady) + abs(cdy * adx)) + clift * (
        abs(adx * bdy) + abs(ady * bdx)
    )
    if abs(det) > _EPS_INCIRCLE * 8 * perm:
        return 1 if det > 0 else -1
    A, B, C, D = [tuple(map(Fraction, p)) for p in (a, b, c, d)]
    adx, ady = A[0] - D[0], A[1] - D[1]
    bdx, bdy = B[0] - D[0], B[1] - D[1]
    cdx, cdy = C[0] - D[0], C[1] - D[1]
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - bdy * cdx)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - cdy * adx)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - ady * bdx)
    )
    return (det > 0) - (det < 0)


def bowyer_watson(points) -> np.ndarray:
    """Delaunay triangles by incremental cavity re-triangulation.

    Cocircular ties are resolved by insertion order: a point exactly on a
    circumcircle does not invalidate the triangle. Returns CCW index triples.
    """
    pts = [tuple(map(float, p)) for p in np.asarray(points, dtype=float)]
    n = len(pts)
    if n < 3:
        return np.empty((0, 3), dtype=np.int64)
    P = np.asarray(pts)
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    mid = 0.5 * (lo + hi)
    M = 1e6 * span
    verts = pts + [
        (mid[0] - 2 * M, mid[1] - M),
        (mid[0] + 2 * M, mid[1] - M),
        (mid[0], mid[1] + 2 * M),
    ]
    tris = {(n, n + 1, n + 2)}
    for i in range(n):
        p = verts[i]
        bad = [t for t in tris if incircle(verts[t[0]], verts[t[1]], verts[t[2]], p) > 0]
        count = {}
        for t in bad:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                key = (min(e), max(e))
                count[key] = count.get(key, 0) + 1
        tris.difference_update(bad)
        for t in bad:
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                if count[(min(a, b), max(a, b))] == 1:
                    tris.add((a, b, i))
    out = [t for t in tris if max(t) < n]
    out.sort(key=lambda t: tuple(sorted(t)))
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def edge_set(triangles) -> set:
    tri = np.asarray(triangles)
    if len(tri) == 0:
        return set()
    return {tuple(e) for e in _edges_from_triangles(tri)}
