"""Convex bodies and the deterministic quantities the estimators are measured in.

Three body kinds are supported: Euclidean balls in any dimension, axis-aligned
boxes (``d = 1`` gives an interval) and strictly convex polygons in the plane.
All bodies are closed, so boundary points count as inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.optimize import linprog
from scipy.special import betainc, gamma

from . import polygons

# degeneracy detection only, never used to move a decision boundary
EPS = 1e-12


def unit_ball_volume(d: int) -> float:
    """Volume ``kappa_d`` of the d-dimensional unit ball."""
    return math.pi ** (d / 2) / gamma(d / 2 + 1)


def _as_point(z, d):
    z = np.asarray(z, dtype=float)
    if z.shape != (d,):
        raise ValueError(f"expected a point of dimension {d}, got shape {z.shape}")
    return z


def _as_points(Z, d):
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1 and d == 1:
        Z = Z[:, None]
    if Z.ndim != 2 or Z.shape[1] != d:
        raise ValueError(f"expected an (n, {d}) array of points, got shape {Z.shape}")
    return Z


def _sphere_cap_fraction(t, d):
    """Fraction of the unit sphere S^{d-1} with first coordinate >= t."""
    if t >= 1.0:
        return 0.0
    if t <= -1.0:
        return 1.0
    half = 0.5 * betainc((d - 1) / 2, 0.5, 1.0 - t * t)
    return half if t >= 0 else 1.0 - half


@dataclass(frozen=True)
class Window:
    """Axis-aligned sampling box ``[lo, hi]``."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("window bounds must have the same nonzero dimension")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"degenerate window {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def contains_points(self, Z) -> np.ndarray:
        Z = _as_points(Z, self.dim)
        return np.all((Z >= self.lo) & (Z <= self.hi), axis=1)

    def contains_balls(self, centers, radii) -> np.ndarray:
        """True where the closed ball ``B(center, radius)`` lies inside the window."""
        C = _as_points(centers, self.dim)
        r = np.asarray(radii, dtype=float)[:, None]
        return np.all((C - r >= self.lo) & (C + r <= self.hi), axis=1)

    def uniform(self, rng, n) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def inflate(self, rho: float) -> "Window":
        return Window(tuple(a - rho for a in self.lo), tuple(b + rho for b in self.hi))

    def polygon(self):
        if self.dim != 2:
            raise ValueError("window polygon only exists in the plane")
        return polygons.box_polygon(self.lo, self.hi)


class ConvexBody:
    """Common interface of the three body kinds."""

    dim: int

    def volume(self) -> float:
        raise NotImplementedError

    def surface_area(self) -> float:
        raise NotImplementedError

    def radii(self) -> tuple[float, float]:
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def contains_points(self, Z) -> np.ndarray:
        raise NotImplementedError

    def segments_hit(self, P, Q) -> np.ndarray:
        """Vectorised ``[p, q] ∩ K != ∅`` for rows of ``P`` and ``Q``."""
        raise NotImplementedError

    def boundary_distance(self, Z) -> np.ndarray:
        raise NotImplementedError

    def contains(self, z) -> bool:
        return bool(self.contains_points(_as_point(z, self.dim)[None, :])[0])

    def area_within(self, poly) -> float:
        """Area of a convex CCW polygon intersected with the body (planar bodies)."""
        raise NotImplementedError

    def sphere_fraction(self, x, r: float) -> float:
        """Fraction of the sphere ``S(x, r)`` lying inside the body."""
        raise NotImplementedError

    def covariogram(self, z) -> float:
        """``V(K ∩ (K + z))``."""
        raise NotImplementedError

    def _check_dim(self):
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")


@dataclass(frozen=True)
class Ball(ConvexBody):
    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        object.__setattr__(self, "center", c)
        self._check_dim()
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @classmethod
    def unit(cls, d: int, radius: float = 1.0) -> "Ball":
        return cls((0.0,) * d, radius)

    @property
    def dim(self) -> int:
        return len(self.center)

    def volume(self):
        return unit_ball_volume(self.dim) * self.radius ** self.dim

    def surface_area(self):
        d = self.dim
        return d * unit_ball_volume(d) * self.radius ** (d - 1)

    def radii(self):
        return (self.radius, self.radius)

    def bbox(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def contains_points(self, Z):
        Z = _as_points(Z, self.dim)
        return np.sum((Z - self.center) ** 2, axis=1) <= self.radius**2

    def segments_hit(self, P, Q):
        P = _as_points(P, self.dim) - self.center
        Q = _as_points(Q, self.dim) - self.center
        D = Q - P
        dd = np.sum(D * D, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(dd > 0, -np.sum(P * D, axis=1) / dd, 0.0)
        t = np.clip(t, 0.0, 1.0)
        closest = P + t[:, None] * D
        return np.sum(closest**2, axis=1) <= self.radius**2

    def boundary_distance(self, Z):
        Z = _as_points(Z, self.dim)
        return np.abs(np.linalg.norm(Z - self.center, axis=1) - self.radius)

    def area_within(self, poly):
        if self.dim != 2:
            raise ValueError("area_within needs a planar body")
        return polygons.circle_polygon_area(poly, self.center, self.radius)

    def sphere_fraction(self, x, r):
        x = _as_point(x, self.dim)
        D = float(np.linalg.norm(x - self.center))
        a = self.radius
        if self.dim == 1:
            return 0.5 * (abs(x[0] + r - self.center[0]) <= a) + 0.5 * (
                abs(x[0] - r - self.center[0]) <= a
            )
        if D == 0.0:
            return 1.0 if r <= a else 0.0
        t = (r * r + D * D - a * a) / (2.0 * r * D)
        return _sphere_cap_fraction(t, self.dim)

    def covariogram(self, z):
        s = float(np.linalg.norm(z))
        a = self.radius
        if s >= 2 * a:
            return 0.0
        d = self.dim
        x = 1.0 - (s / (2 * a)) ** 2
        return unit_ball_volume(d) * a**d * float(betainc((d + 1) / 2, 0.5, x))


@dataclass(frozen=True)
class Box(ConvexBody):
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ValueError("box bounds differ in dimension")
        self._check_dim()
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box side lengths must be positive")

    @classmethod
    def unit(cls, d: int) -> "Box":
        return cls((0.0,) * d, (1.0,) * d)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def sides(self) -> np.ndarray:
        return np.subtract(self.hi, self.lo)

    @property
    def center(self):
        return tuple(0.5 * (a + b) for a, b in zip(self.lo, self.hi))

    def volume(self):
        return float(np.prod(self.sides))

    def surface_area(self):
        s = self.sides
        return float(2 * sum(np.prod(np.delete(s, i)) for i in range(len(s))))

    def radii(self):
        s = self.sides
        return (0.5 * float(s.min()), 0.5 * float(np.linalg.norm(s)))

    def bbox(self):
        return np.array(self.lo), np.array(self.hi)

    def contains_points(self, Z):
        Z = _as_points(Z, self.dim)
        return np.all((Z >= self.lo) & (Z <= self.hi), axis=1)

    def segments_hit(self, P, Q):
        # Liang-Barsky slab clipping of the parameter interval [0, 1]
        P = _as_points(P, self.dim)
        Q = _as_points(Q, self.dim)
        D = Q - P
        t0 = np.zeros(len(P))
        t1 = np.ones(len(P))
        ok = np.ones(len(P), dtype=bool)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        for i in range(self.dim):
            di = D[:, i]
            pi = P[:, i]
            flat = di == 0
            ok &= ~(flat & ((pi < lo[i]) | (pi > hi[i])))
            with np.errstate(divide="ignore", invalid="ignore"):
                ta = (lo[i] - pi) / di
                tb = (hi[i] - pi) / di
            tmin = np.where(flat, -np.inf, np.minimum(ta, tb))
            tmax = np.where(flat, np.inf, np.maximum(ta, tb))
            t0 = np.maximum(t0, tmin)
            t1 = np.minimum(t1, tmax)
        return ok & (t0 <= t1)

    def boundary_distance(self, Z):
        Z = _as_points(Z, self.dim)
        below = np.array(self.lo) - Z
        above = Z - np.array(self.hi)
        excess = np.maximum(np.maximum(below, above), 0.0)
        outside = np.linalg.norm(excess, axis=1)
        inside = np.min(np.minimum(-below, -above), axis=1)
        return np.where(outside > 0, outside, np.maximum(inside, 0.0))

    def polygon(self):
        if self.dim != 2:
            raise ValueError("box polygon only exists in the plane")
        return polygons.box_polygon(self.lo, self.hi)

    def area_within(self, poly):
        return abs(polygons.polygon_area(polygons.clip_convex(poly, self.polygon())))

    def sphere_fraction(self, x, r):
        x = _as_point(x, self.dim)
        if self.dim == 1:
            lo, hi = self.lo[0], self.hi[0]
            return 0.5 * (lo <= x[0] + r <= hi) + 0.5 * (lo <= x[0] - r <= hi)
        if self.dim == 2:
            return _circle_fraction_in_polygon(self.polygon(), x, r)
        raise ValueError("sphere_fraction for boxes is implemented for d <= 2")

    def covariogram(self, z):
        z = np.abs(np.atleast_1d(np.asarray(z, dtype=float)))
        return float(np.prod(np.maximum(self.sides - z, 0.0)))


@dataclass(frozen=True)
class Polygon2D(ConvexBody):
    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise ValueError("a polygon needs at least three vertices")
        V = np.array(verts)
        E = np.roll(V, -1, axis=0) - V
        cross = E[:, 0] * np.roll(E, -1, axis=0)[:, 1] - E[:, 1] * np.roll(E, -1, axis=0)[:, 0]
        if np.any(cross <= 0):
            raise ValueError("polygon vertices must form a strictly convex counter-clockwise chain")

    dim = 2

    @cached_property
    def _halfplanes(self):
        V = np.array(self.vertices)
        W = np.roll(V, -1, axis=0)
        E = W - V
        N = np.column_stack([E[:, 1], -E[:, 0]])
        L = np.linalg.norm(N, axis=1)
        N = N / L[:, None]
        return N, np.sum(N * V, axis=1)

    def volume(self):
        return polygons.polygon_area(list(self.vertices))

    def surface_area(self):
        V = np.array(self.vertices)
        return float(np.sum(np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1)))

    @cached_property
    def _chebyshev(self):
        # maximise r subject to n_i . c + r <= b_i
        N, b = self._halfplanes
        A = np.column_stack([N, np.ones(len(b))])
        res = linprog([0, 0, -1], A_ub=A, b_ub=b, bounds=[(None, None), (None, None), (0, None)])
        if not res.success:
            raise RuntimeError(f"Chebyshev centre LP failed: {res.message}")
        return (float(res.x[0]), float(res.x[1])), float(res.x[2])

    @property
    def center(self):
        """Chebyshev centre, the centre of the largest inscribed disk."""
        return self._chebyshev[0]

    @cached_property
    def _enclosing(self):
        return _min_enclosing_circle(np.array(self.vertices))

    def radii(self):
        return (self._chebyshev[1], self._enclosing[1])

    def bbox(self):
        V = np.array(self.vertices)
        return V.min(axis=0), V.max(axis=0)

    def contains_points(self, Z):
        Z = _as_points(Z, 2)
        N, b = self._halfplanes
        return np.all(Z @ N.T <= b, axis=1)

    def segments_hit(self, P, Q):
        # Cyrus-Beck: clip the parameter interval against every edge half-plane
        P = _as_points(P, 2)
        Q = _as_points(Q, 2)
        N, b = self._halfplanes
        D = Q - P
        t0 = np.zeros(len(P))
        t1 = np.ones(len(P))
        ok = np.ones(len(P), dtype=bool)
        for n, bi in zip(N, b):
            num = bi - P @ n
            den = D @ n
            flat = den == 0
            ok &= ~(flat & (num < 0))
            with np.errstate(divide="ignore", invalid="ignore"):
                t = num / den
            t1 = np.where(~flat & (den > 0), np.minimum(t1, t), t1)
            t0 = np.where(~flat & (den < 0), np.maximum(t0, t), t0)
        return ok & (t0 <= t1)

    def boundary_distance(self, Z):
        Z = _as_points(Z, 2)
        V = np.array(self.vertices)
        W = np.roll(V, -1, axis=0)
        best = np.full(len(Z), np.inf)
        for a, b in zip(V, W):
            e = b - a
            t = np.clip((Z - a) @ e / (e @ e), 0.0, 1.0)
            best = np.minimum(best, np.linalg.norm(Z - a - t[:, None] * e, axis=1))
        return best

    def area_within(self, poly):
        return abs(polygons.polygon_area(polygons.clip_convex(poly, list(self.vertices))))

    def sphere_fraction(self, x, r):
        return _circle_fraction_in_polygon(list(self.vertices), _as_point(x, 2), r)

    def covariogram(self, z):
        z = np.asarray(z, dtype=float)
        shifted = [(x + z[0], y + z[1]) for x, y in self.vertices]
        return abs(polygons.polygon_area(polygons.clip_convex(list(self.vertices), shifted)))


Body = Union[Ball, Box, Polygon2D]


@dataclass(frozen=True)
class Segment:
    x: tuple
    y: tuple

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        y = tuple(float(v) for v in np.atleast_1d(self.y))
        if len(x) != len(y):
            raise ValueError("segment endpoints differ in dimension")
        if x == y:
            raise ValueError("segment endpoints must differ")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def _circle_fraction_in_polygon(poly, x, r):
    """Fraction of the circle S(x, r) inside a convex CCW polygon."""
    cx, cy = float(x[0]), float(x[1])
    angles = [0.0, 2 * math.pi]
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i][0] - cx, poly[i][1] - cy
        bx, by = poly[(i + 1) % n][0] - cx, poly[(i + 1) % n][1] - cy
        dx, dy = bx - ax, by - ay
        qa = dx * dx + dy * dy
        qb = ax * dx + ay * dy
        qc = ax * ax + ay * ay - r * r
        disc = qb * qb - qa * qc
        if disc < 0:
            continue
        sq = math.sqrt(disc)
        for t in ((-qb - sq) / qa, (-qb + sq) / qa):
            if 0.0 <= t <= 1.0:
                angles.append(math.atan2(ay + t * dy, ax + t * dx) % (2 * math.pi))
    angles.sort()
    N, b = _polygon_halfplanes(poly)
    inside = 0.0
    for a0, a1 in zip(angles[:-1], angles[1:]):
        if a1 - a0 <= 0.0:
            continue
        m = 0.5 * (a0 + a1)
        p = np.array([cx + r * math.cos(m), cy + r * math.sin(m)])
        if np.all(N @ p <= b):
            inside += a1 - a0
    return inside / (2 * math.pi)


def _polygon_halfplanes(poly):
    V = np.asarray(poly, dtype=float)
    E = np.roll(V, -1, axis=0) - V
    N = np.column_stack([E[:, 1], -E[:, 0]])
    return N, np.sum(N * V, axis=1)


def _circle_from(points):
    if len(points) == 1:
        return points[0], 0.0
    if len(points) == 2:
        c = 0.5 * (points[0] + points[1])
        return c, float(np.linalg.norm(points[0] - c))
    a, b, c = points
    d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if abs(d) < EPS:
        pairs = [(a, b), (a, c), (b, c)]
        return max((_circle_from([p, q]) for p, q in pairs), key=lambda t: t[1])
    aa, bb, cc = a @ a, b @ b, c @ c
    ux = (aa * (b[1] - c[1]) + bb * (c[1] - a[1]) + cc * (a[1] - b[1])) / d
    uy = (aa * (c[0] - b[0]) + bb * (a[0] - c[0]) + cc * (b[0] - a[0])) / d
    u = np.array([ux, uy])
    return u, float(np.linalg.norm(a - u))


def _min_enclosing_circle(V):
    """Smallest enclosing circle by exhaustive search over pairs and triples."""
    n = len(V)
    best = (None, np.inf)
    tol = 1e-12
    cands = []
    for i in range(n):
        for j in range(i + 1, n):
            cands.append(_circle_from([V[i], V[j]]))
            for k in range(j + 1, n):
                cands.append(_circle_from([V[i], V[j], V[k]]))
    for c, r in cands:
        if r < best[1] and np.all(np.linalg.norm(V - c, axis=1) <= r * (1 + tol) + tol):
            best = (c, r)
    return tuple(float(v) for v in best[0]), best[1]


# module-level spellings of the body operations


def volume(K: ConvexBody) -> float:
    return K.volume()


def surface_area(K: ConvexBody) -> float:
    return K.surface_area()


def radii(K: ConvexBody) -> tuple[float, float]:
    """Return ``(inradius, circumradius)``."""
    return K.radii()


def contains(K: ConvexBody, z) -> bool:
    return K.contains(z)


def n_K(K: ConvexBody, s: Segment) -> int:
    """``2*1([x,y] ∩ K != ∅) - 1(x ∈ K) - 1(y ∈ K)``; lies in {0, 1, 2} for convex K."""
    P = np.array([s.x])
    Q = np.array([s.y])
    return int(n_K_many(K, P, Q)[0])


def n_K_many(K: ConvexBody, P, Q) -> np.ndarray:
    P = _as_points(P, K.dim)
    Q = _as_points(Q, K.dim)
    hit = K.segments_hit(P, Q)
    return 2 * hit.astype(int) - K.contains_points(P).astype(int) - K.contains_points(Q).astype(int)


def bounding_window(K: ConvexBody, rho: float) -> Window:
    """Axis-aligned box containing the parallel body ``K + rho B^d``."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    lo, hi = K.bbox()
    return Window(tuple(lo - rho), tuple(hi + rho))


def parse_body(text: str, dim: int | None = None) -> ConvexBody:
    """Parse ``ball:<r>[@c1,c2,...]``, ``box:<a0,b0;a1,b1;...>`` or ``poly:<x,y;...>``.

    ``dim`` is required for balls given without a centre.
    """
    kind, sep, rest = text.strip().partition(":")
    if not sep or not rest:
        raise ValueError(f"unknown body spec {text!r}")
    kind = kind.lower()
    try:
        if kind == "ball":
            r, _, c = rest.partition("@")
            if c:
                center = tuple(float(v) for v in c.split(","))
                if dim is not None and len(center) != dim:
                    raise ValueError(f"ball centre has dimension {len(center)}, expected {dim}")
            else:
                if dim is None:
                    raise ValueError("ball without centre needs an explicit dimension")
                center = (0.0,) * dim
            return Ball(center, float(r))
        if kind == "box":
            ranges = [tuple(float(v) for v in part.split(",")) for part in rest.split(";")]
            if any(len(p) != 2 for p in ranges):
                raise ValueError("box ranges are lo,hi pairs")
            box = Box(tuple(p[0] for p in ranges), tuple(p[1] for p in ranges))
            if dim is not None and box.dim != dim:
                raise ValueError(f"box has dimension {box.dim}, expected {dim}")
            return box
        if kind == "poly":
            verts = [tuple(float(v) for v in part.split(",")) for part in rest.split(";")]
            if dim not in (None, 2):
                raise ValueError("polygons are planar")
            return Polygon2D(tuple(verts))
    except ValueError as exc:
        raise ValueError(f"bad body spec {text!r}: {exc}") from None
    raise ValueError(f"unknown body kind {kind!r} in {text!r}")


def format_body(K: ConvexBody) -> str:
    """Inverse of :func:`parse_body`."""

    def num(v):
        return repr(float(v))

    if isinstance(K, Ball):
        return f"ball:{num(K.radius)}@" + ",".join(num(v) for v in K.center)
    if isinstance(K, Box):
        return "box:" + ";".join(f"{num(a)},{num(b)}" for a, b in zip(K.lo, K.hi))
    if isinstance(K, Polygon2D):
        return "poly:" + ";".join(f"{num(x)},{num(y)}" for x, y in K.vertices)
    raise TypeError(f"not a body: {K!r}")


def square_with_perimeter(perimeter: float) -> Box:
    s = perimeter / 4
    return Box((0.0, 0.0), (s, s))


def disk_with_perimeter(perimeter: float) -> Ball:
    return Ball((0.0, 0.0), perimeter / (2 * math.pi))


def as_points(Z, d: int) -> np.ndarray:
    return _as_points(Z, d)


def rotate_polygon(vertices: Sequence, angle: float, shift=(0.0, 0.0)) -> Polygon2D:
    """Rigidly move a polygon: rotate about the origin, then translate."""
    c, s = math.cos(angle), math.sin(angle)
    return Polygon2D(
        tuple((c * x - s * y + shift[0], s * x + c * y + shift[1]) for x, y in vertices)
    )
