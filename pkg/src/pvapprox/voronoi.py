"""Poisson-Voronoi approximation of a convex body.

A point ``z`` belongs to the approximation ``v_X(K)`` exactly when its
nearest nucleus lies in ``K``. Every Monte Carlo path here is a nearest
neighbour query; the exact paths (``d = 1`` intervals, ``d = 2`` cells) clip
cells against bisectors of Delaunay neighbours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import polygons
from .delaunay import Triangulation, delaunay_2d
from .geometry import Ball, Box, ConvexBody, Polygon2D, as_points, unit_ball_volume
from .process import NoPoints, PointConfig, nearest_many

# replicate is flagged invalid above this uncertified-query fraction
MAX_UNCERTIFIED_FRACTION = 1e-3


@dataclass(frozen=True)
class Classification:
    in_approx: bool
    certified: bool


@dataclass(frozen=True)
class VolumeEstimate:
    vol_approx: float
    vol_symdiff: float
    std_error_approx: float
    std_error_symdiff: float
    n_samples: int
    uncertified_fraction: float

    @property
    def valid(self) -> bool:
        return self.uncertified_fraction <= MAX_UNCERTIFIED_FRACTION


def body_inside_window(K: ConvexBody, W) -> bool:
    lo, hi = K.bbox()
    return bool(np.all(lo >= W.lo) and np.all(hi <= W.hi))


def classify_many(config: PointConfig, K: ConvexBody, Z):
    """Vectorised membership in ``v_X(K)`` with per-query certificates.

    A query is certified when its nearest-distance ball lies in the window, or
    when its nucleus is outside ``K`` and ``K`` lies in the window: any unseen
    nucleus is then outside ``K`` too, so the answer cannot flip.
    """
    Z = as_points(Z, config.dim)
    idx, dist = nearest_many(config, Z)
    in_approx = K.contains_points(config.points[idx])
    certified = config.window.contains_balls(Z, dist)
    if body_inside_window(K, config.window):
        certified |= ~in_approx
    return in_approx, certified


def classify(config: PointConfig, K: ConvexBody, z) -> Classification:
    z = np.asarray(z, dtype=float).reshape(1, -1)
    ins, cert = classify_many(config, K, z)
    return Classification(bool(ins[0]), bool(cert[0]))


def mc_volumes(config: PointConfig, K: ConvexBody, n_samples: int = 100_000, seed=None) -> VolumeEstimate:
    """Hit-or-miss estimates of ``V(v_X(K))`` and ``V(K Δ v_X(K))`` over the window."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if len(config) == 0:
        raise NoPoints("empty realization")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    W = config.window
    Z = W.uniform(rng, n_samples)
    ins, cert = classify_many(config, K, Z)
    sym = ins != K.contains_points(Z)
    vw = W.volume
    p_in = ins.mean()
    p_sym = sym.mean()
    return VolumeEstimate(
        vol_approx=vw * p_in,
        vol_symdiff=vw * p_sym,
        std_error_approx=vw * math.sqrt(p_in * (1 - p_in) / n_samples),
        std_error_symdiff=vw * math.sqrt(p_sym * (1 - p_sym) / n_samples),
        n_samples=n_samples,
        uncertified_fraction=float(1.0 - cert.mean()),
    )


def _interval(K):
    if K.dim != 1:
        raise ValueError("exact_1d needs a one-dimensional body")
    lo, hi = K.bbox()
    return float(lo[0]), float(hi[0])


def _overlap(a0, a1, b0, b1):
    return np.maximum(0.0, np.minimum(a1, b1) - np.maximum(a0, b0))


def cells_1d(config: PointConfig):
    """Sorted nuclei and their midpoint cells ``[left, right]`` clipped to the window."""
    if config.dim != 1:
        raise ValueError("cells_1d needs a one-dimensional configuration")
    if len(config) == 0:
        raise NoPoints("empty realization")
    x = np.sort(config.points[:, 0])
    mids = 0.5 * (x[:-1] + x[1:])
    left = np.concatenate([[config.window.lo[0]], mids])
    right = np.concatenate([mids, [config.window.hi[0]]])
    return x, left, right


def exact_1d(config: PointConfig, K: ConvexBody):
    """Exact ``(V(v_X(K) ∩ W), V(K Δ v_X(K)))`` on the line."""
    a, b = _interval(K)
    x, left, right = cells_1d(config)
    inK = (x >= a) & (x <= b)
    length = right - left
    inside = _overlap(left, right, a, b)
    vol = float(np.sum(length[inK]))
    sym = float(np.sum(length[inK] - inside[inK]) + (b - a) - np.sum(inside[inK]))
    return vol, sym


# --- exact planar cells ----------------------------------------------------


class PlanarTessellation:
    """Delaunay-backed access to the Voronoi cells of a planar realization.

    A cell is *certified* when every Delaunay triangle around its nucleus has
    its empty circumdisk inside the window; then no point outside the window
    could alter the cell.
    """

    def __init__(self, config: PointConfig):
        if config.dim != 2:
            raise ValueError("planar tessellation needs d = 2")
        if len(config) == 0:
            raise NoPoints("empty realization")
        self.config = config
        self.points = config.points
        self.tri: Triangulation = delaunay_2d(config)
        self.indptr, self.nbrs = self.tri.neighbors()
        n = len(self.points)
        self.cell_radius = np.full(n, np.inf)
        self.certified = np.zeros(n, dtype=bool)
        if len(self.tri.triangles):
            centres, radii = self.tri.circumcircles()
            tri_ok = config.window.contains_balls(centres, radii)
            self.tri_ok = tri_ok
            rad = np.zeros(n)
            ok = np.ones(n, dtype=bool)
            for k in range(3):
                np.maximum.at(rad, self.tri.triangles[:, k], radii)
                np.logical_and.at(ok, self.tri.triangles[:, k], tri_ok)
            on_hull = np.zeros(n, dtype=bool)
            on_hull[self.tri.hull] = True
            self.cell_radius = np.where(on_hull, np.inf, rad)
            self.certified = ok & ~on_hull
        else:
            self.tri_ok = np.zeros(0, dtype=bool)
        self._wpoly = config.window.polygon()
        self._cells = {}

    def neighbors(self, i):
        return self.nbrs[self.indptr[i] : self.indptr[i + 1]]

    def cell(self, i):
        """Voronoi cell of nucleus ``i`` clipped to the window (CCW vertex list)."""
        c = self._cells.get(i)
        if c is not None:
            return c
        x = self.points[i]
        nb = self.neighbors(i)
        if len(nb):
            d = np.sum((self.points[nb] - x) ** 2, axis=1)
            nb = nb[np.argsort(d, kind="stable")]
        poly = self._wpoly
        xt = (float(x[0]), float(x[1]))
        for j in nb:
            y = self.points[j]
            poly = polygons.clip_bisector(poly, xt, (float(y[0]), float(y[1])))
            if not poly:
                break
        self._cells[i] = poly
        return poly

    def cell_area(self, i):
        return polygons.polygon_area(self.cell(i))

    def boundary_candidates(self, K: ConvexBody):
        """Nuclei whose cell may meet the boundary of ``K``."""
        dist = K.boundary_distance(self.points)
        return np.flatnonzero(dist <= self.cell_radius * (1 + 1e-9) + 1e-12)


def uncertified_cells(tess: PlanarTessellation, K: ConvexBody, inK=None) -> int:
    """Uncertified cells that could change either volume.

    With ``K`` inside the window, unseen nuclei lie outside ``K``, so they can
    only alter the answer on cells whose nucleus is in ``K``. Otherwise every
    uncertified cell near the boundary of ``K`` counts.
    """
    if inK is None:
        inK = K.contains_points(tess.points)
    if body_inside_window(K, tess.config.window):
        return int(np.count_nonzero(~tess.certified & inK))
    cand = tess.boundary_candidates(K)
    return int(np.count_nonzero(~tess.certified[cand]))


@dataclass(frozen=True)
class ExactCells2D:
    cells: list  # (nucleus, polygon) pairs
    vol_approx: float
    vol_symdiff: float
    n_uncertified: int


@dataclass(frozen=True)
class ExactVolumes:
    vol_approx: float
    vol_symdiff: float
    n_uncertified: int

    @property
    def valid(self):
        return self.n_uncertified == 0


def exact_cells_2d(config: PointConfig, K: ConvexBody) -> ExactCells2D:
    """Every Voronoi cell clipped to the window, plus the exact two volumes.

    ``V(v_X(K) \\ K) = Σ_{x∈K} area(cell) - area(cell ∩ K)`` and
    ``V(K \\ v_X(K)) = V(K) - Σ_{x∈K} area(cell ∩ K)``.
    """
    if K.dim != 2:
        raise ValueError("exact_cells_2d needs a planar body")
    tess = PlanarTessellation(config)
    inK = K.contains_points(config.points)
    cells = []
    area_in = 0.0
    area_in_K = 0.0
    for i in range(len(config)):
        poly = tess.cell(i)
        cells.append((config.points[i].copy(), poly))
        if inK[i]:
            area_in += polygons.polygon_area(poly)
            area_in_K += K.area_within(poly)
    n_unc = uncertified_cells(tess, K, inK)
    vol = area_in
    sym = (area_in - area_in_K) + (K.volume() - area_in_K)
    return ExactCells2D(cells, vol, sym, n_unc)


def exact_volumes_2d(config: PointConfig, K: ConvexBody, tess: PlanarTessellation | None = None) -> ExactVolumes:
    """Exact volumes touching only cells near the boundary of ``K``.

    Cells that miss the boundary sit wholly inside or outside ``K`` and do not
    change either volume relative to ``V(K)``. Agrees with
    :func:`exact_cells_2d` whenever ``K`` lies inside the window.
    """
    if K.dim != 2:
        raise ValueError("exact_volumes_2d needs a planar body")
    tess = tess or PlanarTessellation(config)
    cand = tess.boundary_candidates(K)
    inK = K.contains_points(config.points[cand]) if len(cand) else np.zeros(0, bool)
    gain = 0.0
    loss = 0.0
    for i, ink in zip(cand, inK):
        poly = tess.cell(i)
        a_K = K.area_within(poly)
        if ink:
            delta = polygons.polygon_area(poly) - a_K
            gain += delta
        else:
            delta = a_K
            loss += delta
    n_unc = uncertified_cells(tess, K)
    return ExactVolumes(K.volume() + gain - loss, gain + loss, n_unc)


def write_cells_csv(cells, path_or_file):
    """``nucleus_x,nucleus_y,vertex_count,x1,y1,...`` rows."""
    if not hasattr(path_or_file, "write"):
        with open(path_or_file, "w", newline="") as fh:
            return write_cells_csv(cells, fh)
    fh = path_or_file
    fh.write("nucleus_x,nucleus_y,vertex_count,vertices\n")
    for nucleus, poly in cells:
        parts = [repr(float(nucleus[0])), repr(float(nucleus[1])), str(len(poly))]
        for vx, vy in poly:
            parts += [repr(float(vx)), repr(float(vy))]
        fh.write(",".join(parts) + "\n")


# --- Delaunay edge functionals ---------------------------------------------


@dataclass(frozen=True)
class EdgeFunctional:
    """Weight ``f(X, x)`` attached to each endpoint of a Delaunay edge.

    ``func`` (user weights only) receives ``(config, indices)`` and returns one
    non-negative weight per index. ``alpha`` is the scaling degree
    ``f(tX, tx) = t^alpha f(X, x)``.
    """

    weight_kind: str
    alpha: float
    func: Callable | None = None

    def __post_init__(self):
        builtin = {"constant_one": 0.0, "cell_volume_squared": None}
        if self.weight_kind in builtin:
            expected = builtin[self.weight_kind]
            if expected is not None and self.alpha != expected:
                raise ValueError("constant_one has alpha = 0")
        elif self.weight_kind == "user_scalar":
            if self.func is None:
                raise ValueError("user_scalar weights need a function")
        else:
            raise ValueError(f"unknown weight kind {self.weight_kind!r}")

    @classmethod
    def constant_one(cls):
        return cls("constant_one", 0.0)

    @classmethod
    def cell_volume_squared(cls, dim: int = 2):
        return cls("cell_volume_squared", 2.0 * dim)

    @classmethod
    def user_scalar(cls, func, alpha: float):
        return cls("user_scalar", float(alpha), func)


@dataclass(frozen=True)
class EdgeSample:
    value: float
    n_crossing: int
    n_excluded: int


def edge_certificates(tri: Triangulation, tri_ok: np.ndarray) -> np.ndarray:
    """An edge is certified when an adjacent triangle has its circumdisk in the window."""
    if len(tri.triangles) == 0:
        return np.zeros(len(tri.edges), dtype=bool)
    t = tri.triangles
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    e.sort(axis=1)
    ok = np.tile(tri_ok, 3)
    n = tri.n_points
    keys = e[:, 0] * n + e[:, 1]
    ekeys = tri.edges[:, 0] * n + tri.edges[:, 1]
    pos = np.searchsorted(ekeys, keys)
    out = np.zeros(len(tri.edges), dtype=bool)
    np.logical_or.at(out, pos, ok)
    return out


def edge_functional(config: PointConfig, K: ConvexBody, f: EdgeFunctional, tess: PlanarTessellation | None = None) -> EdgeSample:
    """One realization of ``Σ_{[x,y]} (f(X,x) + f(X,y)) n_K[x,y]`` over Delaunay edges.

    Edges with ``n_K != 0`` that are not certified are dropped and counted in
    ``n_excluded``.
    """
    if config.dim != 2:
        raise ValueError("edge_functional is implemented for d = 2")
    if len(config) == 0:
        raise NoPoints("empty realization")
    tess = tess or PlanarTessellation(config)
    tri = tess.tri
    E = tri.edges
    if len(E) == 0:
        return EdgeSample(0.0, 0, 0)
    P = config.points
    inside = K.contains_points(P).astype(int)
    hit = K.segments_hit(P[E[:, 0]], P[E[:, 1]]).astype(int)
    nk = 2 * hit - inside[E[:, 0]] - inside[E[:, 1]]
    active = np.flatnonzero(nk != 0)
    if len(active) == 0:
        return EdgeSample(0.0, 0, 0)
    cert = edge_certificates(tri, tess.tri_ok)[active]
    keep = active[cert]
    n_excl = int(np.count_nonzero(~cert))
    ends = np.unique(E[keep].ravel())
    if f.weight_kind == "constant_one":
        w = np.ones(len(P))
    else:
        w = np.zeros(len(P))
        if f.weight_kind == "cell_volume_squared":
            w[ends] = [tess.cell_area(i) ** 2 for i in ends]
        else:
            w[ends] = np.asarray(f.func(config, ends), dtype=float)
    total = math.fsum((w[E[keep, 0]] + w[E[keep, 1]]) * nk[keep])
    return EdgeSample(total, len(active), n_excl)


# --- coverage probabilities ------------------------------------------------


def _vertex_distances(K, x):
    if isinstance(K, Polygon2D):
        V = np.array(K.vertices)
    elif isinstance(K, Box) and K.dim == 2:
        V = np.array(K.polygon())
    elif isinstance(K, Box) and K.dim == 1:
        V = np.array([[K.lo[0]], [K.hi[0]]])
    else:
        return []
    return list(np.linalg.norm(V - x, axis=1))


def _far_distance(K, x):
    if isinstance(K, Ball):
        return float(np.linalg.norm(x - np.array(K.center))) + K.radius
    return max(_vertex_distances(K, x))


def coverage_probability(K: ConvexBody, x, intensity: float, tol: float = 1e-6, full_output: bool = False):
    """Probability that ``x`` is on the wrong side of the approximation.

    For ``x ∉ K`` this is ``P(x ∈ v_X(K)) = λ ∫_K exp(-λ κ_d |x-y|^d) dy``; for
    ``x ∈ K`` it is ``P(x ∉ v_X(K))``, the same integral over the complement of
    ``K``. Both are reduced to one radial integral around ``x`` weighted by the
    fraction of the sphere ``S(x, r)`` inside ``K``. The complement integral is
    truncated at ``r_cut`` where the neglected tail ``exp(-λ κ_d r_cut^d)`` is
    below ``tol`` times the value.

    With ``full_output`` returns ``(value, tail_bound, r_cut)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not isinstance(K, (Ball, Box, Polygon2D)):
        raise ValueError(f"unsupported body kind {type(K).__name__}")
    if isinstance(K, Box) and K.dim > 2:
        raise ValueError("box coverage quadrature is implemented for d <= 2")
    d = K.dim
    x = np.asarray(x, dtype=float).reshape(d)
    kappa = unit_ball_volume(d)
    omega = d * kappa
    inside = K.contains(x)
    r0 = float(K.boundary_distance(x[None, :])[0])
    r_far = _far_distance(K, x)
    breaks = sorted({float(v) for v in _vertex_distances(K, x) if r0 < v < r_far})

    def density(r):
        return intensity * math.exp(-intensity * kappa * r**d) * omega * r ** (d - 1)

    def quad(f, a, b, pts):
        if b <= a:
            return 0.0
        pts = [p for p in pts if a < p < b] or None
        val, _ = integrate.quad(f, a, b, points=pts, epsabs=0.0, epsrel=tol, limit=500)
        return val

    if not inside:
        value = quad(lambda r: density(r) * K.sphere_fraction(x, r), r0, r_far, breaks)
        out = (value, 0.0, r_far)
    else:
        def g(r):
            return density(r) * (1.0 - K.sphere_fraction(x, r))

        near = quad(g, r0, r_far, breaks)
        # beyond r_far the whole sphere is outside K; that tail is exp(-λκ r^d)
        target = tol * max(near, 1e-300)
        r_cut = max(r_far, (math.log(1.0 / target) / (intensity * kappa)) ** (1 / d))
        far = quad(density, r_far, r_cut, [])
        tail = math.exp(-intensity * kappa * r_cut**d)
        out = (near + far, tail, r_cut)
    return out if full_output else out[0]


def coverage_frequency(K: ConvexBody, x, intensity: float, n_rep: int, seed, window=None):
    """Monte Carlo frequency of the event estimated by :func:`coverage_probability`.

    Each replicate samples a Poisson realization on ``window`` and classifies
    ``x`` by its nearest nucleus. Returns ``(frequency, n_valid)``; replicates
    with no points or an uncertified answer are skipped.
    """
    from .process import default_window

    d = K.dim
    x = np.asarray(x, dtype=float).reshape(d)
    W = window or default_window(K, intensity)
    rng = np.random.default_rng(seed)
    inside = K.contains(x)
    mean = intensity * W.volume
    lo = np.array(W.lo)
    hi = np.array(W.hi)
    hits = 0
    valid = 0
    for _ in range(n_rep):
        n = rng.poisson(mean)
        if n == 0:
            continue
        pts = rng.uniform(lo, hi, size=(n, d))
        d2 = np.sum((pts - x) ** 2, axis=1)
        j = int(np.argmin(d2))
        r = math.sqrt(d2[j])
        if np.any(x - r < lo) or np.any(x + r > hi):
            continue
        valid += 1
        in_approx = bool(K.contains_points(pts[j : j + 1])[0])
        hits += in_approx != inside
    return hits / max(valid, 1), valid
