"""Stationary Poisson point processes on finite windows.

A realization lives on a finite :class:`~pvapprox.geometry.Window`. Queries
report whether their answer is *certified*: the nearest-distance ball fits in
the window, so no point of the process outside it could have been closer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Window, as_points, bounding_window, unit_ball_volume

MAX_EXPECTED_POINTS = 1e8


class NoPoints(ValueError):
    """Raised when a query needs a nucleus but the realization is empty."""


def derive_seed(master: int, index: int) -> int:
    """64-bit stream seed for replicate ``index`` of ``master``.

    Counter-based: the value depends only on ``(master, index)``, so replicates
    can be evaluated in any order or in parallel.
    """
    ss = np.random.SeedSequence(int(master), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def buffer_radius(intensity: float, dim: int, k: int = 3) -> float:
    """Window buffer ``4 sqrt(d) (k ln(lambda) / lambda)^(1/d)``.

    Boundary-relevant Voronoi structure lives inside this distance of the body
    with probability ``1 - O(lambda^(1-k))``.
    """
    if intensity <= 1:
        raise ValueError("intensity too small for log-based buffer; supply explicit rho")
    if k < 2:
        raise ValueError("k must be at least 2")
    return 4 * math.sqrt(dim) * (k * math.log(intensity) / intensity) ** (1 / dim)


def influence_tail_bound(intensity: float, dim: int, r: float, circumradius: float) -> float:
    """Bound ``2^d r^d exp(-lambda kappa_d (r - sqrt(d) - R_K)^d)`` on P(R' >= r).

    Only meaningful for ``r >= R_K + sqrt(d)``; returns 1 below that.
    """
    gap = r - math.sqrt(dim) - circumradius
    if gap < 0:
        return 1.0
    log_b = dim * math.log(2 * r) - intensity * unit_ball_volume(dim) * gap**dim
    return min(1.0, math.exp(log_b))


def default_window(K, intensity: float, k: int = 3, rho: float | None = None) -> Window:
    if rho is None:
        rho = buffer_radius(intensity, K.dim, k)
    return bounding_window(K, rho)


@dataclass(frozen=True)
class PointConfig:
    """One realization: points, window, intensity and the seed that drew them."""

    points: np.ndarray
    window: Window
    intensity: float
    seed: int | None = None

    def __post_init__(self):
        pts = as_points(np.array(self.points, dtype=float), self.window.dim).copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.window.dim

    def __len__(self):
        return len(self.points)

    @cached_property
    def index(self) -> cKDTree:
        return cKDTree(self.points)

    @cached_property
    def lex_rank(self) -> np.ndarray:
        """Rank of each point in lexicographic order (used for tie breaks)."""
        order = np.lexsort(self.points.T[::-1])
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        return rank

    def count_in(self, body) -> int:
        if len(self.points) == 0:
            return 0
        return int(np.count_nonzero(body.contains_points(self.points)))


def sample_poisson(intensity: float, window: Window, seed, max_expected=MAX_EXPECTED_POINTS):
    """Draw ``N ~ Poisson(lambda V(W))`` i.i.d. uniform points in ``window``.

    ``seed`` may be an integer or a ``numpy.random.Generator``. Identical
    integer seeds reproduce the realization bit for bit.
    """
    if not intensity > 0:
        raise ValueError("intensity must be positive")
    mean = intensity * window.volume
    if mean > max_expected:
        raise MemoryError(
            f"expected {mean:.3g} points exceeds the cap of {max_expected:.3g}"
        )
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = int(rng.poisson(mean))
    pts = window.uniform(rng, n)
    return PointConfig(pts, window, float(intensity), seed if isinstance(seed, int) else None)


def nearest_many(config: PointConfig, Z):
    """Indices and distances of the nearest nucleus for each row of ``Z``.

    Exact ties go to the lexicographically smallest point.
    """
    n = len(config.points)
    if n == 0:
        raise NoPoints("empty realization")
    Z = as_points(Z, config.dim)
    if n == 1:
        dist = np.linalg.norm(Z - config.points[0], axis=1)
        return np.zeros(len(Z), dtype=np.int64), dist
    dist, idx = config.index.query(Z, k=2)
    near, far = idx[:, 0].astype(np.int64), idx[:, 1].astype(np.int64)
    tied = dist[:, 0] == dist[:, 1]
    if np.any(tied):
        rank = config.lex_rank
        for row in np.flatnonzero(tied):
            cand = config.index.query_ball_point(Z[row], dist[row, 0] * (1 + 1e-15) + 1e-300)
            cand = [c for c in cand if np.linalg.norm(config.points[c] - Z[row]) == dist[row, 0]]
            cand = cand or [near[row], far[row]]
            near[row] = min(cand, key=lambda c: rank[c])
    return near, dist[:, 0]


def nearest(config: PointConfig, z):
    """Return ``(point, distance)`` of the nucleus closest to ``z``."""
    idx, dist = nearest_many(config, np.asarray(z, dtype=float).reshape(1, -1))
    return config.points[idx[0]].copy(), float(dist[0])


def certify_many(config: PointConfig, Z, dist=None) -> np.ndarray:
    Z = as_points(Z, config.dim)
    if dist is None:
        _, dist = nearest_many(config, Z)
    return config.window.contains_balls(Z, dist)


def certify(config: PointConfig, z) -> bool:
    """True iff the nearest-distance ball around ``z`` lies inside the window."""
    z = np.asarray(z, dtype=float).reshape(1, -1)
    return bool(certify_many(config, z)[0])


def write_points_csv(config: PointConfig, path_or_file):
    """Dump a realization as ``x1,...,xd`` rows."""
    header = ",".join(f"x{i + 1}" for i in range(config.dim))
    if hasattr(path_or_file, "write"):
        np.savetxt(path_or_file, config.points, delimiter=",", header=header, comments="", fmt="%.17g")
    else:
        with open(path_or_file, "w", newline="") as fh:
            write_points_csv(config, fh)
