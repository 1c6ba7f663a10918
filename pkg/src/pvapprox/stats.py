"""Replication engine, closed-form evaluators and statistical comparisons.

Replicate ``i`` of a run with master seed ``s`` draws everything from the
stream ``derive_seed(s, i)``; results are aggregated in index order with
compensated sums, so a run is reproducible whether or not it is parallel.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gamma

from . import polygons
from .geometry import Ball, Box, ConvexBody, Polygon2D, Window, bounding_window, unit_ball_volume
from .process import (
    NoPoints,
    PointConfig,
    buffer_radius,
    derive_seed,
    nearest_many,
    sample_poisson,
)
from .voronoi import (
    MAX_UNCERTIFIED_FRACTION,
    EdgeFunctional,
    PlanarTessellation,
    cells_1d,
    classify_many,
    edge_functional,
    exact_volumes_2d,
    mc_volumes,
    uncertified_cells,
)

FUNCTIONALS = ("vol_approx", "vol_symdiff", "point_count", "edge_sum", "constant")

# local window margin for exact planar paths, in units of lambda^(-1/d)
EXACT_MARGIN = 8.0


# --- sample moments ----------------------------------------------------------


@dataclass(frozen=True)
class ReplicateStats:
    n: int
    mean: float
    variance: float
    std_error: float
    min: float
    max: float
    invalid_count: int = 0
    variance_se: float = 0.0
    values: np.ndarray = field(default=None, repr=False, compare=False)

    @classmethod
    def from_values(cls, values, invalid_count: int = 0) -> "ReplicateStats":
        v = np.asarray(values, dtype=float)
        n = len(v)
        if n < 2:
            raise ValueError("need at least two replicates for a variance")
        mean = math.fsum(v) / n
        dev = v - mean
        m2 = math.fsum(dev * dev)
        var = m2 / (n - 1)
        m4 = math.fsum(dev**4) / n
        # standard error of the unbiased sample variance
        var_se = math.sqrt(max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n)
        return cls(
            n=n,
            mean=mean,
            variance=var,
            std_error=math.sqrt(var / n),
            min=float(v.min()),
            max=float(v.max()),
            invalid_count=int(invalid_count),
            variance_se=var_se,
            values=v,
        )


def combined_se(*ses) -> float:
    return math.sqrt(math.fsum(s * s for s in ses))


def ratio_se(a, se_a, b, se_b) -> float:
    """Delta-method standard error of ``a / b`` for independent estimates."""
    return abs(a / b) * math.sqrt((se_a / a) ** 2 + (se_b / b) ** 2)


# --- closed forms ------------------------------------------------------------


@dataclass(frozen=True)
class TheoryBracket:
    main_value: float
    lower: float
    upper: float

    def contains(self, value, slack=0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


def symdiff_constant(d: int) -> float:
    """``c_E = (2/d) kappa_d^(-1/d) kappa_(d-1) Gamma(1/d)``."""
    return 2.0 / d * unit_ball_volume(d) ** (-1.0 / d) * unit_ball_volume(d - 1) * gamma(1.0 / d)


def symdiff_delta_max(d: int, inradius: float) -> float:
    return (d - 1) / (2.0 * d) * unit_ball_volume(d) ** (-1.0 / d) * gamma(1.0 / d) / inradius


def theory_symdiff_mean(K: ConvexBody, intensity: float) -> TheoryBracket:
    """Closed-form bracket for ``E V(K Δ v_X(K))``.

    ``main = c_E lambda^(-1/d) S(K)`` and the correction factor
    ``1 - lambda^(-1/d) Delta`` has ``0 <= Delta <= Delta_max``.
    """
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    d = K.dim
    main = symdiff_constant(d) * intensity ** (-1.0 / d) * K.surface_area()
    lower = main * (1.0 - intensity ** (-1.0 / d) * symdiff_delta_max(d, K.radii()[0]))
    return TheoryBracket(float(main), float(lower), float(main))


def symdiff_mean_halfspace(K: ConvexBody, intensity: float) -> float:
    """Leading term of ``E V(K Δ v_X(K))`` from a flat-boundary computation.

    Per unit of boundary, ``λ ∫ |z_1| exp(-λ κ_d |z|^d) dz`` equals
    ``(2/d²) κ_(d-1) κ_d^(-1) (λ κ_d)^(-1/d) Γ(1/d)``; multiply by ``S(K)``.
    """
    d = K.dim
    kd = unit_ball_volume(d)
    per_area = 2.0 / d**2 * unit_ball_volume(d - 1) / kd * (intensity * kd) ** (-1.0 / d) * gamma(1.0 / d)
    return per_area * K.surface_area()


def symdiff_mean_exact(K: ConvexBody, intensity: float, tol: float = 1e-9) -> float:
    """``E V(K Δ v_X(K))`` on the full space by quadrature.

    Uses ``2λ ∫_{R^d \\ K} ∫_K exp(-λ κ_d |x-y|^d) dy dx
    = 2λ ∫ (V(K) - g_K(z)) exp(-λ κ_d |z|^d) dz`` with ``g_K`` the set
    covariogram, integrated in polar coordinates (``d <= 2``).
    """
    d = K.dim
    kd = unit_ball_volume(d)
    VK = K.volume()
    rmax = 2 * K.radii()[1]

    def weight(r):
        return 2 * intensity * math.exp(-intensity * kd * r**d)

    if d == 1:
        def f(r):
            return weight(r) * 2 * (VK - K.covariogram([r]))
    elif d == 2:
        if isinstance(K, Ball):
            def angular(r):
                return 2 * math.pi * (VK - K.covariogram([r, 0.0]))
        elif isinstance(K, Box):
            a, b = K.sides

            def F(t, r):
                return a * b * t + a * r * math.cos(t) - b * r * math.sin(t) + 0.5 * r * r * math.sin(t) ** 2

            def angular(r):
                # per quadrant the overlap (a - r cos t)(b - r sin t) is positive on [t1, t2]
                t1 = math.acos(min(1.0, a / r)) if r > 0 else 0.0
                t2 = math.asin(min(1.0, b / r)) if r > 0 else math.pi / 2
                overlap = F(t2, r) - F(t1, r) if t2 > t1 else 0.0
                return 4 * (VK * math.pi / 2 - overlap)
        else:
            def angular(r):
                val, _ = integrate.quad(
                    lambda t: VK - K.covariogram([r * math.cos(t), r * math.sin(t)]),
                    0, 2 * math.pi, epsrel=tol, limit=200,
                )
                return val

        def f(r):
            return weight(r) * angular(r) * r
    else:
        raise ValueError("symdiff_mean_exact is implemented for d <= 2")
    scale = (intensity * kd) ** (-1.0 / d)
    upper = min(rmax, 60 * scale)
    val, _ = integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=tol, limit=400,
                            points=[p for p in (scale, 5 * scale) if p < upper] or None)
    if upper >= rmax:
        # past the diameter the covariogram vanishes and the tail is closed form
        if d == 1:
            val += 2 * VK * math.exp(-2 * intensity * rmax)
        else:
            val += 2 * VK * math.exp(-intensity * kd * rmax**2)
    return val


def c_prime(d: int) -> float:
    """Exponent constant ``2^-4 3^(-2d) d^(-d-1/2)`` of the concentration bound."""
    return 2.0**-4 * 3.0 ** (-2 * d) * d ** (-d - 0.5)


def theory_tail_bound(K: ConvexBody, intensity: float, t: float, k: int = 2, cK: float = 1.0) -> float:
    """Concentration bound for either volume functional at deviation ``t``.

    ``cK exp(-c'_d t^2 (k ln λ)^(-1-1/d) λ^(1+1/d) S(K)^-1) + 16 sqrt(d) λ^(1-k) S(K)``,
    clamped to ``[0, 1]``. ``cK`` has no closed form and must be supplied.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if t < 0:
        raise ValueError("t must be non-negative")
    d = K.dim
    S = K.surface_area()
    expo = c_prime(d) * t * t * (k * math.log(intensity)) ** (-1 - 1 / d) * intensity ** (1 + 1 / d) / S
    bound = cK * math.exp(-expo) + 16 * math.sqrt(d) * intensity ** (1 - k) * S
    return min(max(bound, 0.0), 1.0)


# --- functionals ---------------------------------------------------------------


@dataclass(frozen=True)
class Estimator:
    """A named scalar functional of one realization.

    ``method`` is ``"mc"`` (hit-or-miss over the window), ``"exact"`` (interval
    or cell geometry, ``d <= 2``) or ``"auto"`` (exact where available).
    ``region`` is the counting set for ``point_count`` (defaults to the body);
    ``edge`` the weight for ``edge_sum``.
    """

    name: str
    method: str = "auto"
    n_samples: int = 100_000
    region: ConvexBody | None = None
    edge: EdgeFunctional | None = None
    value: float = 0.0

    def __post_init__(self):
        if self.name not in FUNCTIONALS:
            raise ValueError(f"unknown functional {self.name!r}; choose from {FUNCTIONALS}")
        if self.method not in ("mc", "exact", "auto"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.name == "edge_sum" and self.edge is None:
            object.__setattr__(self, "edge", EdgeFunctional.constant_one())

    def resolved_method(self, d: int) -> str:
        if self.method == "auto":
            return "exact" if d <= 2 else "mc"
        if self.method == "exact" and d > 2:
            raise ValueError("exact volumes exist only for d <= 2")
        return self.method


def as_estimator(f) -> Estimator:
    return f if isinstance(f, Estimator) else Estimator(f)


def default_rho(K: ConvexBody, intensity: float, k: int, local: bool) -> float:
    rho = buffer_radius(intensity, K.dim, k)
    if local and K.dim == 2:
        rho = min(rho, EXACT_MARGIN * intensity ** (-1.0 / K.dim))
    return rho


def replicate_window(K, intensity, estimators, k=3, rho=None) -> Window:
    if rho is None:
        local = all(
            e.name in ("edge_sum", "constant") or (e.name in ("vol_approx", "vol_symdiff") and e.resolved_method(K.dim) == "exact")
            for e in estimators
        )
        rho = default_rho(K, intensity, k, local)
    return bounding_window(K, rho)


def _exact_1d_checked(config, K):
    """Exact 1-D volumes plus a count of boundary cells clipped by the window."""
    lo, hi = K.bbox()
    a, b = float(lo[0]), float(hi[0])
    x, left, right = cells_1d(config)
    inK = (x >= a) & (x <= b)
    length = right - left
    inside = np.maximum(0.0, np.minimum(right, b) - np.maximum(left, a))
    gain = length - inside
    delta = np.where(inK, gain, inside)
    n = len(x)
    # only the two end cells can gain or lose ground to points beyond the window
    clipped = np.zeros(n, dtype=bool)
    clipped[0] = True
    clipped[-1] = True
    inside_w = a >= config.window.lo[0] and b <= config.window.hi[0]
    n_unc = int(np.count_nonzero(clipped & (inK if inside_w else delta > 0)))
    vol = float(np.sum(length[inK]))
    sym = float(np.sum(gain[inK]) + (b - a) - np.sum(inside[inK]))
    return vol, sym, n_unc


def evaluate(estimators, config: PointConfig, K: ConvexBody, rng) -> tuple[list, bool]:
    """Evaluate each estimator on one realization; returns ``(values, valid)``."""
    values = []
    valid = True
    cache = {}
    for e in estimators:
        if e.name == "constant":
            values.append(e.value)
            continue
        if e.name == "point_count":
            values.append(float(config.count_in(e.region or K)))
            continue
        if len(config) == 0:
            return [math.nan] * len(estimators), False
        if e.name == "edge_sum":
            tess = cache.get("tess") or PlanarTessellation(config)
            cache["tess"] = tess
            s = edge_functional(config, K, e.edge, tess=tess)
            valid &= s.n_excluded == 0
            values.append(s.value)
            continue
        method = e.resolved_method(K.dim)
        key = (method, e.n_samples)
        if key not in cache:
            if method == "mc":
                est = mc_volumes(config, K, e.n_samples, rng)
                cache[key] = (est.vol_approx, est.vol_symdiff, est.valid)
            elif K.dim == 1:
                vol, sym, n_unc = _exact_1d_checked(config, K)
                cache[key] = (vol, sym, n_unc == 0)
            else:
                tess = cache.get("tess") or PlanarTessellation(config)
                cache["tess"] = tess
                ev = exact_volumes_2d(config, K, tess=tess)
                cache[key] = (ev.vol_approx, ev.vol_symdiff, ev.valid)
        vol, sym, ok = cache[key]
        valid &= ok
        values.append(vol if e.name == "vol_approx" else sym)
    return values, valid


def _replicate_chunk(args):
    estimators, K, intensity, window, master_seed, indices = args
    out = []
    for i in indices:
        rng = np.random.default_rng(derive_seed(master_seed, i))
        config = sample_poisson(intensity, window, rng)
        vals, ok = evaluate(estimators, config, K, rng)
        out.append((vals, ok))
    return out


def worker_count() -> int:
    env = os.environ.get("PVAPPROX_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def replicate_values(estimators, K, intensity, R, master_seed, window, workers=None, offset=0):
    """Raw per-replicate values ``(R, len(estimators))`` and validity flags."""
    estimators = [as_estimator(e) for e in estimators]
    idx = list(range(offset, offset + R))
    workers = worker_count() if workers is None else workers
    if workers <= 1 or R < 8:
        rows = _replicate_chunk((estimators, K, intensity, window, master_seed, idx))
    else:
        chunks = [idx[j::workers] for j in range(workers)]
        rows_by = {}
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for chunk, res in zip(chunks, ex.map(_replicate_chunk, [(estimators, K, intensity, window, master_seed, c) for c in chunks])):
                rows_by.update(zip(chunk, res))
        rows = [rows_by[i] for i in idx]
    vals = np.array([r[0] for r in rows], dtype=float).reshape(R, len(estimators))
    ok = np.array([r[1] for r in rows], dtype=bool)
    return vals, ok


def simulate(estimators, K: ConvexBody, intensity: float, R: int, master_seed: int, *, k=3, rho=None, window=None, workers=None):
    """Replicate several functionals on shared realizations.

    Returns a dict mapping estimator name to :class:`ReplicateStats`. Invalid
    replicates (certification failures) are dropped and counted.
    """
    if R < 2:
        raise ValueError("need at least two replicates")
    estimators = [as_estimator(e) for e in estimators]
    W = window or replicate_window(K, intensity, estimators, k, rho)
    vals, ok = replicate_values(estimators, K, intensity, R, master_seed, W, workers)
    n_bad = int(np.count_nonzero(~ok))
    if n_bad == R:
        raise RuntimeError("all replicates were invalid; enlarge the window")
    out = {}
    for j, e in enumerate(estimators):
        out[e.name] = ReplicateStats.from_values(vals[ok, j], n_bad)
    return out


def run_replicates(functional, K: ConvexBody, intensity: float, R: int, master_seed: int, **kw) -> ReplicateStats:
    """Sample moments of one functional over ``R`` independent realizations."""
    est = as_estimator(functional)
    return simulate([est], K, intensity, R, master_seed, **kw)[est.name]


# --- jackknife -----------------------------------------------------------------


def _loo_1d(config, K, name):
    lo, hi = K.bbox()
    a, b = float(lo[0]), float(hi[0])
    x, left, right = cells_1d(config)
    n = len(x)
    if n < 2:
        return 0.0
    inK = ((x >= a) & (x <= b)).astype(float)
    # the removed cell splits at the midpoint of its two neighbours
    prev_in = np.concatenate([[np.nan], inK[:-1]])
    next_in = np.concatenate([inK[1:], [np.nan]])
    split = np.empty(n)
    split[1:-1] = 0.5 * (x[:-2] + x[2:])
    split[0] = left[0]
    split[-1] = right[-1]

    def piece_change(p0, p1, new_in):
        length = p1 - p0
        ink = np.maximum(0.0, np.minimum(p1, b) - np.maximum(p0, a))
        if name == "vol_approx":
            return length * (new_in - inK)
        return ink * ((1 - new_in) - (1 - inK)) + (length - ink) * (new_in - inK)

    diff = np.zeros(n)
    has_prev = np.arange(n) > 0
    has_next = np.arange(n) < n - 1
    lp = np.where(has_prev, piece_change(left, split, np.nan_to_num(prev_in)), 0.0)
    rp = np.where(has_next, piece_change(split, right, np.nan_to_num(next_in)), 0.0)
    diff = lp + rp
    return math.fsum(diff * diff)


def _loo_2d(config, K, name, tess=None):
    tess = tess or PlanarTessellation(config)
    P = config.points
    inK = K.contains_points(P)
    nb_in = np.zeros(len(P), dtype=int)
    deg = np.diff(tess.indptr)
    src = np.repeat(np.arange(len(P)), deg)
    np.add.at(nb_in, src, inK[tess.nbrs].astype(int))
    mixed = np.flatnonzero(np.where(inK, nb_in < deg, nb_in > 0))
    total = []
    n_unc = 0
    for i in mixed:
        cell = tess.cell(i)
        x_in = bool(inK[i])
        nb = tess.neighbors(i)
        change = 0.0
        for j in nb:
            if bool(inK[j]) == x_in:
                continue
            yj = (float(P[j, 0]), float(P[j, 1]))
            piece = cell
            for m in nb:
                if m == j:
                    continue
                piece = polygons.clip_bisector(piece, yj, (float(P[m, 0]), float(P[m, 1])))
                if not piece:
                    break
            if not piece:
                continue
            area = polygons.polygon_area(piece)
            aK = K.area_within(piece)
            sign = 1.0 if not x_in else -1.0  # new owner membership minus old
            if name == "vol_approx":
                change += sign * area
            else:
                change += sign * ((area - aK) - aK)
        if not tess.certified[i] and (change != 0.0 or x_in):
            n_unc += 1
        total.append(change * change)
    return math.fsum(total), n_unc + uncertified_cells(tess, K, inK)


def _loo_mc(config, K, name, n_samples, rng):
    W = config.window
    Z = W.uniform(rng, n_samples)
    if len(config) < 2:
        return 0.0
    dist, idx = config.index.query(Z, k=2)
    near, second = idx[:, 0], idx[:, 1]
    inK_pts = K.contains_points(config.points)
    zK = K.contains_points(Z)
    old = inK_pts[near]
    new = inK_pts[second]
    if name == "vol_approx":
        delta = new.astype(float) - old
    else:
        delta = (new != zK).astype(float) - (old != zK)
    per_point = np.bincount(near, weights=delta, minlength=len(config)) * (W.volume / n_samples)
    return math.fsum(per_point * per_point)


def jackknife_rhs(config: PointConfig, K: ConvexBody, functional, rng=None, return_certified=False):
    """One realization of ``Σ_{x∈X} (S(X \\ {x}) - S(X))^2``.

    Volume functionals only change where the removed nucleus owned space, and
    that space passes to its Delaunay neighbours (second-nearest nuclei in the
    Monte Carlo version).
    """
    est = as_estimator(functional)
    ok = True
    if est.name == "constant":
        val = 0.0
    elif est.name == "point_count":
        if len(config) == 0:
            val = 0.0
        else:
            diffs = -(est.region or K).contains_points(config.points).astype(float)
            val = math.fsum(diffs * diffs)
    elif est.name in ("vol_approx", "vol_symdiff"):
        if len(config) == 0:
            raise NoPoints("empty realization")
        method = est.resolved_method(K.dim)
        if method == "mc":
            rng = rng if rng is not None else np.random.default_rng(config.seed)
            val = _loo_mc(config, K, est.name, est.n_samples, rng)
        elif K.dim == 1:
            val = _loo_1d(config, K, est.name)
            ok = _exact_1d_checked(config, K)[2] == 0
        else:
            val, n_unc = _loo_2d(config, K, est.name)
            ok = n_unc == 0
    else:
        raise ValueError(f"jackknife is not available for {est.name!r}")
    return (val, ok) if return_certified else val


@dataclass(frozen=True)
class JackknifeCheck:
    functional: str
    variance: ReplicateStats  # replicate moments of S(X)
    rhs: ReplicateStats  # replicate moments of the leave-one-out sum

    @property
    def margin_se(self):
        """``(mean rhs - variance)`` in units of the combined standard error."""
        se = combined_se(self.rhs.std_error, self.variance.variance_se)
        return (self.rhs.mean - self.variance.variance) / se


def _jk_chunk(args):
    est, K, intensity, window, master_seed, indices = args
    rows = []
    for i in indices:
        rng = np.random.default_rng(derive_seed(master_seed, i))
        config = sample_poisson(intensity, window, rng)
        (s,), ok = evaluate([est], config, K, rng)
        if len(config) == 0:
            rows.append((math.nan, math.nan, False))
            continue
        rhs, ok2 = jackknife_rhs(config, K, est, rng=rng, return_certified=True)
        rows.append((s, rhs, ok and ok2))
    return rows


def jackknife_check(functional, K, intensity, R, master_seed, *, k=3, rho=None, window=None) -> JackknifeCheck:
    """Replicate ``S(X)`` and its leave-one-out sum on the same realizations."""
    est = as_estimator(functional)
    W = window or replicate_window(K, intensity, [est], k, rho)
    rows = _jk_chunk((est, K, intensity, W, master_seed, range(R)))
    arr = np.array(rows, dtype=float)
    ok = arr[:, 2].astype(bool)
    n_bad = int(np.count_nonzero(~ok))
    return JackknifeCheck(
        est.name,
        ReplicateStats.from_values(arr[ok, 0], n_bad),
        ReplicateStats.from_values(arr[ok, 1], n_bad),
    )


# --- scaling fits ----------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple

    def predict(self, intensity):
        return math.exp(self.intercept) * intensity**self.slope


def scaling_fit(points) -> ScalingFit:
    """Least squares of ``ln(value)`` on ``ln(lambda)``."""
    pts = [(float(l), float(v)) for l, v in points]
    lam = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    if len(np.unique(lam)) < 2:
        raise ValueError("need at least two distinct intensities")
    if np.any(val <= 0) or np.any(lam <= 0):
        raise ValueError("values and intensities must be positive for a log-log fit")
    x = np.log(lam)
    y = np.log(val)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, intercept])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), tuple(pts))


# --- single versus averaged realizations ------------------------------------------


@dataclass(frozen=True)
class JeulinResult:
    var_single: float
    var_averaged: float
    ratio: float
    ratio_se: float
    single: ReplicateStats
    averaged: ReplicateStats


def jeulin_compare(intensity0: float, k: int, K: ConvexBody, R: int, seed: int, *, functional="vol_approx", workers=None) -> JeulinResult:
    """Variance of one run at ``k * intensity0`` against the mean of ``k`` runs at ``intensity0``.

    Group ``j`` of the averaged estimator uses streams ``j*k .. j*k + k - 1``;
    the single estimator uses stream ``j``. For ``k = 1`` both coincide.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    est = as_estimator(functional)
    W_single = replicate_window(K, k * intensity0, [est])
    single_vals, ok_s = replicate_values([est], K, k * intensity0, R, seed, W_single, workers)
    W_avg = replicate_window(K, intensity0, [est])
    avg_vals, ok_a = replicate_values([est], K, intensity0, R * k, seed, W_avg, workers)
    avg_vals = avg_vals.reshape(R, k)
    ok_a = ok_a.reshape(R, k).all(axis=1)
    single = ReplicateStats.from_values(single_vals[ok_s, 0], int(np.count_nonzero(~ok_s)))
    averaged = ReplicateStats.from_values(avg_vals[ok_a].mean(axis=1), int(np.count_nonzero(~ok_a)))
    ratio = single.variance / averaged.variance
    return JeulinResult(
        single.variance,
        averaged.variance,
        ratio,
        ratio_se(single.variance, single.variance_se, averaged.variance, averaged.variance_se),
        single,
        averaged,
    )


# --- tails -------------------------------------------------------------------------


@dataclass(frozen=True)
class TailCurve:
    t: np.ndarray
    exceedance: np.ndarray
    half_width: np.ndarray
    n: int


def tail_empirical(values, center: float, scale: float, t_grid, z: float = 1.96) -> TailCurve:
    """Frequencies of ``|value - center| >= t * scale`` with Wilson half-widths."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values")
    n = v.size
    t = np.asarray(t_grid, dtype=float)
    dev = np.abs(v - center)
    p = np.array([np.count_nonzero(dev >= ti * scale) / n for ti in t])
    denom = 1 + z * z / n
    half = z / denom * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return TailCurve(t, p, half, n)


def concentration_scale(K: ConvexBody, intensity: float) -> float:
    """Natural deviation unit ``sqrt(lambda^(-1-1/d) S(K))``."""
    d = K.dim
    return math.sqrt(intensity ** (-1 - 1 / d) * K.surface_area())
