"""Acceptance checks shared by ``pvapprox verify`` and the test suite.

Each check returns a :class:`CheckResult` with a one-line summary. Seeds are
fixed, bands are four standard errors. ``quick=True`` divides replicate
counts by ten for smoke runs; the verdicts are then indicative only.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .delaunay import bowyer_watson, edge_set, triangulate
from .geometry import Ball, Box, Polygon2D, Window, disk_with_perimeter, n_K_many, square_with_perimeter
from .process import PointConfig, certify_many, nearest_many, sample_poisson
from .stats import (
    Estimator,
    combined_se,
    concentration_scale,
    jackknife_check,
    jeulin_compare,
    replicate_values,
    replicate_window,
    run_replicates,
    scaling_fit,
    simulate,
    symdiff_mean_exact,
    tail_empirical,
    theory_symdiff_mean,
)
from .voronoi import EdgeFunctional, coverage_frequency, coverage_probability, exact_cells_2d

BAND = 4.0


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:>2} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _reps(R, quick):
    return max(50, R // 10) if quick else R


def unbiasedness(quick=False):
    R = _reps(2000, quick)
    n = 10_000 if quick else 100_000
    s = run_replicates(Estimator("vol_approx", method="mc", n_samples=n), Box.unit(2), 200, R, 101)
    z = (s.mean - 1.0) / s.std_error
    ok = abs(z) <= BAND
    return ok, f"mean vol_approx {s.mean:.5f} (SE {s.std_error:.1e}, z={z:+.2f}, invalid {s.invalid_count})"


def symdiff_bracket(quick=False):
    R = _reps(2000, quick)
    K = Box.unit(2)
    s = run_replicates(Estimator("vol_symdiff", method="exact"), K, 1000, R, 102)
    b = theory_symdiff_mean(K, 1000)
    ok = b.contains(s.mean, BAND * s.std_error)
    ref = symdiff_mean_exact(K, 1000)
    return ok, (
        f"mean {s.mean:.5f} (SE {s.std_error:.1e}) vs bracket [{b.lower:.5f}, {b.upper:.5f}]; "
        f"quadrature of the exact integral gives {ref:.5f}"
    )


def symdiff_line(quick=False):
    R = _reps(10_000, quick)
    s = run_replicates(Estimator("vol_symdiff", method="exact"), Box([0.0], [1.0]), 100, R, 103)
    target = 2 / 100
    z = (s.mean - target) / s.std_error
    return abs(z) <= BAND, f"mean {s.mean:.5f} vs {target:.5f} (SE {s.std_error:.1e}, z={z:+.1f})"


SCAN_LAMBDAS = (50, 100, 200, 400, 800)


def scan_variances(K, lambdas, R, seed, method="exact", n_samples=100_000):
    """Per-intensity stats for both volume functionals on shared realizations."""
    ests = [Estimator("vol_approx", method=method, n_samples=n_samples), Estimator("vol_symdiff", method=method, n_samples=n_samples)]
    return {lam: simulate(ests, K, lam, R, seed + j) for j, lam in enumerate(lambdas)}


def variance_scaling(quick=False):
    R = _reps(1000, quick)
    table = scan_variances(Box.unit(2), SCAN_LAMBDAS, R, 104)
    parts = []
    ok = True
    for name in ("vol_approx", "vol_symdiff"):
        fit = scaling_fit([(lam, table[lam][name].variance) for lam in SCAN_LAMBDAS])
        ok &= fit.slope <= -1.3 and fit.r_squared >= 0.9
        parts.append(f"{name} slope {fit.slope:.3f} R2 {fit.r_squared:.3f}")
    return ok, "; ".join(parts)


def jackknife(quick=False):
    R = _reps(2000, quick)
    K = Box.unit(2)
    A = Box([0.2, 0.2], [0.7, 0.9])
    a = jackknife_check(Estimator("point_count", region=A), K, 100, R, 105)
    za = a.margin_se
    b = jackknife_check(Estimator("vol_approx", method="exact"), K, 100, R, 106)
    zb = b.margin_se
    ok = abs(za) <= BAND and zb >= -BAND
    return ok, (
        f"(a) X(A) rhs {a.rhs.mean:.2f} vs var {a.variance.variance:.2f} (z={za:+.2f}); "
        f"(b) vol_approx rhs {b.rhs.mean:.3e} vs var {b.variance.variance:.3e} (z={zb:+.1f})"
    )


def coverage(quick=False):
    n = _reps(100_000, quick)
    K = Ball.unit(2)
    x = (1.2, 0.0)
    p = coverage_probability(K, x, 10, tol=1e-6)
    freq, valid = coverage_frequency(K, x, 10, n, 107)
    se = math.sqrt(p * (1 - p) / valid)
    z = (freq - p) / se
    return abs(z) <= BAND, f"quadrature {p:.5f} vs frequency {freq:.5f} over {valid} (z={z:+.2f})"


def _edge_stats(K, lam, R, seed):
    return run_replicates(Estimator("edge_sum", edge=EdgeFunctional.constant_one()), K, lam, R, seed)


def edge_law(quick=False):
    R = _reps(2000, quick)
    disk = disk_with_perimeter(4.0)
    square = square_with_perimeter(4.0)
    sd = _edge_stats(disk, 200, R, 108)
    ss = _edge_stats(square, 200, R, 109)
    za = (sd.mean - ss.mean) / combined_se(sd.std_error, ss.std_error)
    lo = _edge_stats(square, 100, R, 110)
    hi = _edge_stats(square, 400, R, 111)
    ratio = hi.mean / lo.mean
    se = ratio * math.hypot(hi.std_error / hi.mean, lo.std_error / lo.mean)
    zb = (ratio - 2.0) / se
    ok = abs(za) <= BAND and abs(zb) <= BAND
    return ok, f"(a) disk {sd.mean:.2f} vs square {ss.mean:.2f} (z={za:+.2f}); (b) ratio {ratio:.4f} (z={zb:+.2f})"


def jeulin(quick=False):
    R = _reps(2000, quick)
    res = jeulin_compare(100, 4, Box.unit(2), R, 112)
    ok = 0.35 <= res.ratio <= 0.70
    return ok, f"var ratio {res.ratio:.3f} (SE {res.ratio_se:.3f})"


def concentration(quick=False):
    R = _reps(10_000, quick)
    K = Box.unit(2)
    est = Estimator("vol_approx", method="exact")
    W = replicate_window(K, 200, [est])
    vals, ok = replicate_values([est], K, 200, R, 113, W)
    curve = tail_empirical(vals[ok, 0], 1.0, concentration_scale(K, 200), [0, 0.5, 1, 1.5, 2, 2.5, 3])
    mono = bool(np.all(np.diff(curve.exceedance) <= 0))
    p1, p3 = curve.exceedance[2], curve.exceedance[-1]
    passed = mono and p3 < 0.1 and p3 < p1
    return passed, f"P(t=1)={p1:.4f}, P(t=3)={p3:.4f}, non-increasing={mono}"


def deterministic(quick=False):
    rng = np.random.default_rng(114)
    fails = []
    # partition of the window by exact cells
    W = Window((-0.3, -0.3), (1.3, 1.3))
    cfg = sample_poisson(150, W, 7)
    cells = exact_cells_2d(cfg, Box.unit(2))
    from .polygons import polygon_area

    total = math.fsum(polygon_area(c) for _, c in cells.cells)
    if abs(total - W.volume) > 1e-9 * W.volume:
        fails.append("partition")
    # n_K lies in {0, 1, 2} and vanishes for segments with both ends inside
    bodies = [Box.unit(2), Ball((0.5, 0.5), 0.5), Polygon2D([(0, 0), (1, 0), (0, 1)])]
    P = rng.uniform(-1, 2, (100_000, 2))
    Q = rng.uniform(-1, 2, (100_000, 2))
    for K in bodies:
        v = n_K_many(K, P, Q)
        both = K.contains_points(P) & K.contains_points(Q)
        if set(np.unique(v).tolist()) != {0, 1, 2} or np.any(v[both] != 0):
            fails.append("n_K")
    # OLS against the normal equations
    lam = np.array([50.0, 100, 200, 400, 800])
    y = 3.0 * lam**-1.5 * np.exp(rng.normal(0, 0.05, lam.size))
    fit = scaling_fit(zip(lam, y))
    X, Y = np.log(lam), np.log(y)
    sxx = np.sum((X - X.mean()) ** 2)
    slope = np.sum((X - X.mean()) * (Y - Y.mean())) / sxx
    if abs(fit.slope - slope) > 1e-12 * abs(slope):
        fails.append("ols")
    # nearest neighbour against a linear scan
    Z = W.uniform(rng, 500)
    idx, dist = nearest_many(cfg, Z)
    brute = np.sqrt(((Z[:, None, :] - cfg.points[None]) ** 2).sum(-1))
    if not np.array_equal(idx, brute.argmin(1)) or not np.allclose(dist, brute.min(1), rtol=1e-12, atol=0):
        fails.append("nearest")
    # certified answers survive points added outside the window
    big = Window((-1.0, -1.0), (2.0, 2.0))
    extra = big.uniform(rng, rng.poisson(150 * big.volume))
    extra = extra[~W.contains_points(extra)]
    full = PointConfig(np.vstack([cfg.points, extra]), big, 150.0)
    cert = certify_many(cfg, Z)
    idx_full, _ = nearest_many(full, Z)
    if not np.array_equal(idx[cert], idx_full[cert]):
        fails.append("certify")
    # incremental and Qhull triangulations agree on generic input
    pts = rng.uniform(0, 1, (60, 2))
    if edge_set(bowyer_watson(pts)) != {tuple(e) for e in triangulate(pts).edges}:
        fails.append("delaunay")
    ok = not fails
    return ok, "all exact invariants hold" if ok else "failed: " + ", ".join(fails)


CHECKS = {
    1: ("unbiasedness", unbiasedness),
    2: ("symdiff expectation bracket", symdiff_bracket),
    3: ("d=1 symdiff closed form", symdiff_line),
    4: ("variance scaling", variance_scaling),
    5: ("jackknife inequality", jackknife),
    6: ("coverage oracle", coverage),
    7: ("edge valuation law", edge_law),
    8: ("single vs averaged variance", jeulin),
    9: ("concentration shape", concentration),
    10: ("deterministic suite", deterministic),
}


def run_check(number: int, quick: bool = False) -> CheckResult:
    name, fn = CHECKS[number]
    t0 = time.perf_counter()
    ok, detail = fn(quick)
    return CheckResult(number, name, bool(ok), detail, time.perf_counter() - t0)


def run_all(numbers=None, quick=False, echo=None):
    out = []
    for k in numbers or sorted(CHECKS):
        res = run_check(k, quick)
        if echo:
            echo(res.line())
        out.append(res)
    return out
