import math

import numpy as np
import pytest

from pvapprox import polygons
from pvapprox.geometry import Ball, Box, Polygon2D, Window, bounding_window
from pvapprox.process import NoPoints, PointConfig, derive_seed, sample_poisson
from pvapprox.voronoi import (
    EdgeFunctional,
    PlanarTessellation,
    classify,
    coverage_frequency,
    coverage_probability,
    edge_functional,
    exact_1d,
    exact_cells_2d,
    exact_volumes_2d,
    mc_volumes,
    write_cells_csv,
)

LINE_CFG = PointConfig([[-0.3], [0.2], [0.6], [1.2]], Window((-0.75,), (1.75,)), 1.0)
INTERVAL = Box([0.0], [1.0])
SQUARE = Box.unit(2)


def test_classify_examples():
    c = classify(LINE_CFG, INTERVAL, [0.5])
    assert c.in_approx
    c = classify(LINE_CFG, INTERVAL, [0.95])
    assert not c.in_approx
    one = PointConfig([(0.5, 0.5)], Window((-1, -1), (2, 2)), 1.0)
    for z in [(0, 0), (1.9, -0.9), (0.5, 0.5)]:
        assert classify(one, SQUARE, z).in_approx


def test_exact_1d_examples():
    vol, sym = exact_1d(LINE_CFG, INTERVAL)
    assert vol == pytest.approx(0.95, abs=1e-12)
    assert sym == pytest.approx(0.15, abs=1e-12)
    W = Window((-1.0,), (2.0,))
    out = PointConfig([[-0.5], [1.5]], W, 1.0)
    assert exact_1d(out, INTERVAL) == (0.0, pytest.approx(1.0))
    inside = PointConfig([[0.2], [0.7]], W, 1.0)
    vol, sym = exact_1d(inside, INTERVAL)
    assert vol == pytest.approx(3.0) and sym == pytest.approx(2.0)


def test_mc_agrees_with_exact_1d():
    est = mc_volumes(LINE_CFG, INTERVAL, 100_000, seed=1)
    assert abs(est.vol_approx - 0.95) < 4 * est.std_error_approx
    assert abs(est.vol_symdiff - 0.15) < 4 * est.std_error_symdiff


def test_mc_all_inside_covers_window():
    cfg = PointConfig([(0.3, 0.3), (0.6, 0.7)], Window((-0.5, -0.5), (1.5, 1.5)), 1.0)
    est = mc_volumes(cfg, SQUARE, 1000, seed=2)
    assert est.vol_approx == cfg.window.volume


def test_mc_standard_error_law():
    cfg = sample_poisson(100, bounding_window(SQUARE, 0.5), 3)
    a = mc_volumes(cfg, SQUARE, 50_000, seed=4)
    b = mc_volumes(cfg, SQUARE, 100_000, seed=5)
    assert a.std_error_approx / b.std_error_approx == pytest.approx(math.sqrt(2), rel=0.05)


def test_mc_errors():
    with pytest.raises(NoPoints):
        mc_volumes(PointConfig(np.empty((0, 2)), Window((0, 0), (1, 1)), 1.0), SQUARE, 10)
    with pytest.raises(ValueError):
        mc_volumes(LINE_CFG, INTERVAL, 0)


def test_exact_cells_small_cases():
    W = Window((0, 0), (1, 1))
    one = exact_cells_2d(PointConfig([(0.3, 0.4)], W, 1.0), SQUARE)
    assert polygons.polygon_area(one.cells[0][1]) == pytest.approx(1.0)
    two = exact_cells_2d(PointConfig([(0.25, 0.5), (0.75, 0.5)], W, 1.0), SQUARE)
    assert [polygons.polygon_area(c) for _, c in two.cells] == [pytest.approx(0.5)] * 2


@pytest.mark.parametrize("seed", range(100))
def test_cells_partition_window(seed):
    W = Window((-0.4, -0.4), (1.4, 1.4))
    cfg = sample_poisson(60, W, derive_seed(17, seed))
    if len(cfg) == 0:
        return
    res = exact_cells_2d(cfg, SQUARE)
    total = math.fsum(polygons.polygon_area(c) for _, c in res.cells)
    assert total == pytest.approx(W.volume, rel=1e-9)


@pytest.mark.parametrize("K", [SQUARE, Ball((0.5, 0.5), 0.5), Polygon2D([(0, 0), (1, 0), (0.3, 1)])])
def test_exact_2d_paths_agree_with_each_other_and_mc(K):
    W = bounding_window(K, 0.3)
    cfg = sample_poisson(150, W, 21)
    full = exact_cells_2d(cfg, K)
    fast = exact_volumes_2d(cfg, K)
    assert fast.vol_approx == pytest.approx(full.vol_approx, rel=1e-9)
    assert fast.vol_symdiff == pytest.approx(full.vol_symdiff, rel=1e-9)
    assert fast.n_uncertified == full.n_uncertified
    mc = mc_volumes(cfg, K, 100_000, seed=22)
    assert abs(mc.vol_approx - full.vol_approx) < 4 * mc.std_error_approx
    assert abs(mc.vol_symdiff - full.vol_symdiff) < 4 * mc.std_error_symdiff


def test_adding_a_point_shrinks_cells():
    W = Window((0, 0), (1, 1))
    cfg = sample_poisson(80, W, 31)
    t0 = PlanarTessellation(cfg)
    w = np.array([[0.41, 0.53]])
    t1 = PlanarTessellation(PointConfig(np.vstack([cfg.points, w]), W, cfg.intensity))
    for i in range(len(cfg)):
        before = t0.cell(i)
        after = t1.cell(i)
        inter = polygons.clip_convex(after, before)
        assert polygons.polygon_area(inter) == pytest.approx(polygons.polygon_area(after), abs=1e-12)


def test_edge_functional_zero_inside():
    rng = np.random.default_rng(4)
    pts = rng.uniform(0.2, 0.8, (40, 2))
    cfg = PointConfig(pts, Window((-1, -1), (2, 2)), 1.0)
    s = edge_functional(cfg, SQUARE, EdgeFunctional.constant_one())
    assert s.value == 0 and s.n_crossing == 0


def test_edge_functional_matches_direct_n_K_sum():
    from pvapprox.geometry import Segment, n_K

    cfg = sample_poisson(100, bounding_window(SQUARE, 0.5), 41)
    tess = PlanarTessellation(cfg)
    half = EdgeFunctional.user_scalar(lambda c, idx: np.full(len(idx), 0.5), alpha=0.0)
    s = edge_functional(cfg, SQUARE, half, tess=tess)
    direct = sum(n_K(SQUARE, Segment(tuple(cfg.points[i]), tuple(cfg.points[j]))) for i, j in tess.tri.edges)
    assert s.n_excluded == 0
    assert s.value == pytest.approx(direct)
    one = edge_functional(cfg, SQUARE, EdgeFunctional.constant_one(), tess=tess)
    assert one.value == pytest.approx(2 * direct)


def test_edge_functional_weights():
    cfg = sample_poisson(100, bounding_window(SQUARE, 0.5), 42)
    s = edge_functional(cfg, SQUARE, EdgeFunctional.cell_volume_squared())
    assert s.value > 0
    with pytest.raises(ValueError):
        EdgeFunctional("constant_one", 1.0)
    with pytest.raises(ValueError):
        EdgeFunctional("bogus", 0.0)
    with pytest.raises(ValueError):
        EdgeFunctional.user_scalar(None, 1.0)


def test_edge_functional_motion_invariance():
    from pvapprox.geometry import rotate_polygon
    from pvapprox.stats import Estimator, run_replicates

    sq = Polygon2D([(0, 0), (1, 0), (1, 1), (0, 1)])
    moved = rotate_polygon(sq.vertices, 0.6, shift=(2.3, -1.1))
    a = run_replicates(Estimator("edge_sum"), sq, 100, 1000, 51)
    b = run_replicates(Estimator("edge_sum"), moved, 100, 1000, 52)
    assert abs(a.mean - b.mean) < 4 * math.hypot(a.std_error, b.std_error)


def test_coverage_quadrature_symmetry_and_decay():
    K = Ball.unit(2)
    vals = [coverage_probability(K, (1.2 * math.cos(t), 1.2 * math.sin(t)), 10) for t in (0, 0.7, 2.0, 4.0)]
    assert max(vals) - min(vals) < 1e-6 * max(vals)
    far = [coverage_probability(K, (r, 0), 10) for r in (1.1, 1.3, 1.6, 2.0, 3.0)]
    assert all(a > b for a, b in zip(far, far[1:]))
    assert far[-1] < 1e-10


def test_coverage_inside_has_tail_bound():
    p, tail, r_cut = coverage_probability(Ball.unit(2), (0.5, 0.0), 10, tol=1e-6, full_output=True)
    assert 0 < p < 1
    assert tail <= 1e-6 * p
    with pytest.raises(ValueError):
        coverage_probability(Box.unit(3), (0.5, 0.5, 0.5), 10)


def test_coverage_matches_frequency_polygon():
    K = Polygon2D([(0, 0), (1, 0), (0, 1)])
    x = (0.7, 0.7)
    p = coverage_probability(K, x, 20)
    freq, n = coverage_frequency(K, x, 20, 20_000, 61)
    assert abs(freq - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_coverage_matches_frequency_line():
    x = (1.05,)
    p = coverage_probability(INTERVAL, x, 30)
    freq, n = coverage_frequency(INTERVAL, x, 30, 20_000, 62)
    assert abs(freq - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_write_cells_csv(tmp_path):
    res = exact_cells_2d(sample_poisson(20, Window((0, 0), (1, 1)), 71), SQUARE)
    path = tmp_path / "cells.csv"
    write_cells_csv(res.cells, path)
    lines = path.read_text().splitlines()
    assert len(lines) == len(res.cells) + 1
    first = lines[1].split(",")
    assert int(first[2]) * 2 + 3 == len(first)
