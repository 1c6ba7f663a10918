import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvapprox.delaunay import bowyer_watson, delaunay_2d, edge_set, incircle, orient2d, triangulate
from pvapprox.geometry import Window
from pvapprox.process import PointConfig, sample_poisson


def test_small_counts():
    assert len(triangulate([(0, 0), (1, 0), (0, 1)]).edges) == 3
    assert len(triangulate([(0, 0), (1, 0), (1.2, 1), (0, 1)]).edges) == 5


def test_collinear_input_is_a_path():
    tri = triangulate([(0, 0), (2, 2), (1, 1), (3, 3)])
    assert tri.degenerate
    assert {tuple(e) for e in tri.edges} == {(0, 2), (1, 2), (1, 3)}


@pytest.mark.parametrize("seed", range(5))
def test_euler_edge_count(seed):
    cfg = sample_poisson(200, Window((0, 0), (1, 1)), seed)
    tri = delaunay_2d(cfg)
    n, h = len(cfg), len(tri.hull)
    assert len(tri.edges) == 3 * n - 3 - h


@pytest.mark.parametrize("seed", range(5))
def test_bowyer_watson_matches_qhull(seed):
    pts = np.random.default_rng(seed).uniform(0, 1, (80, 2))
    assert edge_set(bowyer_watson(pts)) == {tuple(e) for e in triangulate(pts).edges}


def test_empty_circumcircles():
    pts = np.random.default_rng(9).uniform(0, 1, (150, 2))
    tri = triangulate(pts)
    c, r = tri.circumcircles()
    d = np.linalg.norm(pts[None, :, :] - c[:, None, :], axis=2)
    assert np.all(d >= r[:, None] * (1 - 1e-9))


def test_predicates_exact_on_degenerate_input():
    assert orient2d((0, 0), (1, 1), (2, 2)) == 0
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert incircle((0, 0), (1, 0), (1, 1), (0, 1)) == 0
    assert incircle((0, 0), (1, 0), (0, 1), (0.2, 0.2)) == 1
    # nearly collinear in floating point
    assert orient2d((0.1, 0.1), (0.2, 0.2), (0.30000000000000004, 0.30000000000000004)) == 0


def test_cocircular_lattice_terminates():
    g = np.array([(i, j) for i in range(5) for j in range(5)], dtype=float)
    tris = bowyer_watson(g)
    # a triangulation of a convex point set with 16 boundary points
    assert len(tris) == 2 * 25 - 2 - 16


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=4, max_size=25, unique=True))
def test_neighbors_symmetric(pts):
    P = np.array(pts)
    tri = triangulate(P)
    indptr, nb = tri.neighbors()
    adj = {(i, int(j)) for i in range(len(P)) for j in nb[indptr[i]:indptr[i + 1]]}
    assert all((j, i) in adj for i, j in adj)
    assert len(adj) == 2 * len(tri.edges)


def test_delaunay_rejects_other_dimensions():
    cfg = PointConfig(np.zeros((3, 1)), Window((0,), (1,)), 1.0)
    with pytest.raises(ValueError):
        delaunay_2d(cfg)
