"""Poisson-Voronoi approximation of convex bodies: simulation and checks."""

from .geometry import (
    Ball,
    Box,
    ConvexBody,
    Polygon2D,
    Segment,
    Window,
    bounding_window,
    contains,
    n_K,
    parse_body,
    radii,
    surface_area,
    unit_ball_volume,
    volume,
)
from .process import (
    NoPoints,
    PointConfig,
    buffer_radius,
    certify,
    derive_seed,
    nearest,
    sample_poisson,
)
from .voronoi import (
    Classification,
    EdgeFunctional,
    VolumeEstimate,
    classify,
    coverage_probability,
    delaunay_2d,
    edge_functional,
    exact_1d,
    exact_cells_2d,
    exact_volumes_2d,
    mc_volumes,
)

__version__ = "0.1.0"
