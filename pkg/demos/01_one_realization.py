"""One Poisson realization around the unit square, three ways of measuring it.

Exact cells, the boundary-only exact path and hit-or-miss sampling should all
agree on the area of the approximation and of the symmetric difference.
"""

import numpy as np

from pvapprox import Box, exact_cells_2d, exact_volumes_2d, mc_volumes, sample_poisson
from pvapprox.geometry import bounding_window
from pvapprox.polygons import polygon_area

K = Box.unit(2)
lam = 300.0
W = bounding_window(K, 0.4)
X = sample_poisson(lam, W, seed=2024)
print(f"{len(X)} nuclei in a window of area {W.volume:.2f} (expected {lam * W.volume:.0f})")

# every cell, clipped to the window
full = exact_cells_2d(X, K)
areas = np.array([polygon_area(c) for _, c in full.cells])
print(f"cells cover {areas.sum():.12f} of {W.volume:.12f}")

# only cells near the boundary of K matter for the two volumes
fast = exact_volumes_2d(X, K)
print(f"V(v_X(K))     exact {full.vol_approx:.6f}  boundary-only {fast.vol_approx:.6f}")
print(f"V(K sym diff) exact {full.vol_symdiff:.6f}  boundary-only {fast.vol_symdiff:.6f}")
print(f"uncertified cells: {fast.n_uncertified}")

# nearest-nucleus sampling, no cells at all
est = mc_volumes(X, K, 200_000, seed=1)
print(f"MC: {est.vol_approx:.4f} +- {est.std_error_approx:.4f}, {est.vol_symdiff:.4f} +- {est.std_error_symdiff:.4f}")
