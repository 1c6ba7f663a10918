"""Variance of both volume functionals against intensity, on a log-log scale.

The fitted slopes land near -1.5 = -(1 + 1/d); the SVG is written next to
this script.
"""

from pathlib import Path

from pvapprox import Ball
from pvapprox.cli import scan_svg
from pvapprox.stats import Estimator, scaling_fit, simulate

K = Ball.unit(2)
lams = [50, 100, 200, 400]
ests = [Estimator("vol_approx"), Estimator("vol_symdiff")]
series = {"vol_approx": [], "vol_symdiff": []}
for j, lam in enumerate(lams):
    res = simulate(ests, K, lam, 300, 11 + j)
    for name, s in res.items():
        series[name].append((lam, s.variance))
        print(f"lambda {lam:4d}  {name:12s} var {s.variance:.3e}  (invalid {s.invalid_count})")

fits = {name: scaling_fit(pts) for name, pts in series.items()}
for name, f in fits.items():
    print(f"{name}: slope {f.slope:.3f}, R2 {f.r_squared:.4f}")

out = Path(__file__).with_name("variance_scaling.svg")
out.write_text(scan_svg(fits, series, 2, "variance scaling, unit disk"))
print(f"wrote {out}")
