"""Small-polygon kernels used by the exact two-dimensional paths.

Polygons are plain lists of ``(x, y)`` tuples in counter-clockwise order.
Voronoi cells have a handful of vertices, so pure-Python loops beat numpy
call overhead here.
"""

import math


def polygon_area(poly):
    """Signed shoelace area (positive for counter-clockwise input)."""
    n = len(poly)
    if n < 3:
        return 0.0
    s = 0.0
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        s += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return 0.5 * s


def clip_halfplane(poly, a, b, c):
    """Clip a convex polygon to the half-plane ``a*x + b*y <= c``.

    One Sutherland-Hodgman pass. Returns an empty list when nothing is left.
    """
    if not poly:
        return []
    out = []
    px, py = poly[-1]
    pv = a * px + b * py - c
    for qx, qy in poly:
        qv = a * qx + b * qy - c
        if qv <= 0.0:
            if pv > 0.0:
                t = pv / (pv - qv)
                out.append((px + t * (qx - px), py + t * (qy - py)))
            out.append((qx, qy))
        elif pv <= 0.0:
            t = pv / (pv - qv)
            out.append((px + t * (qx - px), py + t * (qy - py)))
        px, py, pv = qx, qy, qv
    if len(out) < 3:
        return []
    return out


def clip_bisector(poly, x, y):
    """Keep the part of ``poly`` at least as close to ``x`` as to ``y``."""
    a = y[0] - x[0]
    b = y[1] - x[1]
    c = 0.5 * (y[0] * y[0] + y[1] * y[1] - x[0] * x[0] - x[1] * x[1])
    return clip_halfplane(poly, a, b, c)


def clip_convex(poly, clip):
    """Intersect ``poly`` with a convex counter-clockwise polygon ``clip``."""
    out = poly
    n = len(clip)
    for i in range(n):
        x0, y0 = clip[i]
        x1, y1 = clip[(i + 1) % n]
        # interior is to the left of each directed edge
        a = y1 - y0
        b = x0 - x1
        out = clip_halfplane(out, a, b, a * x0 + b * y0)
        if not out:
            return []
    return out


def box_polygon(lo, hi):
    return [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]


def _segment_circle_area(ax, ay, bx, by, r):
    """Signed area of disk(0, r) intersected with triangle (0, a, b)."""
    dx = bx - ax
    dy = by - ay
    qa = dx * dx + dy * dy
    if qa == 0.0:
        return 0.0
    qb = ax * dx + ay * dy
    qc = ax * ax + ay * ay - r * r
    disc = qb * qb - qa * qc
    ts = [0.0]
    if disc > 0.0:
        sq = math.sqrt(disc)
        for t in ((-qb - sq) / qa, (-qb + sq) / qa):
            if 0.0 < t < 1.0:
                ts.append(t)
    ts.append(1.0)
    total = 0.0
    for t0, t1 in zip(ts[:-1], ts[1:]):
        p0x, p0y = ax + t0 * dx, ay + t0 * dy
        p1x, p1y = ax + t1 * dx, ay + t1 * dy
        tm = 0.5 * (t0 + t1)
        mx, my = ax + tm * dx, ay + tm * dy
        if mx * mx + my * my <= r * r:
            total += 0.5 * (p0x * p1y - p1x * p0y)
        else:
            ang = math.atan2(p0x * p1y - p1x * p0y, p0x * p1x + p0y * p1y)
            total += 0.5 * r * r * ang
    return total


def circle_polygon_area(poly, center, radius):
    """Area of a disk intersected with a simple counter-clockwise polygon."""
    cx, cy = center
    n = len(poly)
    if n < 3:
        return 0.0
    r2 = radius * radius
    # exact early outs keep disjoint and contained cases free of rounding noise
    if all((x - cx) ** 2 + (y - cy) ** 2 <= r2 for x, y in poly):
        return polygon_area(poly)
    if _outside_disk(poly, cx, cy, r2):
        return 0.0
    s = 0.0
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        s += _segment_circle_area(ax - cx, ay - cy, bx - cx, by - cy, radius)
    return s


def _outside_disk(poly, cx, cy, r2):
    """True when a convex CCW polygon and the open disk do not meet."""
    n = len(poly)
    inside = True
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        dx, dy = bx - ax, by - ay
        px, py = cx - ax, cy - ay
        if dx * py - dy * px < 0:
            inside = False
        L = dx * dx + dy * dy
        t = 0.0 if L == 0 else min(1.0, max(0.0, (px * dx + py * dy) / L))
        qx, qy = px - t * dx, py - t * dy
        if qx * qx + qy * qy < r2:
            return False
    return not inside
