"""Vectorised plane-geometry primitives.

Every function accepts coordinates as numpy arrays (or floats) of a common
shape and returns arrays of that shape, so the solver can evaluate a whole
batch of candidate configurations at once.  Functions that can fail return a
boolean ``bad`` mask instead of raising.
"""

from __future__ import annotations

import numpy as np

EPS_LENGTH = 1e-12
EPS_CROSS = 1e-9


def norm(dx, dy):
    return np.hypot(dx, dy)


def rotate(dx, dy, degrees):
    rad = np.radians(degrees)
    c, s = np.cos(rad), np.sin(rad)
    return dx * c - dy * s, dx * s + dy * c


def point_on_line(ax, ay, bx, by, t):
    x = ax + t * (bx - ax)
    y = ay + t * (by - ay)
    bad = norm(bx - ax, by - ay) < EPS_LENGTH
    return x, y, bad


def line_intersection(ax, ay, bx, by, cx, cy, dx, dy):
    """Intersection of infinite lines AB and CD; parallel lines are bad."""
    rx, ry = bx - ax, by - ay
    sx, sy = dx - cx, dy - cy
    cross = rx * sy - ry * sx
    bad = np.abs(cross) < EPS_CROSS
    safe = np.where(bad, 1.0, cross)
    t = ((cx - ax) * sy - (cy - ay) * sx) / safe
    return ax + t * rx, ay + t * ry, bad


def perpendicular_foot(px, py, ax, ay, bx, by):
    rx, ry = bx - ax, by - ay
    den = rx * rx + ry * ry
    bad = np.sqrt(den) < EPS_LENGTH
    t = ((px - ax) * rx + (py - ay) * ry) / np.where(bad, 1.0, den)
    return ax + t * rx, ay + t * ry, bad


def point_on_circle(ox, oy, r, degrees):
    rad = np.radians(degrees)
    return ox + r * np.cos(rad), oy + r * np.sin(rad)


def polar_angle(ox, oy, px, py):
    """Direction of P seen from O, degrees in [0, 360)."""
    return np.mod(np.degrees(np.arctan2(py - oy, px - ox)), 360.0)


def tangent_point(ox, oy, r, px, py, branch):
    """Point of tangency of a tangent from external point P.

    ``branch`` (+1/-1) picks one of the two tangents.  P on or inside the
    circle is bad.
    """
    d = norm(px - ox, py - oy)
    bad = d <= r * (1.0 + 1e-12)
    ratio = np.clip(r / np.where(bad, 1.0, d), -1.0, 1.0)
    beta = np.degrees(np.arccos(ratio))
    ux, uy = (px - ox), (py - oy)
    scale = r / np.where(d < EPS_LENGTH, 1.0, d)
    vx, vy = rotate(ux * scale, uy * scale, branch * beta)
    return ox + vx, oy + vy, bad


def incenter(ax, ay, bx, by, cx, cy):
    a = norm(cx - bx, cy - by)
    b = norm(ax - cx, ay - cy)
    c = norm(bx - ax, by - ay)
    per = a + b + c
    bad = per < EPS_LENGTH
    safe = np.where(bad, 1.0, per)
    return (a * ax + b * bx + c * cx) / safe, (a * ay + b * by + c * cy) / safe, bad


def inradius(ax, ay, bx, by, cx, cy):
    a = norm(cx - bx, cy - by)
    b = norm(ax - cx, ay - cy)
    c = norm(bx - ax, by - ay)
    per = a + b + c
    area2 = np.abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))
    return area2 / np.where(per < EPS_LENGTH, 1.0, per)


def angle_at(ax, ay, vx, vy, cx, cy):
    """Angle AVC in degrees in [0, 180]; zero-length rays give (0, bad)."""
    ux, uy = ax - vx, ay - vy
    wx, wy = cx - vx, cy - vy
    nu, nw = norm(ux, uy), norm(wx, wy)
    bad = (nu <= EPS_LENGTH) | (nw <= EPS_LENGTH)
    # atan2 keeps full precision near 0 and 180 degrees, unlike arccos
    deg = np.degrees(np.arctan2(np.abs(ux * wy - uy * wx), ux * wx + uy * wy))
    return np.where(bad, 0.0, deg), bad


def direction_angle(ax, ay, bx, by, cx, cy, dx, dy):
    """Angle in [0, 180] between direction vectors AB and CD."""
    return angle_at(ax + (bx - ax), ay + (by - ay), ax, ay, ax + (dx - cx), ay + (dy - cy))


def point_line_distance(px, py, ax, ay, bx, by):
    rx, ry = bx - ax, by - ay
    n = norm(rx, ry)
    bad = n < EPS_LENGTH
    dist = np.abs(rx * (py - ay) - ry * (px - ax)) / np.where(bad, 1.0, n)
    return np.where(bad, norm(px - ax, py - ay), dist), bad


def point_segment_distance(px, py, ax, ay, bx, by):
    rx, ry = bx - ax, by - ay
    den = rx * rx + ry * ry
    t = np.clip(((px - ax) * rx + (py - ay) * ry) / np.where(den == 0, 1.0, den), 0.0, 1.0)
    return norm(px - (ax + t * rx), py - (ay + t * ry))


def point_in_polygon(px, py, xs, ys, tol=1e-9):
    """Even-odd test; points within ``tol`` of an edge count as inside."""
    n = len(xs)
    inside = np.zeros(np.broadcast(px, py).shape, dtype=bool)
    on_edge = np.zeros_like(inside)
    for i in range(n):
        ax, ay = xs[i], ys[i]
        bx, by = xs[(i + 1) % n], ys[(i + 1) % n]
        crosses = (ay > py) != (by > py)
        dy = np.where(by == ay, 1.0, by - ay)
        x_at = ax + (py - ay) * (bx - ax) / dy
        inside ^= crosses & (px < x_at)
        on_edge |= point_segment_distance(px, py, ax, ay, bx, by) <= tol
    return inside | on_edge
