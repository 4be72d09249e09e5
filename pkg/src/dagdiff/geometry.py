"""Plane geometry: segment intersection, hulls, and exact pixel-lattice tests.

Pixel (row r, col c) has its center at the point (x=c, y=r).  A shape "covers" a
pixel when the pixel center lies in the closed shape; every raster in this
package uses that rule, so the analytic tests here agree with the rasters.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

Point = tuple[float, float]
Box = tuple[float, float, float, float]  # x_min, x_max, y_min, y_max


class DegenerateHull(ValueError):
    """Fewer than three non-collinear points."""


def cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def segment_intersection(p1: Point, p2: Point, q1: Point, q2: Point) -> Point | None:
    """Proper crossing point of two segments, or None.

    Touching at an endpoint and collinear overlap do not count.
    """
    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    if d1 == 0 or d2 == 0 or d3 == 0 or d4 == 0:
        return None
    if (d1 > 0) == (d2 > 0) or (d3 > 0) == (d4 > 0):
        return None
    t = d1 / (d1 - d2)
    return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))


def _segments_touch(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """Closed-segment intersection test, used by the concave hull."""

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    return (
        (d1 == 0 and on_seg(q1, q2, p1))
        or (d2 == 0 and on_seg(q1, q2, p2))
        or (d3 == 0 and on_seg(p1, p2, q1))
        or (d4 == 0 and on_seg(p1, p2, q2))
    )


def _unique(points: Sequence[Point]) -> list[Point]:
    return sorted({(float(x), float(y)) for x, y in points})


def _check_non_degenerate(pts: list[Point]) -> None:
    if len(pts) < 3:
        raise DegenerateHull(f"need 3 distinct points, got {len(pts)}")
    a = pts[0]
    b = pts[-1]
    if all(cross(a, b, p) == 0 for p in pts):
        raise DegenerateHull("all points are collinear")


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Andrew's monotone chain; counter-clockwise in a y-up frame, no repeated vertex."""
    pts = _unique(points)
    _check_non_degenerate(pts)
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def point_in_polygon(p: Point, poly: Sequence[Point]) -> bool:
    """Even-odd test; points on the boundary count as inside."""
    n = len(poly)
    inside = False
    x, y = p
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        if cross(a, b, p) == 0 and min(a[0], b[0]) <= x <= max(a[0], b[0]) and min(a[1], b[1]) <= y <= max(a[1], b[1]):
            return True
        if (a[1] > y) != (b[1] > y):
            xi = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x < xi:
                inside = not inside
    return inside


def _turn_angle(prev_dir: float, a: Point, b: Point) -> float:
    """Clockwise angle from ``prev_dir`` to direction a->b, in [0, 2pi)."""
    ang = math.atan2(b[1] - a[1], b[0] - a[0])
    return (prev_dir - ang) % (2 * math.pi)


def _knn_hull(pts: list[Point], k: int) -> list[Point] | None:
    start = min(pts, key=lambda p: (p[1], p[0]))
    hull = [start]
    current = start
    remaining = [p for p in pts if p != start]
    prev_dir = math.pi  # arriving from the right, sweeping clockwise
    step = 2
    while (current != start or step == 2) and remaining:
        if step == 5:
            remaining.append(start)
        nearest = sorted(remaining, key=lambda p: ((p[0] - current[0]) ** 2 + (p[1] - current[1]) ** 2, p))[:k]
        nearest.sort(key=lambda p: -_turn_angle(prev_dir, current, p))
        chosen = None
        for cand in nearest:
            # closing onto the start may touch the first hull edge, which shares it
            stop = 1 if cand == start else 0
            blocked = False
            for j in range(len(hull) - 2, stop, -1):
                if _segments_touch(current, cand, hull[j - 1], hull[j]):
                    blocked = True
                    break
            if not blocked:
                chosen = cand
                break
        if chosen is None:
            return None
        current = chosen
        if current == start:
            break
        hull.append(current)
        prev_dir = math.atan2(hull[-2][1] - current[1], hull[-2][0] - current[0])
        remaining.remove(current)
        step += 1
    if current != start:
        # ran out of points before closing; closing edge must not cross the chain
        for j in range(len(hull) - 2, 1, -1):
            if _segments_touch(hull[-1], start, hull[j - 1], hull[j]):
                return None
    if len(hull) < 3:
        return None
    if any(not point_in_polygon(p, hull) for p in pts):
        return None
    return hull


def concave_hull(points: Sequence[Point], k: int = 3) -> list[Point]:
    """k-nearest-neighbours concave hull, growing k until a valid polygon appears.

    Falls back to the convex hull when no k below the point count works.
    """
    pts = _unique(points)
    _check_non_degenerate(pts)
    k = max(3, k)
    while k < len(pts):
        hull = _knn_hull(pts, k)
        if hull is not None:
            return hull
        k += 1
    return convex_hull(pts)


def polygon_mask(poly: Sequence[Point], shape: tuple[int, int]) -> np.ndarray:
    """Pixels whose centers lie inside ``poly`` or on its boundary (even-odd rule)."""
    h, w = shape
    mask = np.zeros(shape, dtype=bool)
    pts = np.asarray(poly, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return mask
    r0 = max(math.ceil(pts[:, 1].min()), 0)
    r1 = min(math.floor(pts[:, 1].max()), h - 1)
    if r0 > r1:
        return mask
    a, b = pts, np.roll(pts, -1, axis=0)
    y = np.arange(r0, r1 + 1, dtype=float)[:, None]
    ay, by, ax, bx = a[:, 1], b[:, 1], a[:, 0], b[:, 0]
    sloped = ay != by
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        xi = ax + (y - ay) * (bx - ax) / np.where(sloped, by - ay, 1.0)
    # crossing-number parity: a pixel at column c is inside when an odd number
    # of half-open edge crossings lie strictly to its right
    crosses = sloped & ((ay > y) != (by > y))
    first_not_right = np.clip(np.ceil(xi), 0, w).astype(np.int64)
    rows = np.broadcast_to(np.arange(r1 - r0 + 1)[:, None], xi.shape)
    flat = rows[crosses] * (w + 1) + first_not_right[crosses]
    toggles = (np.bincount(flat, minlength=(r1 - r0 + 1) * (w + 1)) & 1).astype(np.uint8)
    passed = np.bitwise_xor.accumulate(toggles.reshape(r1 - r0 + 1, w + 1), axis=1)[:, :w]
    total = (crosses.sum(axis=1) & 1).astype(np.uint8)[:, None]
    mask[r0 : r1 + 1] = (passed ^ total).astype(bool)
    # the boundary itself
    on_span = sloped & (y >= np.minimum(ay, by)) & (y <= np.maximum(ay, by)) & (xi == np.floor(xi)) & (xi >= 0) & (xi <= w - 1)
    mask[(rows[on_span] + r0), xi[on_span].astype(np.int64)] = True
    for (x0, y0), (x1, y1) in zip(a, b):
        if y0 == y1 and y0 == math.floor(y0) and 0 <= y0 <= h - 1:
            c0 = max(math.ceil(min(x0, x1)), 0)
            c1 = min(math.floor(max(x0, x1)), w - 1)
            if c0 <= c1:
                mask[int(y0), c0 : c1 + 1] = True
    return mask


def polygon_area(poly: Sequence[Point]) -> float:
    s = 0.0
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2


# ---------------------------------------------------------------- lattice tests


def box_lattice(box: Box, shape: tuple[int, int]) -> tuple[int, int, int, int] | None:
    """Integer column/row span (c0, c1, r0, r1) of pixel centers inside ``box``."""
    h, w = shape
    c0 = max(math.ceil(box[0]), 0)
    c1 = min(math.floor(box[1]), w - 1)
    r0 = max(math.ceil(box[2]), 0)
    r1 = min(math.floor(box[3]), h - 1)
    if c0 > c1 or r0 > r1:
        return None
    return c0, c1, r0, r1


def disc_hits_box(center: Point, radius: float, box: Box, shape: tuple[int, int]) -> bool:
    span = box_lattice(box, shape)
    if span is None:
        return False
    c0, c1, r0, r1 = span
    # nearest lattice point of the span, axis by axis
    c = min(max(round(center[0]), c0), c1)
    r = min(max(round(center[1]), r0), r1)
    return (c - center[0]) ** 2 + (r - center[1]) ** 2 <= radius * radius


def capsule_row_intervals(a: Point, b: Point, half_width: float, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """x-extent of {p : dist(p, segment ab) <= half_width} on each horizontal line y=row.

    Returns (lo, hi); rows that miss the capsule get lo > hi.
    """
    rows = np.asarray(rows, dtype=float)
    lo = np.full(rows.shape, np.inf)
    hi = np.full(rows.shape, -np.inf)
    h = half_width
    for cx, cy in (a, b):
        dy = rows - cy
        ok = np.abs(dy) <= h
        half = np.sqrt(np.maximum(h * h - dy * dy, 0.0))
        lo = np.where(ok, np.minimum(lo, cx - half), lo)
        hi = np.where(ok, np.maximum(hi, cx + half), hi)
    dx, dy = b[0] - a[0], b[1] - a[1]
    length = math.hypot(dx, dy)
    if length > 0:
        nx_, ny_ = -dy / length * h, dx / length * h
        corners = [
            (a[0] + nx_, a[1] + ny_),
            (b[0] + nx_, b[1] + ny_),
            (b[0] - nx_, b[1] - ny_),
            (a[0] - nx_, a[1] - ny_),
        ]
        for i in range(4):
            (x0, y0), (x1, y1) = corners[i], corners[(i + 1) % 4]
            if y0 == y1:
                on = rows == y0
                lo = np.where(on, np.minimum(lo, min(x0, x1)), lo)
                hi = np.where(on, np.maximum(hi, max(x0, x1)), hi)
                continue
            t = (rows - y0) / (y1 - y0)
            on = (t >= 0) & (t <= 1)
            x = x0 + t * (x1 - x0)
            lo = np.where(on, np.minimum(lo, x), lo)
            hi = np.where(on, np.maximum(hi, x), hi)
    return lo, hi


def capsule_hits_box(a: Point, b: Point, half_width: float, box: Box, shape: tuple[int, int]) -> bool:
    span = box_lattice(box, shape)
    if span is None:
        return False
    c0, c1, r0, r1 = span
    top = max(r0, math.ceil(min(a[1], b[1]) - half_width))
    bottom = min(r1, math.floor(max(a[1], b[1]) + half_width))
    if top > bottom:
        return False
    rows = np.arange(top, bottom + 1)
    lo, hi = capsule_row_intervals(a, b, half_width, rows)
    first = np.ceil(np.maximum(lo, c0))
    last = np.floor(np.minimum(hi, c1))
    return bool(np.any(first <= last))


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    denom = dx * dx + dy * dy
    if denom == 0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / denom))
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def boxes_overlap(a: Box, b: Box) -> bool:
    return a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]
