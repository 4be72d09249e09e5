import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from shapely.geometry import LineString, Polygon

from dagdiff.geometry import (
    DegenerateHull,
    capsule_hits_box,
    concave_hull,
    convex_hull,
    disc_hits_box,
    point_in_polygon,
    polygon_area,
    polygon_mask,
    segment_intersection,
)
from dagdiff.render import disc_mask, stroke_mask

coord = st.integers(0, 60).map(float)
point = st.tuples(coord, coord)


def test_segment_intersection_examples():
    assert segment_intersection((0, 0), (10, 10), (0, 10), (10, 0)) == (5, 5)
    assert segment_intersection((0, 0), (10, 0), (0, 5), (10, 5)) is None
    # shared endpoint and T-junction touching do not count
    assert segment_intersection((0, 0), (10, 10), (10, 10), (20, 0)) is None
    assert segment_intersection((0, 0), (10, 0), (5, 0), (5, 5)) is None
    # collinear overlap does not count
    assert segment_intersection((0, 0), (10, 0), (5, 0), (15, 0)) is None


@given(point, point, point, point)
def test_segment_intersection_matches_shapely(p1, p2, q1, q2):
    assume(p1 != p2 and q1 != q2)
    a, b = LineString([p1, p2]), LineString([q1, q2])
    ends = {p1, p2, q1, q2}
    inter = a.intersection(b)
    proper = inter.geom_type == "Point" and (inter.x, inter.y) not in ends
    got = segment_intersection(p1, p2, q1, q2)
    assert (got is not None) == proper
    if got is not None:
        assert math.isclose(got[0], inter.x, abs_tol=1e-9) and math.isclose(got[1], inter.y, abs_tol=1e-9)


def test_hull_rejects_degenerate_input():
    with pytest.raises(DegenerateHull):
        convex_hull([(0, 0), (1, 1)])
    with pytest.raises(DegenerateHull):
        concave_hull([(0, 0), (1, 1), (2, 2), (3, 3)])


@given(st.lists(point, min_size=3, max_size=20))
def test_convex_hull_matches_shapely_area(pts):
    assume(len(set(pts)) >= 3)
    try:
        hull = convex_hull(pts)
    except DegenerateHull:
        assert Polygon(pts).convex_hull.area == 0
        return
    assert math.isclose(polygon_area(hull), Polygon(pts).convex_hull.area, rel_tol=1e-12)


@given(st.lists(point, min_size=3, max_size=15))
def test_concave_hull_is_simple_and_contains_points(pts):
    try:
        hull = concave_hull(pts)
    except DegenerateHull:
        return
    poly = Polygon(hull)
    assert poly.is_valid
    assert all(point_in_polygon(p, hull) for p in pts)
    assert polygon_area(hull) <= polygon_area(convex_hull(pts)) + 1e-9


def test_concave_hull_follows_a_notch():
    # U shape sampled every 5 units; the notch is 20 wide and 30 deep
    outline = [(0, 0), (40, 0), (40, 40), (30, 40), (30, 10), (10, 10), (10, 40), (0, 40)]
    pts = set()
    for (x0, y0), (x1, y1) in zip(outline, outline[1:] + outline[:1]):
        n = int(max(abs(x1 - x0), abs(y1 - y0)) // 5)
        pts.update((x0 + (x1 - x0) * i / n, y0 + (y1 - y0) * i / n) for i in range(n))
    hull = concave_hull(sorted(pts))
    assert polygon_area(hull) == 1050
    assert not point_in_polygon((20, 30), hull)


quarter = st.integers(-40, 200).map(lambda v: v / 4)


# quarter-pixel vertices keep both computations exact, so boundary pixels agree
@given(st.lists(st.tuples(quarter, quarter), min_size=3, max_size=8))
def test_polygon_mask_matches_point_test(poly):
    shape = (40, 45)
    mask = polygon_mask(poly, shape)
    r, c = np.mgrid[0 : shape[0], 0 : shape[1]]
    expected = np.array([point_in_polygon((float(x), float(y)), poly) for x, y in zip(c.ravel(), r.ravel())]).reshape(shape)
    assert np.array_equal(mask, expected)


boxes = st.tuples(st.floats(-5, 45), st.floats(0, 20), st.floats(-5, 45), st.floats(0, 20)).map(lambda t: (t[0], t[0] + t[1], t[2], t[2] + t[3]))


def _box_pixels(box, shape):
    r, c = np.mgrid[0 : shape[0], 0 : shape[1]]
    return (c >= box[0]) & (c <= box[1]) & (r >= box[2]) & (r <= box[3])


@given(st.tuples(st.floats(-5, 45), st.floats(-5, 45)), st.floats(0.5, 12), boxes)
def test_disc_box_test_matches_raster(center, radius, box):
    shape = (40, 40)
    expected = bool((disc_mask(center, radius, shape) & _box_pixels(box, shape)).any())
    assert disc_hits_box(center, radius, box, shape) == expected


@given(st.tuples(st.floats(-5, 45), st.floats(-5, 45)), st.tuples(st.floats(-5, 45), st.floats(-5, 45)), st.floats(0.5, 3), boxes)
def test_capsule_box_test_matches_raster(a, b, hw, box):
    shape = (40, 40)
    expected = bool((stroke_mask(a, b, hw, shape) & _box_pixels(box, shape)).any())
    assert capsule_hits_box(a, b, hw, box, shape) == expected
