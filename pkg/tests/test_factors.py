import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import ndimage

from dagdiff.factors import (
    Factor,
    FactorConfig,
    FovGeometry,
    RoiBox,
    Side,
    crossing_rois,
    density_rois,
    depth_rois,
    fov_box,
    hull_masks,
    is_symmetric,
    region_boxes,
    shape_rois,
    symmetry_rois,
    whitespace_rois,
)
from dagdiff.geometry import DegenerateHull
from dagdiff.graph import Dag, DagPair
from dagdiff.layout import edge_crossings
from dagdiff.pipeline import compute_rois
from dagdiff.render import binarize, render_graph

GEOM = FovGeometry()


def _inside(point, box):
    return box[0] <= point[0] <= box[1] and box[2] <= point[1] <= box[3]


# ------------------------------------------------------------------- fov box


def test_fov_geometry_defaults():
    assert GEOM.exact_diagonal_mm == pytest.approx(1400 * math.tan(math.pi / 60), rel=1e-12)
    assert abs(GEOM.diagonal_mm - 73) <= 0.5
    assert abs(GEOM.side_mm - 51.62) <= 0.05
    assert GEOM.side_px == pytest.approx(180.67, abs=0.01)
    x0, x1, y0, y1 = fov_box(GEOM, (400, 400))
    assert x1 - x0 == pytest.approx(GEOM.side_px) and (x0 + x1) / 2 == 400 and (y0 + y1) / 2 == 400


def test_fov_geometry_rejects_bad_parameters():
    for kwargs in ({"omega": 0}, {"omega": 90}, {"f": 0}, {"px_per_mm": -1}, {"diagonal_step_mm": -1}):
        with pytest.raises(ValueError):
            FovGeometry(**kwargs)


@given(st.floats(0.01, 89), st.floats(0.01, 89), st.floats(1, 2000), st.floats(1, 2000))
def test_fov_side_monotone(w1, w2, f1, f2):
    (w1, w2), (f1, f2) = sorted((w1, w2)), sorted((f1, f2))
    for step in (0.0, 1.0):
        assert FovGeometry(w1, f1, diagonal_step_mm=step).side_mm <= FovGeometry(w2, f2, diagonal_step_mm=step).side_mm
    if w2 - w1 > 1e-9:
        assert FovGeometry(w1, f1, diagonal_step_mm=0).side_mm < FovGeometry(w2, f1, diagonal_step_mm=0).side_mm


def test_fov_side_vanishes_at_small_angles():
    assert FovGeometry(omega=1e-6, diagonal_step_mm=0).side_mm < 1e-5
    assert FovGeometry(omega=1e-3).side_mm == 0


# ------------------------------------------------------------------ symmetry


def _mirror_six() -> Dag:
    pos = {1: (400, 100), 2: (300, 250), 3: (500, 250), 4: (250, 400), 5: (550, 400), 6: (400, 550)}
    edges = [(1, 2), (1, 3), (2, 4), (3, 5), (2, 6), (3, 6)]
    return Dag.build(pos, edges, pos)


def test_symmetric_graph_gives_whole_graph_box():
    g = _mirror_six()
    rois = symmetry_rois(g, Side.BASE)
    assert rois == [RoiBox(True, (250.0, 550.0, 100.0, 550.0), Factor.SYMMETRY, Side.BASE)]
    xs = [p[0] for p in g.pos.values()]
    ys = [p[1] for p in g.pos.values()]
    assert rois[0].box == (min(xs), max(xs), min(ys), max(ys))


def test_perturbed_node_breaks_symmetry():
    g = _mirror_six()
    pos = dict(g.pos)
    pos[4] = (pos[4][0] + 50, pos[4][1])
    assert symmetry_rois(Dag.build(g.nodes, g.edges, pos), Side.BASE) == []


def test_symmetry_needs_mirrored_edges():
    g = _mirror_six()
    lopsided = Dag.build(g.nodes, [e for e in g.edges if e != (3, 6)] + [(1, 6)], g.pos)
    assert is_symmetric(g) and not is_symmetric(lopsided)


def test_symmetry_tolerance_is_two_pixels():
    g = _mirror_six()
    # shifting node 4 by dx also moves the axis by dx/6, so its mirror gap is 2dx/3
    for dx, expect in ((3.0, True), (3.3, False)):
        pos = dict(g.pos)
        pos[4] = (pos[4][0] + dx, pos[4][1])
        assert is_symmetric(Dag.build(g.nodes, g.edges, pos)) is expect


# --------------------------------------------------------------------- shape


def _tri_pair(extra=None):
    pos = {1: (400, 200), 2: (300, 400), 3: (500, 400)}
    base = Dag.build(pos, [(1, 2), (1, 3)], pos)
    if extra is None:
        return DagPair(base, base, 0)
    pos2 = {**pos, 4: extra}
    alt = Dag.build(pos2, [(1, 2), (1, 3), (2, 4)], pos2)
    return DagPair(base, alt, 0)


def test_shape_identical_hulls_give_nothing():
    assert shape_rois(_tri_pair()) == []


def test_shape_outside_node_is_covered():
    rois = shape_rois(_tri_pair((300, 600)))
    assert rois and all(r.is_supportive and r.factor is Factor.SHAPE for r in rois)
    assert any(_inside((300, 600), r.box) for r in rois)


def test_shape_needs_three_nodes():
    pos = {1: (0, 0), 2: (10, 10)}
    g = Dag.build(pos, [(1, 2)], pos)
    with pytest.raises(DegenerateHull):
        shape_rois(DagPair(g, g, 0))


def test_shape_boxes_cover_every_xor_pixel(tree_pairs, sparse_pairs):
    for pair in tree_pairs[:6] + sparse_pairs[:6]:
        try:
            h1, _ = hull_masks(pair.base)
            h2, _ = hull_masks(pair.alternative)
        except DegenerateHull:
            continue
        rois = shape_rois(pair, masks=(h1, h2))
        rr, cc = np.nonzero(h1 ^ h2)
        covered = np.zeros(rr.shape, dtype=bool)
        for r in rois:
            x0, x1, y0, y1 = r.box
            covered |= (cc >= x0) & (cc <= x1) & (rr >= y0) & (rr <= y1)
        assert covered.all()


# ------------------------------------------------------------------ crossing


def test_crossing_free_graph_gives_nothing():
    assert crossing_rois(_mirror_six(), GEOM, np.random.default_rng(0), Side.BASE) == []


def test_one_crossing_gives_one_centered_box():
    pos = {1: (300, 300), 2: (500, 500), 3: (500, 300), 4: (300, 500)}
    g = Dag.build(pos, [(1, 2), (3, 4)], pos)
    (roi,) = crossing_rois(g, GEOM, np.random.default_rng(0), Side.ALTERNATIVE)
    assert roi.box == pytest.approx(fov_box(GEOM, (400, 400)))
    assert roi.factor is Factor.EDGE_CROSSING and roi.side is Side.ALTERNATIVE


def test_crossing_count_matches_detector(sparse_pairs):
    for pair in sparse_pairs:
        g = pair.alternative
        assert len(crossing_rois(g, GEOM, np.random.default_rng(1), Side.ALTERNATIVE)) == len(edge_crossings(g))


def test_crossing_split_is_seeded():
    pos = {1: (300, 300), 2: (500, 500), 3: (500, 300), 4: (300, 500)}
    g = Dag.build(pos, [(1, 2), (3, 4)], pos)
    draws = [crossing_rois(g, GEOM, np.random.default_rng(s), Side.BASE)[0].is_supportive for s in range(400)]
    again = [crossing_rois(g, GEOM, np.random.default_rng(s), Side.BASE)[0].is_supportive for s in range(400)]
    assert draws == again
    assert 0.6 < np.mean(draws) < 0.8


# --------------------------------------------------------------------- depth


def _layered(nodes, edges, layer_of):
    pos = {n: (100.0 + 80 * n, 100.0 + 150 * layer_of[n]) for n in nodes}
    return Dag.build(nodes, edges, pos)


def test_depth_equal_gives_nothing():
    g = _layered([1, 2], [(1, 2)], {1: 0, 2: 1})
    alt = _layered([1, 2, 3], [(1, 2), (1, 3)], {1: 0, 2: 1, 3: 1})
    assert depth_rois(DagPair(g, alt, 0)) == []


def test_depth_new_bottom_layer_covers_node_and_edge():
    g = _layered([1, 2], [(1, 2)], {1: 0, 2: 1})
    alt = _layered([1, 2, 3], [(1, 2), (2, 3)], {1: 0, 2: 1, 3: 2})
    (roi,) = depth_rois(DagPair(g, alt, 0))
    assert _inside(alt.pos[3], roi.box) and _inside(alt.pos[2], roi.box)
    assert roi.is_supportive and roi.factor is Factor.DEPTH


def test_depth_two_new_layers_span_both():
    g = _layered([1, 2], [(1, 2)], {1: 0, 2: 1})
    alt = _layered([1, 2, 3, 4], [(1, 2), (2, 3), (3, 4)], {1: 0, 2: 1, 3: 2, 4: 3})
    (roi,) = depth_rois(DagPair(g, alt, 0))
    xs = [alt.pos[n][0] for n in (2, 3, 4)]
    ys = [alt.pos[n][1] for n in (2, 3, 4)]
    assert roi.box == (min(xs), max(xs), min(ys), max(ys))


# ------------------------------------------------------------------- density


def test_density_white_image_gives_nothing():
    assert density_rois(np.zeros((800, 800), dtype=bool), GEOM) == []


def test_density_solid_black_is_hindering():
    rois = density_rois(np.ones((800, 800), dtype=bool), GEOM)
    assert rois and all(not r.is_supportive for r in rois)


def test_density_quarter_ink_gives_nothing():
    bits = np.zeros((800, 800), dtype=bool)
    bits[::2, ::2] = True  # about 25% ink in every window
    assert density_rois(bits, GEOM) == []


def test_density_sparse_ink_is_supportive():
    bits = np.zeros((800, 800), dtype=bool)
    bits[400, 400] = True
    rois = density_rois(bits, GEOM)
    assert rois and all(r.is_supportive and _inside((400, 400), r.box) for r in rois)


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_density_window_rule(seed, p):
    rng = np.random.default_rng(seed)
    bits = rng.random((120, 120)) < p
    geom = FovGeometry(px_per_mm=1.0)  # ~52 px windows
    for r in density_rois(bits, geom):
        x0, x1, y0, y1 = r.box
        win = bits[math.ceil(y0) : math.floor(y1) + 1, math.ceil(x0) : math.floor(x1) + 1]
        ratio = win.mean()
        assert (ratio > 0.4) if not r.is_supportive else (0 < ratio <= 0.1)


# --------------------------------------------------------------- white space


def test_whitespace_convex_inked_interior_gives_nothing():
    convex = np.zeros((60, 60), dtype=bool)
    convex[10:50, 10:50] = True
    assert whitespace_rois(convex.copy(), convex, convex, Side.BASE) == []


def test_whitespace_deep_concavity_uses_hull_difference():
    convex = np.zeros((60, 60), dtype=bool)
    convex[10:50, 10:50] = True
    concave = convex.copy()
    concave[10:42, 20:40] = False  # notch of 32 x 20 = 40% of the convex area
    rois = whitespace_rois(np.zeros_like(convex), concave, convex, Side.ALTERNATIVE)
    assert [r.box for r in rois] == [(20.0, 39.0, 10.0, 41.0)]


def test_whitespace_regions_are_components_of_white_blocks():
    convex = np.zeros((60, 60), dtype=bool)
    convex[0:60, 0:60] = True
    bits = np.ones((60, 60), dtype=bool)
    bits[3:9, 3:12] = False  # 2 x 3 blocks of white
    bits[30:33, 45:51] = False  # 1 x 2 blocks
    rois = whitespace_rois(bits, convex, convex, Side.BASE)
    white_blocks = ~bits.reshape(20, 3, 20, 3).any(axis=(1, 3))
    labels, n = ndimage.label(white_blocks, structure=np.ones((3, 3)))
    assert len(rois) == n == 2
    assert sorted(r.box for r in rois) == [(3.0, 11.0, 3.0, 8.0), (45.0, 50.0, 30.0, 32.0)]


# ------------------------------------------------------------------ combined


def test_all_rois_are_on_canvas_and_tagged(tree_pairs, sparse_pairs):
    fcfg = FactorConfig()
    for pair in tree_pairs[:4] + sparse_pairs[:4]:
        img1, img2 = render_graph(pair.base), render_graph(pair.alternative)
        for r in compute_rois(pair, img1, img2, fcfg):
            x0, x1, y0, y1 = r.box
            assert 0 <= x0 <= x1 <= 799 and 0 <= y0 <= y1 <= 799
            assert isinstance(r.factor, Factor) and isinstance(r.side, Side)
        dens = [r for r in compute_rois(pair, img1, img2, fcfg) if r.factor is Factor.DENSITY]
        sup = {r.box for r in dens if r.is_supportive}
        assert sup.isdisjoint(r.box for r in dens if not r.is_supportive)


def test_region_boxes_examples():
    m = np.zeros((10, 10), dtype=bool)
    m[1:3, 1:4] = True
    m[3, 4] = True  # diagonal neighbour joins the component
    m[8, 8] = True
    assert sorted(region_boxes(m)) == [(1.0, 4.0, 1.0, 3.0), (8.0, 8.0, 8.0, 8.0)]


def test_binarized_render_feeds_density(tree_pairs):
    bits = binarize(render_graph(tree_pairs[0].alternative))
    rois = density_rois(bits, GEOM)
    assert all(r.factor is Factor.DENSITY and r.side is Side.ALTERNATIVE for r in rois)
