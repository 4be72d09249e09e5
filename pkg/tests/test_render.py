import numpy as np
import pytest
from hypothesis import given, strategies as st

from dagdiff.graph import Dag, DagPair
from dagdiff.layout import layout_union
from dagdiff.render import (
    BLACK,
    BLUE,
    RenderStyle,
    UnknownElement,
    binarize,
    bits_to_image,
    blue_mask,
    edge_raster,
    node_raster,
    png_bytes,
    read_png,
    render_diff,
    render_graph,
)

from conftest import SMALL, chain_pair, random_positions_pair

seeds = st.integers(0, 2**32 - 1)


def _colors(img):
    return {tuple(c) for c in np.unique(img.reshape(-1, 3), axis=0)}


def test_single_node_is_one_black_disc():
    g = Dag.build([1], [], {1: (400, 400)})
    img = render_graph(g)
    ink = binarize(img)
    assert ink.sum() == node_raster(g, 1, RenderStyle()).sum() > 0
    assert tuple(img[400, 400]) == BLACK
    assert _colors(img) == {BLACK, (255, 255, 255)}


def test_render_is_byte_deterministic(tree_pairs):
    g = tree_pairs[0].alternative
    assert png_bytes(render_graph(g)) == png_bytes(render_graph(g))


def test_node_centers_are_black(tree_pairs, sparse_pairs):
    for pair in tree_pairs + sparse_pairs:
        img = render_graph(pair.alternative)
        for x, y in pair.alternative.pos.values():
            assert tuple(img[int(round(y)), int(round(x))]) == BLACK


def test_empty_diff_equals_plain_render():
    pair = chain_pair()
    assert np.array_equal(render_diff(pair, [], []), render_graph(pair.alternative))


def test_full_diff_is_blue_exactly_on_added_geometry():
    pair = chain_pair()
    style = RenderStyle()
    img = render_diff(pair, pair.added_nodes, pair.added_edges, style)
    added = np.zeros(style.shape, dtype=bool)
    for n in pair.added_nodes:
        added |= node_raster(pair.alternative, n, style)
    for e in pair.added_edges:
        added |= edge_raster(pair.alternative, e, style)
    # black elements drawn later may cover blue edge pixels, never the reverse
    kept = node_raster(pair.alternative, 1, style) | node_raster(pair.alternative, 2, style)
    assert np.array_equal(blue_mask(img), added & ~kept)


def test_single_blue_edge_stays_inside_its_stroke():
    pair = chain_pair()
    img = render_diff(pair, [], [(1, 3)])
    blue = blue_mask(img)
    assert blue.sum() > 0
    assert not (blue & ~edge_raster(pair.alternative, (1, 3), RenderStyle())).any()


def test_render_diff_rejects_unknown_elements():
    with pytest.raises(UnknownElement):
        render_diff(chain_pair(), [9], [])
    with pytest.raises(UnknownElement):
        render_diff(chain_pair(), [], [(3, 1)])


def test_binarize_examples():
    white = np.full((5, 4, 3), 255, dtype=np.uint8)
    assert not binarize(white).any()
    assert binarize(np.zeros_like(white)).all()
    near = white.copy()
    near[0, 0] = (255, 249, 255)
    near[0, 1] = (250, 250, 250)
    assert binarize(near).sum() == 1


def test_ink_equals_union_of_element_rasters(tree_pairs):
    g = tree_pairs[1].alternative
    style = RenderStyle()
    union = np.zeros(style.shape, dtype=bool)
    for n in g.nodes:
        union |= node_raster(g, n, style)
    for e in g.edges:
        union |= edge_raster(g, e, style)
    assert np.array_equal(binarize(render_graph(g, style)), union)


@given(seeds)
def test_only_three_colors(seed):
    pair = random_positions_pair(np.random.default_rng(seed))
    rng = np.random.default_rng(seed + 1)
    nodes = [n for n in pair.alternative.nodes if rng.random() < 0.5]
    edges = [e for e in pair.alternative.edges if rng.random() < 0.5]
    img = render_diff(pair, nodes, edges, SMALL)
    assert _colors(img) <= {BLACK, BLUE, (255, 255, 255)}


@given(seeds)
def test_binarize_is_idempotent(seed):
    pair = random_positions_pair(np.random.default_rng(seed))
    bits = binarize(render_graph(pair.alternative, SMALL))
    assert np.array_equal(binarize(bits_to_image(bits)), bits)


@given(seeds)
def test_adding_an_element_never_removes_ink(seed):
    pair = random_positions_pair(np.random.default_rng(seed))
    g = pair.alternative
    rng = np.random.default_rng(seed)
    edges = g.sorted_edges()
    k = int(rng.integers(0, len(edges)))
    smaller = Dag.build(g.nodes, edges[:k], g.pos)
    bigger = Dag.build(g.nodes, edges[: k + 1], g.pos)
    a = binarize(render_graph(smaller, SMALL))
    b = binarize(render_graph(bigger, SMALL))
    assert not (a & ~b).any()


@given(st.integers(1, 30), st.integers(1, 30), seeds)
def test_png_roundtrip(h, w, seed):
    rng = np.random.default_rng(seed)
    img = rng.integers(0, 256, (h, w, 3), dtype=np.uint8)
    mask = rng.random((h, w)) < 0.5
    assert np.array_equal(read_png(png_bytes(img)), img)
    back = read_png(png_bytes(mask))
    assert back.dtype == bool and np.array_equal(back, mask)


def test_png_is_8bit_rgb():
    data = png_bytes(render_graph(chain_pair().alternative))
    # IHDR: bit depth 8, color type 2 (truecolor, no alpha)
    assert data[24] == 8 and data[25] == 2
