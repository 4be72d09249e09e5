"""Regions of interest for the six dominant change-detection factors.

Each factor yields axis-aligned boxes tagged supportive or hindering.  Boxes are
in pixel coordinates and always clipped to the canvas.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import Box, DegenerateHull, Point, concave_hull, convex_hull, polygon_mask
from .graph import Dag, DagPair, depth_and_layers
from .layout import edge_crossings

EIGHT = np.ones((3, 3), dtype=bool)


class Factor(enum.Enum):
    SYMMETRY = "symmetry"
    SHAPE = "shape"
    EDGE_CROSSING = "edge_crossing"
    DEPTH = "depth"
    DENSITY = "density"
    WHITE_SPACE = "white_space"


class Side(enum.Enum):
    BASE = "base"
    ALTERNATIVE = "alternative"
    PAIR = "pair"


@dataclass(frozen=True)
class RoiBox:
    is_supportive: bool
    box: Box  # x_min, x_max, y_min, y_max
    factor: Factor
    side: Side

    def __post_init__(self):
        x0, x1, y0, y1 = self.box
        if x0 > x1 or y0 > y1:
            raise ValueError(f"inverted box {self.box}")


@dataclass(frozen=True)
class FovGeometry:
    """Foveal field of view: visual angle (deg), viewing distance (mm), screen scale (px/mm).

    The diagonal is rounded to ``diagonal_step_mm`` before the box side is
    derived from it (73 mm -> 51.62 mm at the defaults); a step of 0 keeps the
    exact value.
    """

    omega: float = 6.0
    f: float = 700.0
    px_per_mm: float = 3.5
    diagonal_step_mm: float = 1.0

    def __post_init__(self):
        if not 0 < self.omega < 90:
            raise ValueError("omega must lie in (0, 90) degrees")
        if self.f <= 0 or self.px_per_mm <= 0:
            raise ValueError("f and px_per_mm must be positive")
        if self.diagonal_step_mm < 0:
            raise ValueError("diagonal_step_mm must be non-negative")

    @property
    def exact_diagonal_mm(self) -> float:
        return 2 * self.f * math.tan(math.radians(self.omega) / 2)

    @property
    def diagonal_mm(self) -> float:
        d = self.exact_diagonal_mm
        step = self.diagonal_step_mm
        return d if step == 0 else math.floor(d / step + 0.5) * step

    @property
    def side_mm(self) -> float:
        # square inscribed in the circular field: side = 2 * (d/2) / sqrt(2)
        return 2 * (self.diagonal_mm / 2) / math.sqrt(2)

    @property
    def side_px(self) -> float:
        return self.side_mm * self.px_per_mm


@dataclass(frozen=True)
class FactorConfig:
    geom: FovGeometry = FovGeometry()
    crossing_supportive: float = 0.7
    density_low: float = 0.10
    density_high: float = 0.40
    density_stride: float = 0.25  # fraction of the box side
    hull_switch: float = 0.30
    white_ratio: float = 0.30
    kernel: int = 3
    symmetry_tol: float = 2.0
    hull_k: int = 3


def fov_box(geom: FovGeometry, focus: Point) -> Box:
    half = geom.side_px / 2
    return (focus[0] - half, focus[0] + half, focus[1] - half, focus[1] + half)


def clip_box(box: Box, shape: tuple[int, int]) -> Box | None:
    h, w = shape
    x0, x1 = max(box[0], 0.0), min(box[1], w - 1.0)
    y0, y1 = max(box[2], 0.0), min(box[3], h - 1.0)
    if x0 > x1 or y0 > y1:
        return None
    return (x0, x1, y0, y1)


def _roi(supportive: bool, box: Box, factor: Factor, side: Side, shape) -> RoiBox | None:
    clipped = clip_box(box, shape)
    return None if clipped is None else RoiBox(supportive, clipped, factor, side)


def node_bbox(g: Dag, nodes=None) -> Box:
    pts = [g.pos[n] for n in (g.nodes if nodes is None else nodes)]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return (min(xs), max(xs), min(ys), max(ys))


def region_boxes(mask: np.ndarray) -> list[Box]:
    """Bounding box of every 8-connected component, in pixel-center coordinates."""
    labels, _ = ndimage.label(mask, structure=EIGHT)
    boxes = []
    for sl in ndimage.find_objects(labels):
        if sl is None:
            continue
        rs, cs = sl
        boxes.append((float(cs.start), float(cs.stop - 1), float(rs.start), float(rs.stop - 1)))
    return boxes


# ------------------------------------------------------------------ symmetry


def mirror_map(g: Dag, tol: float = 2.0) -> dict[int, int] | None:
    """Node mapping under reflection about the vertical axis through the x-centroid."""
    axis = sum(g.pos[n][0] for n in g.nodes) / len(g.nodes)
    mapping: dict[int, int] = {}
    for n in g.nodes:
        x, y = g.pos[n]
        tx = 2 * axis - x
        best = None
        best_d = tol
        for m in g.nodes:
            mx, my = g.pos[m]
            d = max(abs(mx - tx), abs(my - y))
            if d <= best_d:
                best, best_d = m, d
        if best is None:
            return None
        mapping[n] = best
    if len(set(mapping.values())) != len(mapping):
        return None
    return mapping


def is_symmetric(g: Dag, tol: float = 2.0) -> bool:
    """Mirror-symmetric drawing: positions reflect onto positions and edges onto edges."""
    if not g.nodes:
        return False
    mapping = mirror_map(g, tol)
    if mapping is None:
        return False
    return all((mapping[s], mapping[t]) in g.edges for s, t in g.edges)


def symmetry_rois(g: Dag, side: Side, shape=(800, 800), tol: float = 2.0) -> list[RoiBox]:
    if not is_symmetric(g, tol):
        return []
    roi = _roi(True, node_bbox(g), Factor.SYMMETRY, side, shape)
    return [roi] if roi else []


# --------------------------------------------------------------------- hulls


def hull_masks(g: Dag, shape=(800, 800), k: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """(concave, convex) filled hull masks of the node positions.

    Raises DegenerateHull for fewer than three non-collinear nodes.
    """
    pts = [g.pos[n] for n in g.nodes]
    concave = polygon_mask(concave_hull(pts, k), shape)
    convex = polygon_mask(convex_hull(pts), shape)
    return concave, convex


def hull_masks_or_empty(g: Dag, shape=(800, 800), k: int = 3) -> tuple[np.ndarray, np.ndarray]:
    try:
        return hull_masks(g, shape, k)
    except DegenerateHull:
        empty = np.zeros(shape, dtype=bool)
        return empty, empty.copy()


def shape_rois(pair: DagPair, shape=(800, 800), k: int = 3, masks=None) -> list[RoiBox]:
    """Supportive boxes around every region where the two concave hulls differ."""
    if masks is None:
        h1, _ = hull_masks(pair.base, shape, k)
        h2, _ = hull_masks(pair.alternative, shape, k)
    else:
        h1, h2 = masks
    rois = [_roi(True, b, Factor.SHAPE, Side.PAIR, shape) for b in region_boxes(h1 ^ h2)]
    return [r for r in rois if r]


# ------------------------------------------------------------------ crossing


def crossing_rois(g: Dag, geom: FovGeometry, rng: np.random.Generator, side: Side, shape=(800, 800), p_supportive: float = 0.7) -> list[RoiBox]:
    """One field-of-view box per crossing; each is supportive with probability ``p_supportive``."""
    rois = []
    for point, _, _ in edge_crossings(g):
        supportive = bool(rng.random() < p_supportive)
        box = fov_box(geom, point)
        clipped = clip_box(box, shape)
        if clipped is not None:
            rois.append(RoiBox(supportive, clipped, Factor.EDGE_CROSSING, side))
    return rois


# --------------------------------------------------------------------- depth


def depth_rois(pair: DagPair, shape=(800, 800)) -> list[RoiBox]:
    d1, _ = depth_and_layers(pair.base)
    d2, layers = depth_and_layers(pair.alternative)
    if d2 <= d1:
        return []
    deep = set().union(*(layers[i] for i in range(d1, d2)))
    touched = set(deep)
    for s, t in pair.alternative.edges:
        if s in deep or t in deep:
            touched.update((s, t))
    roi = _roi(True, node_bbox(pair.alternative, touched), Factor.DEPTH, Side.PAIR, shape)
    return [roi] if roi else []


# ------------------------------------------------------------------- density


def _window_sums(mask: np.ndarray, r0, r1, c0, c1) -> np.ndarray:
    """Count of True pixels in each inclusive window [r0..r1] x [c0..c1]."""
    h, w = mask.shape
    rows = np.unique(np.concatenate([r0, r1 + 1]))
    cols = np.unique(np.concatenate([c0, c1 + 1]))
    down = np.zeros((h + 1, w), dtype=np.int32)
    down[1:] = np.cumsum(mask, axis=0, dtype=np.int32)
    s = np.zeros((len(rows), w + 1), dtype=np.int32)
    s[:, 1:] = np.cumsum(down[rows], axis=1)
    s = s[:, cols]
    ri = lambda r: np.searchsorted(rows, r)
    ci = lambda c: np.searchsorted(cols, c)
    return s[ri(r1 + 1), ci(c1 + 1)] - s[ri(r0), ci(c1 + 1)] - s[ri(r1 + 1), ci(c0)] + s[ri(r0), ci(c0)]


def window_grid(side: float, stride: float, shape) -> list[Box]:
    h, w = shape
    half = side / 2
    xs = np.arange(0.0, w - 1 + stride / 2, stride)
    ys = np.arange(0.0, h - 1 + stride / 2, stride)
    return [(x - half, x + half, y - half, y + half) for y in ys for x in xs]


def density_rois(bits: np.ndarray, geom: FovGeometry, low: float = 0.10, high: float = 0.40, stride_frac: float = 0.25) -> list[RoiBox]:
    """Slide a field-of-view window over the ink mask.

    Ink ratio above ``high`` gives a hindering box; a non-zero ratio up to ``low``
    gives a supportive one.  Ratios use the part of the window on the canvas.
    """
    shape = bits.shape
    h, w = shape
    side = geom.side_px
    windows = window_grid(side, side * stride_frac, shape)
    if not windows:
        return []
    arr = np.array(windows)
    c0 = np.clip(np.ceil(arr[:, 0]), 0, w - 1).astype(int)
    c1 = np.clip(np.floor(arr[:, 1]), 0, w - 1).astype(int)
    r0 = np.clip(np.ceil(arr[:, 2]), 0, h - 1).astype(int)
    r1 = np.clip(np.floor(arr[:, 3]), 0, h - 1).astype(int)
    ink = _window_sums(bits, r0, r1, c0, c1)
    area = (r1 - r0 + 1) * (c1 - c0 + 1)
    ratio = ink / area
    rois = []
    for i, box in enumerate(windows):
        if ratio[i] > high:
            supportive = False
        elif 0 < ratio[i] <= low:
            supportive = True
        else:
            continue
        roi = _roi(supportive, box, Factor.DENSITY, Side.ALTERNATIVE, shape)
        if roi:
            rois.append(roi)
    return rois


# ---------------------------------------------------------------- white space


def whitespace_rois(bits: np.ndarray, concave: np.ndarray, convex: np.ndarray, side: Side, switch: float = 0.30, white_ratio: float = 0.30, kernel: int = 3) -> list[RoiBox]:
    """Supportive boxes around white space.

    If the convex-minus-concave area exceeds ``switch`` of the convex hull, the
    hull-difference regions are the white space.  Otherwise the concave hull is
    tiled with ``kernel``-sized blocks; blocks whose in-hull white exceeds
    ``white_ratio`` of the block are merged into 8-connected regions.
    """
    shape = bits.shape
    convex_area = np.count_nonzero(convex)
    if convex_area == 0:
        return []
    gap = convex & ~concave
    if np.count_nonzero(gap) / convex_area > switch:
        boxes = region_boxes(gap)
    else:
        h, w = shape
        bh, bw = -(-h // kernel), -(-w // kernel)
        padded_white = np.zeros((bh * kernel, bw * kernel), dtype=np.uint16)
        padded_white[:h, :w] = ~bits & concave  # white outside the hull is not white space
        white = padded_white.reshape(bh, kernel, bw, kernel).sum(axis=(1, 3), dtype=np.uint16)
        block_h = np.minimum(np.arange(1, bh + 1) * kernel, h) - np.arange(bh) * kernel
        block_w = np.minimum(np.arange(1, bw + 1) * kernel, w) - np.arange(bw) * kernel
        area = block_h[:, None] * block_w[None, :]
        rows = np.minimum(np.arange(bh) * kernel + kernel // 2, h - 1)
        cols = np.minimum(np.arange(bw) * kernel + kernel // 2, w - 1)
        inside = concave[np.ix_(rows, cols)]
        qualifying = inside & (white > white_ratio * area)
        boxes = []
        for bx0, bx1, by0, by1 in region_boxes(qualifying):
            boxes.append((bx0 * kernel, min(bx1 * kernel + kernel - 1, w - 1), by0 * kernel, min(by1 * kernel + kernel - 1, h - 1)))
    rois = [_roi(True, b, Factor.WHITE_SPACE, side, shape) for b in boxes]
    return [r for r in rois if r]
