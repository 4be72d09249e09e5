"""Layered (Sugiyama-style) layout of the union graph, shared by both graphs of a pair."""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import point_segment_distance, segment_intersection
from .graph import Dag, DagPair, Edge, Point, topological_order


class CanvasOverflow(ValueError):
    pass


@dataclass(frozen=True)
class LayoutConfig:
    canvas: tuple[int, int] = (800, 800)  # width, height
    margin: float = 60.0
    layer_gap: float = 150.0
    node_gap: float = 120.0
    min_gap: float = 26.0
    sweeps: int = 4

    def __post_init__(self):
        if self.layer_gap <= 0 or self.node_gap <= 0 or self.min_gap <= 0:
            raise ValueError("gaps must be positive")
        if self.min_gap > min(self.layer_gap, self.node_gap):
            raise ValueError("min_gap exceeds a preferred gap")


def longest_path_layers(g: Dag) -> dict[int, int]:
    order = topological_order(g)
    if order is None:
        raise ValueError("cannot layer a cyclic graph")
    pred = g.predecessors()
    layer: dict[int, int] = {}
    for n in order:
        layer[n] = max((layer[p] + 1 for p in pred[n]), default=0)
    return layer


def _count_crossings(order: list[list[int]], layer: dict[int, int], edges: list[Edge]) -> int:
    pos = _ordinal_positions(order)
    return len(_crossings_at(pos, edges))


def _ordinal_positions(order: list[list[int]]) -> dict[int, Point]:
    pos = {}
    for li, row in enumerate(order):
        mid = (len(row) - 1) / 2
        for i, n in enumerate(row):
            pos[n] = ((i - mid) * 100.0, li * 100.0)
    return pos


def _barycenter_order(g: Dag, layer: dict[int, int], sweeps: int) -> list[list[int]]:
    depth = max(layer.values()) + 1
    order = [sorted(n for n in g.nodes if layer[n] == li) for li in range(depth)]
    pred = g.predecessors()
    succ = g.successors()
    edges = g.sorted_edges()

    def slot(n: int, where: dict[int, float]) -> float:
        return where[n]

    best = [row[:] for row in order]
    best_cross = _count_crossings(best, layer, edges)
    for _ in range(sweeps):
        for direction in ("down", "up"):
            layers = range(1, depth) if direction == "down" else range(depth - 2, -1, -1)
            for li in layers:
                where: dict[int, float] = {}
                for row in order:
                    mid = (len(row) - 1) / 2
                    for i, n in enumerate(row):
                        where[n] = i - mid
                nbrs = pred if direction == "down" else succ
                row = order[li]
                keys = []
                for i, n in enumerate(row):
                    ref = [slot(m, where) for m in nbrs[n]]
                    keys.append((sum(ref) / len(ref) if ref else where[n], i))
                order[li] = [row[i] for _, i in sorted(keys)]
            c = _count_crossings(order, layer, edges)
            if c < best_cross:
                best, best_cross = [row[:] for row in order], c
    return best


def layout_dag(g: Dag, cfg: LayoutConfig = LayoutConfig()) -> dict[int, Point]:
    """Positions for every node: longest-path layers, barycenter order, even spacing."""
    layer = longest_path_layers(g)
    order = _barycenter_order(g, layer, cfg.sweeps)
    width, height = cfg.canvas
    depth = len(order)
    widest = max(len(row) for row in order)

    def fit(preferred: float, count: int, room: float) -> float:
        if count <= 1:
            return preferred
        gap = min(preferred, room / (count - 1))
        if gap < cfg.min_gap:
            raise CanvasOverflow(f"{count} slots need {(count - 1) * cfg.min_gap:.0f}px, canvas has {room:.0f}px")
        return gap

    dx = fit(cfg.node_gap, widest, width - 2 * cfg.margin)
    dy = fit(cfg.layer_gap, depth, height - 2 * cfg.margin)
    top = height / 2 - (depth - 1) * dy / 2
    pos: dict[int, Point] = {}
    for li, row in enumerate(order):
        mid = (len(row) - 1) / 2
        for i, n in enumerate(row):
            pos[n] = (width / 2 + (i - mid) * dx, top + li * dy)
    return pos


def layout_union(pair: DagPair, cfg: LayoutConfig = LayoutConfig()) -> DagPair:
    """Lay out the alternative (the union graph, since base is a subgraph) and
    give the base the restriction of those positions."""
    union = pair.base.add(pair.alternative.nodes, pair.alternative.edges)
    pos = layout_dag(union, cfg)
    return DagPair(pair.base.with_positions(pos), pair.alternative.with_positions(pos), pair.seed)


def _crossings_at(pos: dict[int, Point], edges: list[Edge]) -> list[tuple[Point, Edge, Edge]]:
    found = []
    for i, e in enumerate(edges):
        a0, a1 = pos[e[0]], pos[e[1]]
        for f in edges[i + 1 :]:
            if len({e[0], e[1], f[0], f[1]}) < 4:
                continue
            p = segment_intersection(a0, a1, pos[f[0]], pos[f[1]])
            if p is not None:
                found.append((p, e, f))
    return found


def edge_crossings(g: Dag) -> list[tuple[Point, Edge, Edge]]:
    """All proper crossings of straight-line edges, as (point, edge, edge) with edge < edge."""
    if not g.is_laid_out:
        from .graph import UnlaidOut

        raise UnlaidOut("edge_crossings needs positions")
    return _crossings_at(g.pos, g.sorted_edges())


def occluded_nodes(g: Dag, clearance: float) -> list[tuple[int, Edge]]:
    """Nodes that some non-incident edge passes within ``clearance`` of."""
    hits = []
    for s, t in g.sorted_edges():
        for n in g.nodes:
            if n in (s, t):
                continue
            if point_segment_distance(g.pos[n], g.pos[s], g.pos[t]) <= clearance:
                hits.append((n, (s, t)))
    return hits
