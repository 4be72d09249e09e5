"""Ground-truth differences, random subsamples of them, and the human-like selection."""

from __future__ import annotations

import csv
import enum
import io
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .factors import RoiBox
from .geometry import Box, boxes_overlap, capsule_hits_box, disc_hits_box
from .graph import DagPair, Dag, Edge
from .render import RenderStyle, edge_geometry


class EmptyGT(ValueError):
    pass


class DiffKind(enum.Enum):
    GT = "gt"
    RANDOM_GT = "random_gt"
    HUMAN_LIKE = "human_like"


@dataclass(frozen=True)
class DiffSet:
    nodes: frozenset[int] = field(default_factory=frozenset)
    edges: frozenset[Edge] = field(default_factory=frozenset)
    kind: DiffKind = DiffKind.GT

    def __len__(self) -> int:
        return len(self.nodes) + len(self.edges)

    def issubset(self, other: "DiffSet") -> bool:
        return self.nodes <= other.nodes and self.edges <= other.edges


def gt_diff(pair: DagPair) -> DiffSet:
    return DiffSet(frozenset(pair.added_nodes), frozenset(pair.added_edges), DiffKind.GT)


def random_gt(gt: DiffSet, rng: np.random.Generator, high: int = 8) -> DiffSet:
    """Uniform draws in 1..high per category, clamped to what GT actually has."""
    if len(gt) == 0:
        raise EmptyGT("random(GT) needs at least one ground-truth difference")
    n_draw = int(rng.integers(1, high + 1))
    e_draw = int(rng.integers(1, high + 1))
    nodes = sorted(gt.nodes)
    edges = sorted(gt.edges)
    n_take = min(n_draw, len(nodes))
    e_take = min(e_draw, len(edges))
    picked_nodes = [nodes[i] for i in rng.choice(len(nodes), n_take, replace=False)] if n_take else []
    picked_edges = [edges[i] for i in rng.choice(len(edges), e_take, replace=False)] if e_take else []
    return DiffSet(frozenset(picked_nodes), frozenset(picked_edges), DiffKind.RANDOM_GT)


# ------------------------------------------------------------- box membership


def element_extent(g: Dag, element: int | Edge, style: RenderStyle) -> Box:
    """Continuous bounding box of the element's drawn geometry."""
    if isinstance(element, tuple):
        a, b = edge_geometry(g.pos[element[0]], g.pos[element[1]], style)
        h = style.edge_width / 2
        return (min(a[0], b[0]) - h, max(a[0], b[0]) + h, min(a[1], b[1]) - h, max(a[1], b[1]) + h)
    x, y = g.pos[element]
    r = style.node_radius
    return (x - r, x + r, y - r, y + r)


def element_in_box(g: Dag, element: int | Edge, box: Box, style: RenderStyle = RenderStyle()) -> bool:
    """Whether any drawn pixel of a node (disc) or edge (stroke) lies in ``box``.

    Partial overlap is enough.
    """
    if isinstance(element, tuple):
        a, b = edge_geometry(g.pos[element[0]], g.pos[element[1]], style)
        return capsule_hits_box(a, b, style.edge_width / 2, box, style.shape)
    return disc_hits_box(g.pos[element], style.node_radius, box, style.shape)


def _hit_any(g: Dag, element, boxes: Sequence[Box], style: RenderStyle) -> bool:
    extent = element_extent(g, element, style)
    return any(boxes_overlap(extent, b) and element_in_box(g, element, b, style) for b in boxes)


def dfs_select(gt: DiffSet, rois: Iterable[RoiBox], pair: DagPair, style: RenderStyle = RenderStyle()) -> DiffSet:
    """(supported nodes minus hindered nodes) and (supported edges minus hindered edges).

    GT elements touching no supportive box are dropped; touching any hindering
    box removes them regardless of support.
    """
    rois = list(rois)
    supportive = [r.box for r in rois if r.is_supportive]
    hindering = [r.box for r in rois if not r.is_supportive]
    g = pair.alternative

    def keep(el) -> bool:
        return _hit_any(g, el, supportive, style) and not _hit_any(g, el, hindering, style)

    nodes = frozenset(n for n in gt.nodes if keep(n))
    edges = frozenset(e for e in gt.edges if keep(e))
    return DiffSet(nodes, edges, DiffKind.HUMAN_LIKE)


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class StatRow:
    x_count: int
    kind: str
    mean_other_count: float
    n: int


def diff_stats(batch: Sequence[tuple[DiffSet, DiffSet]], max_count: int = 8) -> list[StatRow]:
    """Mean edge counts per GT node count and mean node counts per GT edge count.

    Pairs are grouped by the GT count on the x axis, so both curves at a given x
    describe the same pairs.  Kinds are ``<set>_edges_per_node`` and
    ``<set>_nodes_per_edge`` with ``<set>`` in {gt, other set's kind}.
    """
    if not batch:
        raise ValueError("diff_stats needs a non-empty batch")
    other_kind = batch[0][1].kind.value
    by_nodes: dict[int, list[tuple[int, int]]] = defaultdict(list)
    by_edges: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for gt, other in batch:
        by_nodes[len(gt.nodes)].append((len(gt.edges), len(other.edges)))
        by_edges[len(gt.edges)].append((len(gt.nodes), len(other.nodes)))
    rows = []
    for axis, groups in (("edges_per_node", by_nodes), ("nodes_per_edge", by_edges)):
        for x in range(1, max_count + 1):
            vals = groups.get(x)
            if not vals:
                continue
            arr = np.array(vals, dtype=float)
            rows.append(StatRow(x, f"gt_{axis}", float(arr[:, 0].mean()), len(vals)))
            rows.append(StatRow(x, f"{other_kind}_{axis}", float(arr[:, 1].mean()), len(vals)))
    return rows


def stats_csv(rows: Iterable[StatRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x_count", "kind", "mean_other_count", "n"])
    for r in rows:
        w.writerow([r.x_count, r.kind, f"{r.mean_other_count:.6f}", r.n])
    return buf.getvalue()
