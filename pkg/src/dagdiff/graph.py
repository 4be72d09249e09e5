"""Small labeled, positioned DAGs and the structural predicates used everywhere else."""

from __future__ import annotations

import enum
import io
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

import networkx as nx

Edge = tuple[int, int]
Point = tuple[float, float]

# y values closer than this belong to the same layer
LAYER_TOLERANCE = 0.5


class UnlaidOut(ValueError):
    """Raised when an operation needs node positions that are missing."""


class DensityClass(enum.Enum):
    TREE_LIKE = "tree"
    SPARSE = "sparse"

    def contains(self, density: Fraction | float) -> bool:
        if self is DensityClass.TREE_LIKE:
            return 0 <= density <= 1
        return 1 < density <= 2

    @classmethod
    def of(cls, density: Fraction | float) -> "DensityClass | None":
        for c in cls:
            if c.contains(density):
                return c
        return None


@dataclass(frozen=True)
class Dag:
    """Directed graph over integer labels with optional pixel positions.

    Positions use image coordinates: origin top-left, y grows downward.
    Construction does not validate; call :func:`validate` for that.
    """

    nodes: tuple[int, ...]
    edges: frozenset[Edge]
    pos: Mapping[int, Point] = field(default_factory=dict, compare=True)

    @classmethod
    def build(cls, nodes: Iterable[int], edges: Iterable[Edge], pos: Mapping[int, Point] | None = None) -> "Dag":
        pos = {} if pos is None else {int(k): (float(v[0]), float(v[1])) for k, v in pos.items()}
        return cls(tuple(sorted(int(n) for n in nodes)), frozenset((int(s), int(t)) for s, t in edges), pos)

    @property
    def is_laid_out(self) -> bool:
        return all(n in self.pos for n in self.nodes)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def with_positions(self, pos: Mapping[int, Point]) -> "Dag":
        return Dag.build(self.nodes, self.edges, {n: pos[n] for n in self.nodes})

    def without_positions(self) -> "Dag":
        return Dag(self.nodes, self.edges, {})

    def add(self, nodes: Iterable[int] = (), edges: Iterable[Edge] = ()) -> "Dag":
        return Dag.build(set(self.nodes) | set(nodes), set(self.edges) | set(edges), None)

    def successors(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {n: [] for n in self.nodes}
        for s, t in self.sorted_edges():
            out[s].append(t)
        return out

    def predecessors(self) -> dict[int, list[int]]:
        inc: dict[int, list[int]] = {n: [] for n in self.nodes}
        for s, t in self.sorted_edges():
            inc[t].append(s)
        return inc

    def is_subgraph_of(self, other: "Dag") -> bool:
        return set(self.nodes) <= set(other.nodes) and self.edges <= other.edges

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for n in self.nodes:
            if n in self.pos:
                x, y = self.pos[n]
                g.add_node(n, label=n, x=x, y=y)
            else:
                g.add_node(n, label=n)
        g.add_edges_from(self.sorted_edges())
        return g


@dataclass(frozen=True)
class DagPair:
    base: Dag
    alternative: Dag
    seed: int = 0

    @property
    def added_nodes(self) -> set[int]:
        return set(self.alternative.nodes) - set(self.base.nodes)

    @property
    def added_edges(self) -> set[Edge]:
        return set(self.alternative.edges - self.base.edges)

    @property
    def n_changes(self) -> int:
        return len(self.added_nodes) + len(self.added_edges)


def linear_density(g: Dag) -> Fraction:
    if not g.nodes:
        raise ValueError("linear density needs at least one node")
    return Fraction(len(g.edges), len(g.nodes))


def depth_and_layers(g: Dag) -> tuple[int, dict[int, set[int]]]:
    """Group nodes into layers by y coordinate, top layer first."""
    missing = [n for n in g.nodes if n not in g.pos]
    if missing:
        raise UnlaidOut(f"nodes without position: {missing}")
    layers: dict[int, set[int]] = {}
    anchors: list[float] = []
    for n in sorted(g.nodes, key=lambda n: (g.pos[n][1], n)):
        y = g.pos[n][1]
        if anchors and y - anchors[-1] <= LAYER_TOLERANCE:
            layers[len(anchors) - 1].add(n)
        else:
            anchors.append(y)
            layers[len(anchors) - 1] = {n}
    return len(anchors), layers


def topological_order(g: Dag) -> list[int] | None:
    """Kahn's algorithm; None when the graph has a directed cycle."""
    indeg = {n: 0 for n in g.nodes}
    for _, t in g.edges:
        indeg[t] += 1
    succ = g.successors()
    queue = deque(sorted(n for n, d in indeg.items() if d == 0))
    order = []
    while queue:
        n = queue.popleft()
        order.append(n)
        for t in succ[n]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    return order if len(order) == len(g.nodes) else None


def has_path(g: Dag, src: int, dst: int) -> bool:
    succ = g.successors()
    seen = {src}
    stack = [src]
    while stack:
        n = stack.pop()
        if n == dst:
            return True
        for t in succ[n]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return False


def is_weakly_connected(g: Dag) -> bool:
    if not g.nodes:
        return True
    adj: dict[int, set[int]] = defaultdict(set)
    for s, t in g.edges:
        adj[s].add(t)
        adj[t].add(s)
    start = g.nodes[0]
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for m in adj[n]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return len(seen) == len(g.nodes)


def validate(g: Dag) -> list[str]:
    """Every broken invariant as a human-readable message; empty list means ok."""
    problems: list[str] = []
    nodes = set(g.nodes)
    if len(nodes) != len(g.nodes):
        problems.append("duplicate node labels")
    if nodes and nodes != set(range(1, len(nodes) + 1)):
        problems.append(f"labels are not the contiguous range 1..{len(nodes)}")
    if len(g.nodes) > 64:
        problems.append("more than 64 nodes")
    for s, t in g.sorted_edges():
        if s not in nodes or t not in nodes:
            problems.append(f"edge ({s},{t}) references an unknown node")
        if s == t:
            problems.append(f"self-loop on node {s}")
    if not problems and topological_order(g) is None:
        problems.append("graph contains a directed cycle")
    if not problems and not is_weakly_connected(g):
        problems.append("graph is disconnected")
    return problems


# duplicates can't live in a frozenset, so the reader reports them instead
def _read_edges(raw: Iterable[Edge]) -> tuple[list[Edge], list[str]]:
    seen: set[Edge] = set()
    dupes = []
    for e in raw:
        if e in seen:
            dupes.append(f"duplicate edge {e}")
        seen.add(e)
    return list(seen), dupes


def write_graphml(g: Dag, path: str | Path | io.BytesIO) -> None:
    nx.write_graphml(g.to_networkx(), path, named_key_ids=True)


def read_graphml(path: str | Path) -> Dag:
    ng = nx.read_graphml(path, node_type=int, force_multigraph=True)
    pos = {}
    nodes = []
    for n, data in ng.nodes(data=True):
        label = int(data.get("label", n))
        nodes.append(label)
        if "x" in data and "y" in data:
            pos[label] = (float(data["x"]), float(data["y"]))
    relabel = {n: int(d.get("label", n)) for n, d in ng.nodes(data=True)}
    edges, dupes = _read_edges((relabel[s], relabel[t]) for s, t, _ in ng.edges(keys=True))
    if dupes:
        raise ValueError(f"{path}: " + "; ".join(dupes))
    return Dag.build(nodes, edges, pos or None)
