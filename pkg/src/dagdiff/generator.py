"""Base graphs per density class and alternatives built from 1-8 additions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .factors import is_symmetric
from .graph import Dag, DagPair, DensityClass, depth_and_layers, has_path, linear_density, validate
from .layout import CanvasOverflow, LayoutConfig, edge_crossings, layout_dag, layout_union, longest_path_layers, occluded_nodes


class ExhaustedAttempts(RuntimeError):
    pass


class NoValidAddition(RuntimeError):
    pass


class TooFewSamples(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    density_class: DensityClass = DensityClass.TREE_LIKE
    n_pairs: int = 100
    node_min: int = 6
    node_max: int = 12
    changes_min: int = 1
    changes_max: int = 8
    seed: int = 0
    pool_size: int = 500
    calibration: int = 200
    attempts: int = 10_000
    pool_patience: int = 50  # consecutive duplicate bases before the pool counts as complete
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    clearance: float = 12.0  # no edge may pass closer than this to a non-incident node center

    def __post_init__(self):
        if not 1 <= self.changes_min <= self.changes_max <= 8:
            raise ValueError("need 1 <= changes_min <= changes_max <= 8")
        if self.node_min < 2 or self.node_max < self.node_min or self.node_max > 64:
            raise ValueError("need 2 <= node_min <= node_max <= 64")
        if self.density_class is DensityClass.SPARSE and self.node_min < 4:
            raise ValueError("sparse graphs need at least 4 nodes")
        if self.n_pairs < 0 or self.pool_size < 1 or self.attempts < 1:
            raise ValueError("n_pairs, pool_size and attempts must be positive")

    def snapshot(self) -> dict:
        d = asdict(self)
        d["density_class"] = self.density_class.value
        d["layout"] = asdict(self.layout)
        d["layout"]["canvas"] = list(self.layout.canvas)
        return d


def pair_seed(seed: int, index: int) -> int:
    """64-bit seed of pair ``index``; independent of how pairs are scheduled."""
    hi, lo = np.random.SeedSequence([seed, index]).generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def stream(seed: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng([seed, purpose])


# purposes for derived random streams
POOL, CALIBRATE, ALTERNATIVE, CROSSING, RANDOM_GT = range(5)


def edge_range(n: int, cls: DensityClass) -> tuple[int, int]:
    most = n * (n - 1) // 2
    if cls is DensityClass.TREE_LIKE:
        return n - 1, min(n, most)
    return n + 1, min(2 * n, most)


def random_dag(n: int, m: int, rng: np.random.Generator) -> Dag:
    """Connected DAG with one source: a random recursive tree plus forward edges."""
    labels = [int(v) + 1 for v in rng.permutation(n)]
    edges = set()
    for i in range(1, n):
        edges.add((labels[int(rng.integers(0, i))], labels[i]))
    extra = [(labels[i], labels[j]) for i in range(n) for j in range(i + 1, n) if (labels[i], labels[j]) not in edges]
    k = m - (n - 1)
    if k > 0:
        for idx in sorted(rng.choice(len(extra), k, replace=False)):
            edges.add(extra[idx])
    return Dag.build(range(1, n + 1), edges)


def canonical_form(g: Dag) -> tuple:
    """Cheap isomorphism-invariant fingerprint: degree sequence and layer profile."""
    indeg = {n: 0 for n in g.nodes}
    outdeg = {n: 0 for n in g.nodes}
    for s, t in g.edges:
        outdeg[s] += 1
        indeg[t] += 1
    layer = longest_path_layers(g)
    profile = [0] * (max(layer.values()) + 1)
    for v in layer.values():
        profile[v] += 1
    return (len(g.nodes), len(g.edges), tuple(sorted((indeg[n], outdeg[n]) for n in g.nodes)), tuple(profile))


def depth_quartile_band(samples: Sequence[int]) -> tuple[int, int]:
    """Interquartile depth band [Q1, Q3], quartiles linearly interpolated then rounded half-up."""
    if len(samples) < 4:
        raise TooFewSamples(f"need at least 4 depth samples, got {len(samples)}")
    q1, q3 = np.quantile(np.asarray(samples, dtype=float), [0.25, 0.75])
    return int(math.floor(q1 + 0.5)), int(math.floor(q3 + 0.5))


def _candidate(cfg: GenConfig, rng: np.random.Generator) -> Dag | None:
    n = int(rng.integers(cfg.node_min, cfg.node_max + 1))
    lo, hi = edge_range(n, cfg.density_class)
    if lo > hi:
        return None
    g = random_dag(n, int(rng.integers(lo, hi + 1)), rng)
    try:
        g = g.with_positions(layout_dag(g, cfg.layout))
    except CanvasOverflow:
        return None
    if occluded_nodes(g, cfg.clearance):
        return None
    if cfg.density_class is DensityClass.TREE_LIKE:
        if edge_crossings(g) or not is_symmetric(g):
            return None
    return g


def generate_base(cfg: GenConfig, rng: np.random.Generator, band: tuple[int, int] | None = None) -> Dag:
    """One laid-out base graph of the configured class.

    Tree-like bases must be mirror-symmetric, crossing-free and (when ``band``
    is given) have a depth inside it.  Sparse bases are plain random samples.
    """
    for _ in range(cfg.attempts):
        g = _candidate(cfg, rng)
        if g is None:
            continue
        if band is not None and cfg.density_class is DensityClass.TREE_LIKE:
            depth, _ = depth_and_layers(g)
            if not band[0] <= depth <= band[1]:
                continue
        return g
    raise ExhaustedAttempts(f"no {cfg.density_class.value} base graph after {cfg.attempts} attempts")


def depth_band(cfg: GenConfig) -> tuple[int, int] | None:
    if cfg.density_class is not DensityClass.TREE_LIKE:
        return None
    rng = stream(cfg.seed, CALIBRATE)
    depths = [depth_and_layers(generate_base(cfg, rng))[0] for _ in range(max(cfg.calibration, 4))]
    return depth_quartile_band(depths)


def base_pool(cfg: GenConfig, size: int | None = None) -> list[Dag]:
    """Distinct base graphs (by canonical form); stops early when no new form turns up."""
    size = cfg.pool_size if size is None else size
    band = depth_band(cfg)
    rng = stream(cfg.seed, POOL)
    pool: list[Dag] = []
    seen: set[tuple] = set()
    misses = 0
    while len(pool) < size and misses < cfg.pool_patience:
        g = generate_base(cfg, rng, band)
        key = canonical_form(g)
        if key in seen:
            misses += 1
            continue
        seen.add(key)
        pool.append(g)
        misses = 0
    if not pool:
        raise ExhaustedAttempts("empty base pool")
    return pool


def create_alternative(base: Dag, k: int, rng: np.random.Generator, cls: DensityClass | None = None) -> Dag:
    """Add exactly ``k`` elements: new nodes (each hung below an existing node
    by one new edge) plus extra edges between any two nodes that keep it acyclic."""
    if not 1 <= k <= 8:
        raise ValueError("k must lie in 1..8")
    n, m = len(base.nodes), len(base.edges)
    feasible = []
    for a in range(k // 2 + 1):
        b = k - a
        if cls is not None and not cls.contains(Fraction(m + b, n + a)):
            continue
        feasible.append(a)
    if not feasible:
        raise NoValidAddition(f"no node/edge split of {k} additions keeps the density class")
    a = int(feasible[int(rng.integers(len(feasible)))])
    g = base.without_positions()
    nodes = list(g.nodes)
    for i in range(a):
        new = len(nodes) + 1
        parent = nodes[int(rng.integers(len(nodes)))]
        g = g.add([new], [(parent, new)])
        nodes.append(new)
    for _ in range(k - 2 * a):
        options = [(s, t) for s in g.nodes for t in g.nodes if s != t and (s, t) not in g.edges and not has_path(g, t, s)]
        if not options:
            raise NoValidAddition("no edge can be added without a cycle")
        g = g.add(edges=[options[int(rng.integers(len(options)))]])
    return g


def make_pair(cfg: GenConfig, pool: Sequence[Dag], index: int) -> DagPair:
    """Pair ``index``: pool base + alternative, laid out together, all invariants checked."""
    seed = pair_seed(cfg.seed, index)
    rng = stream(seed, ALTERNATIVE)
    for _ in range(cfg.attempts):
        base = pool[int(rng.integers(len(pool)))]
        k = int(rng.integers(cfg.changes_min, cfg.changes_max + 1))
        try:
            alt = create_alternative(base, k, rng, cfg.density_class)
            pair = layout_union(DagPair(base.without_positions(), alt, seed), cfg.layout)
        except (NoValidAddition, CanvasOverflow):
            continue
        if pair_problems(pair, cfg.density_class) or occluded_nodes(pair.alternative, cfg.clearance):
            continue
        return pair
    raise ExhaustedAttempts(f"pair {index}: no valid alternative after {cfg.attempts} attempts")


def pair_problems(pair: DagPair, cls: DensityClass | None) -> list[str]:
    """Every broken pair invariant; empty when the pair is valid."""
    problems = [f"base: {p}" for p in validate(pair.base)] + [f"alternative: {p}" for p in validate(pair.alternative)]
    if not pair.base.is_subgraph_of(pair.alternative):
        problems.append("base is not a subgraph of the alternative")
    if not 1 <= pair.n_changes <= 8:
        problems.append(f"{pair.n_changes} additions, expected 1..8")
    for n in pair.base.nodes:
        if pair.base.pos.get(n) != pair.alternative.pos.get(n):
            problems.append(f"node {n} moved between base and alternative")
    if cls is not None:
        for name, g in (("base", pair.base), ("alternative", pair.alternative)):
            if g.nodes and not cls.contains(linear_density(g)):
                problems.append(f"{name} density {float(linear_density(g)):.3f} outside {cls.value}")
        if cls is DensityClass.TREE_LIKE and pair.base.is_laid_out and edge_crossings(pair.base):
            problems.append("tree-like base has edge crossings")
    return problems


def sample_dataset(cfg: GenConfig) -> list[DagPair]:
    pool = base_pool(cfg, min(cfg.pool_size, max(cfg.n_pairs, 1)))
    return [make_pair(cfg, pool, i) for i in range(cfg.n_pairs)]
