"""Batch statistics comparing human-like difference sets with the ground truth."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .differ import DiffKind, DiffSet
from .generator import GenConfig, base_pool, make_pair
from .pipeline import annotate
from .factors import FactorConfig
from .render import RenderStyle


@dataclass(frozen=True)
class Offsets:
    node: float  # mean(|GT nodes| - |other nodes|)
    edge: float
    n: int


def mean_offsets(batch: Sequence[tuple[DiffSet, DiffSet]]) -> Offsets:
    nodes = np.array([len(g.nodes) - len(o.nodes) for g, o in batch], dtype=float)
    edges = np.array([len(g.edges) - len(o.edges) for g, o in batch], dtype=float)
    return Offsets(float(nodes.mean()), float(edges.mean()), len(batch))


@dataclass(frozen=True)
class Trend:
    rho: float
    p_decreasing: float  # one-sided p-value for rho < 0
    n: int


def edge_retention_trend(batch: Sequence[tuple[DiffSet, DiffSet]]) -> Trend:
    """Spearman correlation between the GT node-change count and the share of
    GT edges the other set keeps, over pairs with at least one GT edge."""
    xs, ys = [], []
    for g, o in batch:
        if g.edges:
            xs.append(len(g.nodes))
            ys.append(len(o.edges) / len(g.edges))
    res = stats.spearmanr(xs, ys, alternative="less")
    return Trend(float(res.statistic), float(res.pvalue), len(xs))


def human_like_batch(cfg: GenConfig, fcfg: FactorConfig = FactorConfig(), style: RenderStyle = RenderStyle(), start: int = 0) -> list[tuple[DiffSet, DiffSet]]:
    """(GT, human-like) for pairs ``start .. start + cfg.n_pairs - 1`` of the configured stream."""
    pool = base_pool(cfg)
    out = []
    for i in range(start, start + cfg.n_pairs):
        ann = annotate(make_pair(cfg, pool, i), fcfg, style)
        out.append((ann.diffs[DiffKind.GT], ann.diffs[DiffKind.HUMAN_LIKE]))
    return out
