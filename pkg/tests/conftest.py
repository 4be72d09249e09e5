import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dagdiff.generator import GenConfig, base_pool, make_pair
from dagdiff.graph import Dag, DagPair, DensityClass
from dagdiff.layout import LayoutConfig, layout_union
from dagdiff.render import RenderStyle

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# small canvas for property tests that rasterize
SMALL = RenderStyle(size=(96, 80))


def small_cfg(cls: DensityClass, n_pairs: int = 10, seed: int = 0) -> GenConfig:
    return GenConfig(density_class=cls, n_pairs=n_pairs, seed=seed, pool_size=20, calibration=20)


@pytest.fixture(scope="session")
def tree_pairs():
    cfg = small_cfg(DensityClass.TREE_LIKE, 12, seed=11)
    pool = base_pool(cfg)
    return [make_pair(cfg, pool, i) for i in range(cfg.n_pairs)]


@pytest.fixture(scope="session")
def sparse_pairs():
    cfg = small_cfg(DensityClass.SPARSE, 12, seed=12)
    pool = base_pool(cfg)
    return [make_pair(cfg, pool, i) for i in range(cfg.n_pairs)]


def chain_pair() -> DagPair:
    """1 -> 2 base, alternative adds node 3 below 2 and edge 1 -> 3."""
    base = Dag.build([1, 2], [(1, 2)])
    alt = Dag.build([1, 2, 3], [(1, 2), (2, 3), (1, 3)])
    return layout_union(DagPair(base, alt, 5), LayoutConfig())


def random_positions_pair(rng: np.random.Generator, shape=(80, 96)) -> DagPair:
    """Small pair with arbitrary (not layered) positions, for geometry properties."""
    n = int(rng.integers(3, 7))
    h, w = shape
    pos = {i + 1: (float(rng.uniform(-5, w + 5)), float(rng.uniform(-5, h + 5))) for i in range(n)}
    edges = {(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < 0.5}
    edges |= {(i, i + 1) for i in range(1, n)}
    alt = Dag.build(pos, edges, pos)
    keep = sorted(pos)[: max(2, n - int(rng.integers(0, 3)))]
    base_edges = {e for e in edges if e[0] in keep and e[1] in keep and rng.random() < 0.7}
    base = Dag.build(keep, base_edges, {k: pos[k] for k in keep})
    return DagPair(base, alt, int(rng.integers(0, 2**32)))
