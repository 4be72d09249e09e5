"""Per-pair annotation: images, factor RoIs, and the three difference sets."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .dataset import TargetRecord, make_record, write_manifest, write_record
from .differ import DiffKind, DiffSet, dfs_select, gt_diff, random_gt
from .factors import (
    FactorConfig,
    RoiBox,
    Side,
    crossing_rois,
    density_rois,
    depth_rois,
    hull_masks_or_empty,
    shape_rois,
    symmetry_rois,
    whitespace_rois,
)
from .generator import CROSSING, RANDOM_GT, GenConfig, base_pool, make_pair, stream
from .graph import Dag, DagPair
from .render import RenderStyle, binarize, element_patches, render_graph


@dataclass
class Annotated:
    pair: DagPair
    img_base: np.ndarray
    img_alt: np.ndarray
    rois: list[RoiBox]
    diffs: dict[DiffKind, DiffSet] = field(default_factory=dict)


def compute_rois(pair: DagPair, img_base: np.ndarray, img_alt: np.ndarray, fcfg: FactorConfig = FactorConfig()) -> list[RoiBox]:
    """All factor RoIs for a laid-out pair; crossing draws come from the pair seed."""
    shape = img_alt.shape[:2]
    rng = stream(pair.seed, CROSSING)
    bits_base, bits_alt = binarize(img_base), binarize(img_alt)
    concave1, convex1 = hull_masks_or_empty(pair.base, shape, fcfg.hull_k)
    concave2, convex2 = hull_masks_or_empty(pair.alternative, shape, fcfg.hull_k)
    rois: list[RoiBox] = []
    rois += symmetry_rois(pair.base, Side.BASE, shape, fcfg.symmetry_tol)
    rois += symmetry_rois(pair.alternative, Side.ALTERNATIVE, shape, fcfg.symmetry_tol)
    rois += shape_rois(pair, shape, masks=(concave1, concave2))
    rois += crossing_rois(pair.base, fcfg.geom, rng, Side.BASE, shape, fcfg.crossing_supportive)
    rois += crossing_rois(pair.alternative, fcfg.geom, rng, Side.ALTERNATIVE, shape, fcfg.crossing_supportive)
    rois += depth_rois(pair, shape)
    rois += density_rois(bits_alt, fcfg.geom, fcfg.density_low, fcfg.density_high, fcfg.density_stride)
    for bits, concave, convex, side in ((bits_base, concave1, convex1, Side.BASE), (bits_alt, concave2, convex2, Side.ALTERNATIVE)):
        rois += whitespace_rois(bits, concave, convex, side, fcfg.hull_switch, fcfg.white_ratio, fcfg.kernel)
    return rois


def annotate(pair: DagPair, fcfg: FactorConfig = FactorConfig(), style: RenderStyle = RenderStyle(), patches: Mapping | None = None) -> Annotated:
    if patches is None:
        patches = element_patches(pair.alternative, style)
    img_base = render_graph(pair.base, style, patches)
    img_alt = render_graph(pair.alternative, style, patches)
    rois = compute_rois(pair, img_base, img_alt, fcfg)
    gt = gt_diff(pair)
    diffs = {
        DiffKind.GT: gt,
        DiffKind.RANDOM_GT: random_gt(gt, stream(pair.seed, RANDOM_GT)),
        DiffKind.HUMAN_LIKE: dfs_select(gt, rois, pair, style),
    }
    return Annotated(pair, img_base, img_alt, rois, diffs)


# ----------------------------------------------------------------- generation


@dataclass(frozen=True)
class RunConfig:
    gen: GenConfig
    factors: FactorConfig = FactorConfig()
    style: RenderStyle = RenderStyle()

    def snapshot(self) -> dict:
        raw = {"generator": self.gen.snapshot(), "factors": asdict(self.factors), "render": asdict(self.style)}
        return json.loads(json.dumps(raw))


def pair_records(pair: DagPair, fcfg: FactorConfig = FactorConfig(), style: RenderStyle = RenderStyle()) -> dict[DiffKind, TargetRecord]:
    patches = element_patches(pair.alternative, style)
    ann = annotate(pair, fcfg, style, patches)
    return {kind: make_record(pair, diff, style, ann.img_base, ann.img_alt, patches) for kind, diff in ann.diffs.items()}


_state: dict = {}


def _init_worker(run: RunConfig, pool: list[Dag], out_dir: Path) -> None:
    _state.update(run=run, pool=pool, out=out_dir)


def _generate_one(index: int) -> dict[DiffKind, dict]:
    run, out = _state["run"], _state["out"]
    pair = make_pair(run.gen, _state["pool"], index)
    records = pair_records(pair, run.factors, run.style)
    return {kind: write_record(rec, index, out / kind.value, out / "pairs", write_pairs=kind is DiffKind.GT) for kind, rec in records.items()}


def generate_dataset(run: RunConfig, out_dir: str | Path, jobs: int = 1) -> dict[DiffKind, dict]:
    """Generate ``run.gen.n_pairs`` pairs into ``out_dir``.

    Layout: ``pairs/`` holds graphs and base/alternative images; ``gt/``,
    ``random_gt/`` and ``human_like/`` are datasets with their own
    ``targets.json``.  Output bytes do not depend on ``jobs``.
    """
    out = Path(out_dir)
    for sub in ["pairs"] + [k.value for k in DiffKind]:
        (out / sub).mkdir(parents=True, exist_ok=True)
    pool = base_pool(run.gen, min(run.gen.pool_size, max(run.gen.n_pairs, 1)))
    indices = range(run.gen.n_pairs)
    if jobs <= 1:
        _init_worker(run, pool, out)
        results = [_generate_one(i) for i in indices]
    else:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(run, pool, out)) as ex:
            results = list(ex.map(_generate_one, indices, chunksize=8))
    config = run.snapshot()
    return {kind: write_manifest([r[kind] for r in results], {**config, "kind": kind.value}, out / kind.value) for kind in DiffKind}
