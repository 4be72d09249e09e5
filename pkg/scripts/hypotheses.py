"""Measure the subset law, the tree-like and sparse offsets and the retention trend.

    python scripts/hypotheses.py --n 1000 --seed 0 --out results/hypotheses.json
"""

import argparse
import json
import time
from dataclasses import asdict
from pathlib import Path

from dagdiff.generator import GenConfig
from dagdiff.graph import DensityClass
from dagdiff.study import edge_retention_trend, human_like_batch, mean_offsets


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000, help="pairs per class")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    result = {}
    for cls in DensityClass:
        t0 = time.perf_counter()
        batch = human_like_batch(GenConfig(density_class=cls, n_pairs=args.n, seed=args.seed))
        off = mean_offsets(batch)
        trend = edge_retention_trend(batch)
        subset_breaks = sum(not h.issubset(g) or len(h) > len(g) for g, h in batch)
        result[cls.value] = {"offsets": asdict(off), "trend": asdict(trend), "subset_breaks": subset_breaks, "seconds": round(time.perf_counter() - t0, 1)}
        print(cls.value, json.dumps(result[cls.value]))
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(json.dumps(result, indent=1) + "\n")


if __name__ == "__main__":
    main()
