"""Synthetic DAG-pair datasets with human-like difference annotations, and detection metrics."""

from .differ import DiffKind, DiffSet, dfs_select, gt_diff, random_gt
from .generator import GenConfig, make_pair, sample_dataset
from .graph import Dag, DagPair, DensityClass
from .pipeline import RunConfig, annotate, generate_dataset

__all__ = [
    "Dag",
    "DagPair",
    "DensityClass",
    "DiffKind",
    "DiffSet",
    "GenConfig",
    "RunConfig",
    "annotate",
    "dfs_select",
    "generate_dataset",
    "gt_diff",
    "make_pair",
    "random_gt",
    "sample_dataset",
]
