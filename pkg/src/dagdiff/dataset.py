"""Target dictionaries on disk: graphs, images, instance masks, boxes and labels.

A dataset directory holds ``targets.json`` plus the files it references.  Paths
in the manifest are POSIX paths relative to the manifest.  Boxes are pixel
bounds ``[x0, y0, x1, y1)`` with exclusive upper ends, so the box area equals
the number of pixels it spans.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np
from scipy import ndimage

from .differ import DiffKind, DiffSet, gt_diff
from .graph import DagPair, DensityClass, read_graphml, write_graphml
from .generator import pair_problems
from .render import Patch, RenderStyle, edge_patch, element_patches, node_patch, png_bytes, read_png, render_diff, render_graph

FORMAT_VERSION = 1
MANIFEST = "targets.json"
EIGHT = np.ones((3, 3), dtype=bool)

PixelBox = tuple[int, int, int, int]


class FormatError(ValueError):
    def __init__(self, index: int | None, message: str):
        where = "manifest" if index is None else f"record {index}"
        super().__init__(f"{where}: {message}")
        self.index = index


class InvariantViolation(ValueError):
    pass


# ------------------------------------------------------------------ instances


def _diff_patches(pair: DagPair, diff: DiffSet, style: RenderStyle, patches: Mapping | None) -> list[Patch]:
    g = pair.alternative
    if patches is None:
        return [node_patch(g, n, style) for n in sorted(diff.nodes)] + [edge_patch(g, e, style) for e in sorted(diff.edges)]
    return [patches[n] for n in sorted(diff.nodes)] + [patches[e] for e in sorted(diff.edges)]


def diff_raster(pair: DagPair, diff: DiffSet, style: RenderStyle = RenderStyle(), patches: Mapping | None = None) -> np.ndarray:
    """Union of the drawn pixels of every difference element (arrowheads included)."""
    out = np.zeros(style.shape, dtype=bool)
    for p in _diff_patches(pair, diff, style, patches):
        out[p.rows, p.cols] |= p.mask
    return out


def tight_box(mask: np.ndarray) -> PixelBox | None:
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    return int(cols[0]), int(rows[0]), int(cols[-1]) + 1, int(rows[-1]) + 1


def instance_masks(pair: DagPair, diff: DiffSet, style: RenderStyle = RenderStyle(), patches: Mapping | None = None) -> list[tuple[np.ndarray, PixelBox, int]]:
    """One (mask, box, label) per 8-connected component of the diff raster.

    Elements whose pixels touch merge into one instance.  Components come in
    raster order of their first pixel.
    """
    raster = diff_raster(pair, diff, style, patches)
    window = tight_box(raster)
    if window is None:
        return []
    c0, r0, c1, r1 = window
    labels, _ = ndimage.label(raster[r0:r1, c0:c1], structure=EIGHT)
    out = []
    for i, (rs, cs) in enumerate(ndimage.find_objects(labels), start=1):
        mask = np.zeros(style.shape, dtype=bool)
        mask[r0:r1, c0:c1] = labels == i
        out.append((mask, (c0 + cs.start, r0 + rs.start, c0 + cs.stop, r0 + rs.stop), 1))
    return out


# -------------------------------------------------------------------- records


@dataclass(eq=False)
class TargetRecord:
    pair: DagPair
    kind: DiffKind
    diff: DiffSet
    img_base: np.ndarray
    img_alt: np.ndarray
    img_diff: np.ndarray
    masks: list[np.ndarray] = field(default_factory=list)
    boxes: list[PixelBox] = field(default_factory=list)
    labels: list[int] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.pair.seed

    def __eq__(self, other) -> bool:
        if not isinstance(other, TargetRecord):
            return NotImplemented
        return (
            self.pair == other.pair
            and self.kind == other.kind
            and self.diff.nodes == other.diff.nodes
            and self.diff.edges == other.diff.edges
            and np.array_equal(self.img_base, other.img_base)
            and np.array_equal(self.img_alt, other.img_alt)
            and np.array_equal(self.img_diff, other.img_diff)
            and len(self.masks) == len(other.masks)
            and all(np.array_equal(a, b) for a, b in zip(self.masks, other.masks))
            and list(self.boxes) == list(other.boxes)
            and list(self.labels) == list(other.labels)
        )


def make_record(pair: DagPair, diff: DiffSet, style: RenderStyle = RenderStyle(), img_base=None, img_alt=None, patches: Mapping | None = None) -> TargetRecord:
    if patches is None:
        patches = element_patches(pair.alternative, style)
    inst = instance_masks(pair, diff, style, patches)
    return TargetRecord(
        pair=pair,
        kind=diff.kind,
        diff=diff,
        img_base=render_graph(pair.base, style, patches) if img_base is None else img_base,
        img_alt=render_graph(pair.alternative, style, patches) if img_alt is None else img_alt,
        img_diff=render_diff(pair, diff.nodes, diff.edges, style, patches),
        masks=[m for m, _, _ in inst],
        boxes=[b for _, b, _ in inst],
        labels=[lab for _, _, lab in inst],
    )


def annotation_problems(rec: TargetRecord, shape: tuple[int, int]) -> list[str]:
    """Cheap per-record laws: cardinalities, mask format, box tightness, labels."""
    problems = []
    if not len(rec.masks) == len(rec.boxes) == len(rec.labels):
        problems.append(f"{len(rec.masks)} masks, {len(rec.boxes)} boxes, {len(rec.labels)} labels")
    for i, (m, b) in enumerate(zip(rec.masks, rec.boxes)):
        if m.dtype != bool or m.shape != shape:
            problems.append(f"mask {i} is not a {shape[1]}x{shape[0]} binary mask")
            continue
        if tight_box(m) != tuple(b):
            problems.append(f"box {i} {list(b)} is not the tight bound {tight_box(m)} of its mask")
    for i, lab in enumerate(rec.labels):
        if lab not in (0, 1):
            problems.append(f"label {i} is {lab}, expected 0 or 1")
    return problems


def record_problems(rec: TargetRecord, style: RenderStyle = RenderStyle(), cls: DensityClass | None = None) -> list[str]:
    """Every law a record must satisfy, including a full re-render of its images."""
    problems = annotation_problems(rec, style.shape)
    problems += pair_problems(rec.pair, cls)
    if problems:
        return problems
    gt = gt_diff(rec.pair)
    if not rec.diff.issubset(gt):
        problems.append("difference set is not a subset of the ground truth")
        return problems
    if rec.kind is DiffKind.GT and (rec.diff.nodes, rec.diff.edges) != (gt.nodes, gt.edges):
        problems.append("gt record does not list exactly the added elements")
    if rec.kind is DiffKind.RANDOM_GT and len(rec.diff) == 0:
        problems.append("random(GT) record is empty")
    if not np.array_equal(rec.img_base, render_graph(rec.pair.base, style)):
        problems.append("base image does not match its graph")
    if not np.array_equal(rec.img_alt, render_graph(rec.pair.alternative, style)):
        problems.append("alternative image does not match its graph")
    if not np.array_equal(rec.img_diff, render_diff(rec.pair, rec.diff.nodes, rec.diff.edges, style)):
        problems.append("diff image does not match its difference set")
    union = np.zeros(style.shape, dtype=bool)
    for i, m in enumerate(rec.masks):
        if (union & m).any():
            problems.append(f"mask {i} overlaps an earlier mask")
        union |= m
    if not np.array_equal(union, diff_raster(rec.pair, rec.diff, style)):
        problems.append("union of masks differs from the rendered difference geometry")
    else:
        expected = instance_masks(rec.pair, rec.diff, style)
        if len(expected) != len(rec.masks):
            problems.append(f"{len(rec.masks)} instances, expected {len(expected)} connected components")
    return problems


# ------------------------------------------------------------------ manifests


@dataclass(eq=False)
class DatasetManifest:
    records: list[TargetRecord]
    config: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def __eq__(self, other) -> bool:
        if not isinstance(other, DatasetManifest):
            return NotImplemented
        return self.format_version == other.format_version and self.config == other.config and self.records == other.records


def _diff_json(d: DiffSet) -> dict:
    return {"nodes": sorted(d.nodes), "edges": [list(e) for e in sorted(d.edges)]}


def _posix(path: Path, start: Path) -> str:
    return Path(os.path.relpath(path, start)).as_posix()


def write_record(rec: TargetRecord, index: int, out_dir: Path, pair_dir: Path | None = None, write_pairs: bool = True) -> dict:
    """Write one record's files; returns its manifest entry.

    Graphs and base/alternative images go to ``pair_dir`` (default: ``out_dir``)
    so several datasets over the same pairs can share them.
    """
    out = Path(out_dir)
    pairs = out if pair_dir is None else Path(pair_dir)
    stem = f"{index:06d}"
    files = {
        "graphml_base": pairs / f"{stem}_base.graphml",
        "graphml_alt": pairs / f"{stem}_alt.graphml",
        "img_base": pairs / f"{stem}_base.png",
        "img_alt": pairs / f"{stem}_alt.png",
    }
    if write_pairs:
        write_graphml(rec.pair.base, files["graphml_base"])
        write_graphml(rec.pair.alternative, files["graphml_alt"])
        files["img_base"].write_bytes(png_bytes(rec.img_base))
        files["img_alt"].write_bytes(png_bytes(rec.img_alt))
    diff_path = out / f"{stem}_diff.png"
    diff_path.write_bytes(png_bytes(rec.img_diff))
    mask_paths = []
    for j, m in enumerate(rec.masks):
        p = out / f"{stem}_mask_{j:02d}.png"
        p.write_bytes(png_bytes(m))
        mask_paths.append(p)
    return {
        **{k: _posix(v, out) for k, v in files.items()},
        "img_diff": _posix(diff_path, out),
        "masks": [_posix(p, out) for p in mask_paths],
        "boxes": [list(b) for b in rec.boxes],
        "labels": list(rec.labels),
        "kind": rec.kind.value,
        "seed": rec.seed,
        "diff": _diff_json(rec.diff),
    }


def write_manifest(entries: list[dict], config: dict, out_dir: str | Path) -> dict:
    doc = {"format_version": FORMAT_VERSION, "config": config, "records": entries}
    (Path(out_dir) / MANIFEST).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return doc


def write_dataset(manifest: DatasetManifest, out_dir: str | Path, pair_dir: str | Path | None = None, write_pairs: bool = True) -> dict:
    """Write every record's files, then ``targets.json`` as the commit point."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if pair_dir is not None:
        Path(pair_dir).mkdir(parents=True, exist_ok=True)
    entries = [write_record(rec, i, out, None if pair_dir is None else Path(pair_dir), write_pairs) for i, rec in enumerate(manifest.records)]
    return write_manifest(entries, manifest.config, out)


_KEYS = ("graphml_base", "graphml_alt", "img_base", "img_alt", "img_diff", "masks", "boxes", "labels", "kind", "seed", "diff")


def canvas_shape(config: dict) -> tuple[int, int]:
    w, h = config.get("render", {}).get("size", (800, 800))
    return int(h), int(w)


def _load_record(i: int, entry, root: Path, shape) -> TargetRecord:
    if not isinstance(entry, dict):
        raise FormatError(i, "record is not an object")
    missing = [k for k in _KEYS if k not in entry]
    if missing:
        raise FormatError(i, f"missing keys {missing}")

    def path(rel) -> Path:
        if not isinstance(rel, str):
            raise FormatError(i, f"path {rel!r} is not a string")
        p = root / rel
        if not p.is_file():
            raise FormatError(i, f"missing file {rel}")
        return p

    try:
        base = read_graphml(path(entry["graphml_base"]))
        alt = read_graphml(path(entry["graphml_alt"]))
        kind = DiffKind(entry["kind"])
        seed = int(entry["seed"])
        d = entry["diff"]
        diff = DiffSet(frozenset(int(n) for n in d["nodes"]), frozenset((int(s), int(t)) for s, t in d["edges"]), kind)
        masks = [read_png(str(path(p))) for p in entry["masks"]]
        boxes = [tuple(int(v) for v in b) for b in entry["boxes"]]
        labels = [int(v) for v in entry["labels"]]
        imgs = [read_png(str(path(entry[k]))) for k in ("img_base", "img_alt", "img_diff")]
    except FormatError:
        raise
    except (ValueError, TypeError, KeyError, OSError) as exc:
        raise FormatError(i, str(exc)) from exc
    if any(len(b) != 4 for b in boxes):
        raise FormatError(i, "boxes must have four coordinates")
    if any(m.dtype != bool for m in masks):
        raise FormatError(i, "masks must be 1-bit PNGs")
    rec = TargetRecord(DagPair(base, alt, seed), kind, diff, *imgs, masks=masks, boxes=boxes, labels=labels)
    problems = annotation_problems(rec, shape)
    if problems:
        raise InvariantViolation(f"record {i}: " + "; ".join(problems))
    return rec


def _manifest_doc(root: Path) -> dict:
    try:
        doc = json.loads((root / MANIFEST).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise FormatError(None, f"{root / MANIFEST}: {exc}") from exc
    if not isinstance(doc, dict) or not {"format_version", "config", "records"} <= doc.keys():
        raise FormatError(None, "expected keys format_version, config, records")
    if doc["format_version"] != FORMAT_VERSION:
        raise FormatError(None, f"unsupported format_version {doc['format_version']}")
    return doc


def iter_dataset(directory: str | Path) -> tuple[dict, Iterator[TargetRecord]]:
    """(config, lazily loaded records); for datasets too large to hold in memory."""
    root = Path(directory)
    doc = _manifest_doc(root)
    shape = canvas_shape(doc["config"])
    return doc["config"], (_load_record(i, e, root, shape) for i, e in enumerate(doc["records"]))


def read_dataset(directory: str | Path) -> DatasetManifest:
    """Load a dataset fully into memory; annotation laws are checked on load."""
    root = Path(directory)
    doc = _manifest_doc(root)
    shape = canvas_shape(doc["config"])
    records = [_load_record(i, e, root, shape) for i, e in enumerate(doc["records"])]
    return DatasetManifest(records, doc["config"], doc["format_version"])
