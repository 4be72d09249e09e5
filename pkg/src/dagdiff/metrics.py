"""Detection scoring: IoU, greedy matching, precision/recall/F1 and AP@IoU.

IoU is exact (a Fraction) whenever the inputs are integral, so threshold
comparisons never suffer from rounding.  Undefined metrics are ``None``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Sequence

import numpy as np

from .render import read_png

Number = Fraction | float
XyBox = tuple[float, float, float, float]  # x_min, y_min, x_max, y_max


class EmptyRegion(ValueError):
    pass


class NoTargets(ValueError):
    pass


def _exact(v) -> Number:
    if isinstance(v, (int, np.integer, Rational)):
        return Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v)
    if isinstance(v, (float, np.floating)) and float(v).is_integer():
        return Fraction(int(v))
    return float(v)


@dataclass(frozen=True)
class Prediction:
    box: XyBox
    score: float
    record_index: int = 0
    mask: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        x0, y0, x1, y1 = self.box
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"degenerate box {self.box}")
        if not 0 <= self.score <= 1:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class Target:
    box: XyBox
    record_index: int = 0
    mask: np.ndarray | None = field(default=None, compare=False)


# ------------------------------------------------------------------------ IoU


def box_iou(a: XyBox, b: XyBox) -> Number:
    a = tuple(_exact(v) for v in a)
    b = tuple(_exact(v) for v in b)
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    if area_a <= 0 or area_b <= 0:
        raise EmptyRegion("box with zero area")
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    inter = w * h if w > 0 and h > 0 else 0
    return inter / (area_a + area_b - inter)


def mask_iou(a: np.ndarray, b: np.ndarray) -> Fraction:
    na, nb = int(np.count_nonzero(a)), int(np.count_nonzero(b))
    if na == 0 or nb == 0:
        raise EmptyRegion("empty mask")
    inter = int(np.count_nonzero(a & b))
    return Fraction(inter, na + nb - inter)


def iou(a, b) -> Number:
    """IoU of two boxes (x_min, y_min, x_max, y_max) or two boolean masks."""
    if isinstance(a, np.ndarray) and a.dtype == bool:
        return mask_iou(a, b)
    return box_iou(a, b)


def pair_iou(p: Prediction, t: Target) -> Number:
    """Mask IoU when both sides carry a mask, box IoU otherwise."""
    if p.mask is not None and t.mask is not None:
        return mask_iou(p.mask, t.mask)
    return box_iou(p.box, t.box)


# ------------------------------------------------------------------- matching


@dataclass
class Matching:
    tp: list[tuple[int, int, Number]]  # (prediction index, target index, IoU)
    fp: list[int]
    fn: list[int]
    order: list[int]  # prediction indices by descending score
    hits: list[bool]  # per entry of ``order``: matched or not


def ranking(preds: Sequence[Prediction]) -> list[int]:
    """Descending score; equal scores keep input order."""
    return sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))


def match_predictions(preds: Sequence[Prediction], targets: Sequence[Target], iou_thr: float = 0.5) -> Matching:
    """Greedy one-to-one matching in descending score order.

    Each prediction claims the unclaimed target (same record) with the largest
    IoU, lowest index on ties, and is a true positive if that IoU exceeds
    ``iou_thr``.
    """
    thr = _exact(iou_thr)
    by_record: dict[int, list[int]] = {}
    for j, t in enumerate(targets):
        by_record.setdefault(t.record_index, []).append(j)
    claimed: set[int] = set()
    order = ranking(preds)
    tp, fp, hits = [], [], []
    for i in order:
        best, best_j = None, None
        for j in by_record.get(preds[i].record_index, []):
            if j in claimed:
                continue
            v = pair_iou(preds[i], targets[j])
            if best is None or v > best:
                best, best_j = v, j
        if best is not None and best > thr:
            claimed.add(best_j)
            tp.append((i, best_j, best))
            hits.append(True)
        else:
            fp.append(i)
            hits.append(False)
    fn = [j for j in range(len(targets)) if j not in claimed]
    return Matching(tp, fp, fn, order, hits)


# -------------------------------------------------------------------- scalars


def precision(tp: int, fp: int) -> Fraction | None:
    return Fraction(tp, tp + fp) if tp + fp > 0 else None


def recall(tp: int, fn: int) -> Fraction | None:
    return Fraction(tp, tp + fn) if tp + fn > 0 else None


def f1(p: Number | None, r: Number | None) -> Number | None:
    """Harmonic mean 2pr/(p+r); undefined when either input is or both are zero."""
    if p is None or r is None or p + r == 0:
        return None
    return 2 * p * r / (p + r)


# ------------------------------------------------------------------------- AP


def pr_points(preds: Sequence[Prediction], targets: Sequence[Target], iou_thr: float = 0.5) -> list[tuple[Fraction, Fraction]]:
    """(recall, precision) after each group of equal scores, best score first."""
    if not targets:
        raise NoTargets("AP needs at least one target")
    m = match_predictions(preds, targets, iou_thr)
    points = []
    tp = fp = 0
    for k, (i, hit) in enumerate(zip(m.order, m.hits)):
        tp += hit
        fp += not hit
        last = k + 1 == len(m.order) or preds[m.order[k + 1]].score != preds[i].score
        if last:
            points.append((Fraction(tp, len(targets)), Fraction(tp, tp + fp)))
    return points


def curve_area(points: Sequence[tuple[Number, Number]], interpolation: str = "envelope") -> Number:
    """Area under a PR curve given as (recall, precision) points in ranking order.

    ``envelope``: each recall step is weighted by the best precision reached at
    that recall or beyond.  ``trapezoid``: straight lines between points,
    starting from (0, first precision).
    """
    if not points:
        return Fraction(0)
    if interpolation == "envelope":
        area = Fraction(0)
        prev_r = Fraction(0)
        best_after = [Fraction(0)] * len(points)
        running = Fraction(0)
        for k in range(len(points) - 1, -1, -1):
            running = max(running, points[k][1])
            best_after[k] = running
        for (r, _), p in zip(points, best_after):
            area += (r - prev_r) * p
            prev_r = r
        return area
    if interpolation == "trapezoid":
        area = Fraction(0)
        prev_r, prev_p = Fraction(0), points[0][1]
        for r, p in points:
            area += (r - prev_r) * (p + prev_p) / 2
            prev_r, prev_p = r, p
        return area
    raise ValueError(f"unknown interpolation {interpolation!r}")


def average_precision(preds: Sequence[Prediction], targets: Sequence[Target], iou_thr: float = 0.5, interpolation: str = "envelope") -> tuple[Number, list[tuple[Fraction, Fraction]]]:
    points = pr_points(preds, targets, iou_thr)
    return curve_area(points, interpolation), points


# --------------------------------------------------------------------- report


@dataclass
class EvalReport:
    precision: float | None
    recall: float | None
    f1: float | None
    ap: float
    pr_curve: list[tuple[float, float]]
    iou_threshold: float
    score_threshold: float
    interpolation: str
    tp: int
    fp: int
    fn: int
    n_predictions: int
    n_targets: int

    def to_json(self) -> str:
        d = dict(self.__dict__)
        d["pr_curve"] = [list(p) for p in self.pr_curve]
        return json.dumps(d, indent=1) + "\n"

    def pr_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["recall", "precision"])
        for r, p in self.pr_curve:
            w.writerow([f"{r:.9f}", f"{p:.9f}"])
        return buf.getvalue()


def _float(v) -> float | None:
    return None if v is None else float(v)


def evaluate(preds: Sequence[Prediction], targets: Sequence[Target], iou_thr: float = 0.5, score_thr: float = 0.92, interpolation: str = "envelope") -> EvalReport:
    """AP over all predictions; precision/recall/F1 over those scoring above ``score_thr``."""
    ap, points = average_precision(preds, targets, iou_thr, interpolation)
    kept = [p for p in preds if p.score > score_thr]
    m = match_predictions(kept, targets, iou_thr)
    tp, fp, fn = len(m.tp), len(m.fp), len(m.fn)
    p, r = precision(tp, fp), recall(tp, fn)
    return EvalReport(
        precision=_float(p),
        recall=_float(r),
        f1=_float(f1(p, r)),
        ap=float(ap),
        pr_curve=[(float(a), float(b)) for a, b in points],
        iou_threshold=float(iou_thr),
        score_threshold=float(score_thr),
        interpolation=interpolation,
        tp=tp,
        fp=fp,
        fn=fn,
        n_predictions=len(preds),
        n_targets=len(targets),
    )


# ---------------------------------------------------------------------- files


def read_predictions(path: str | Path) -> list[Prediction]:
    """JSON array of {record_index, box, score, mask?}; mask paths are relative to the file."""
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError(f"{path}: expected a JSON array of predictions")
    out = []
    for k, item in enumerate(raw):
        try:
            mask = read_png(str(path.parent / item["mask"])) if item.get("mask") else None
            if mask is not None and mask.dtype != bool:
                raise ValueError("mask must be a 1-bit PNG")
            out.append(Prediction(tuple(float(v) for v in item["box"]), float(item["score"]), int(item.get("record_index", 0)), mask))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: prediction {k}: {exc}") from exc
    return out


def targets_from_records(records) -> list[Target]:
    """Label-1 instances of loaded dataset records, tagged with their record index."""
    out = []
    for i, rec in enumerate(records):
        for m, b, lab in zip(rec.masks, rec.boxes, rec.labels):
            if lab == 1:
                out.append(Target(tuple(b), i, m))
    return out
