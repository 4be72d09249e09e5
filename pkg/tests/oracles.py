"""Slow, independent re-implementations used as test oracles."""

from fractions import Fraction

import numpy as np

from dagdiff.metrics import Prediction, Target


def pixel_iou(a, b) -> Fraction:
    """IoU of integer boxes by counting covered unit cells on a grid."""
    x_max = int(max(a[2], b[2]))
    y_max = int(max(a[3], b[3]))
    grid = np.zeros((y_max, x_max), dtype=np.uint8)
    grid[int(a[1]) : int(a[3]), int(a[0]) : int(a[2])] += 1
    grid[int(b[1]) : int(b[3]), int(b[0]) : int(b[2])] += 2
    inter = int(np.count_nonzero(grid == 3))
    union = int(np.count_nonzero(grid))
    return Fraction(inter, union)


def brute_match(preds, targets, thr=Fraction(1, 2)):
    """Greedy matching written out longhand: returns (tp, fp, fn, hit flags in score order)."""
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    free = set(range(len(targets)))
    hits = []
    for i in order:
        cands = [(pixel_iou(preds[i].box, targets[j].box), -j) for j in free if targets[j].record_index == preds[i].record_index]
        if cands:
            best, neg_j = max(cands)
            if best > thr:
                free.discard(-neg_j)
                hits.append(True)
                continue
        hits.append(False)
    tp = sum(hits)
    return tp, len(hits) - tp, len(free), hits


def brute_ap(preds, targets, thr=Fraction(1, 2)) -> Fraction:
    """Envelope AP by re-matching at every distinct score cutoff."""
    cutoffs = sorted({p.score for p in preds}, reverse=True)
    points = []
    for c in cutoffs:
        kept = [p for p in preds if p.score >= c]
        tp, fp, _, _ = brute_match(kept, targets, thr)
        points.append((Fraction(tp, len(targets)), Fraction(tp, tp + fp)))
    ap = Fraction(0)
    prev = Fraction(0)
    for k, (r, _) in enumerate(points):
        ap += (r - prev) * max(p for _, p in points[k:])
        prev = r
    return ap


def random_instance(rng: np.random.Generator, max_preds=10, max_targets=8, records=2):
    """Small detection problem on a 20x20 grid with tied scores and clustered boxes."""

    def box():
        x0, y0 = rng.integers(0, 14, 2)
        w, h = rng.integers(1, 7, 2)
        return (int(x0), int(y0), int(x0 + w), int(y0 + h))

    targets = [Target(box(), int(rng.integers(records))) for _ in range(rng.integers(1, max_targets + 1))]
    preds = []
    for _ in range(rng.integers(0, max_preds + 1)):
        if targets and rng.random() < 0.6:
            t = targets[int(rng.integers(len(targets)))]
            jitter = rng.integers(-1, 2, 4)
            x0, y0, x1, y1 = (int(v) for v in np.array(t.box) + jitter)
            if x1 <= x0 or y1 <= y0 or min(x0, y0) < 0:
                x0, y0, x1, y1 = t.box
            b, rec = (x0, y0, x1, y1), t.record_index
        else:
            b, rec = box(), int(rng.integers(records))
        score = float(rng.choice([0.1, 0.3, 0.5, 0.93, 0.97])) if rng.random() < 0.5 else float(rng.random())
        preds.append(Prediction(b, score, rec))
    return preds, targets
