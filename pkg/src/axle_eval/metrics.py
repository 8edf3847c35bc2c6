"""Precision, recall, F1 and average precision.

Ratios are computed at full precision; percentages are rounded half-up to
two decimals only when a :class:`MetricsRow` is assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Literal, Mapping, Sequence

from .annotations import Dataset, ImageRecord
from .matching import (
    DEFAULT_CONFIDENCE_THRESHOLD,
    DEFAULT_IOU_THRESHOLD,
    ConfusionCounts,
    accumulate_counts,
    best_unmatched_gt,
    match_image,
)

Interpolation = Literal["all-point", "11-point"]
INTERPOLATIONS = ("all-point", "11-point")

# recall levels are ratios of integers stored as floats
_RECALL_EPS = 1e-12


def precision(c: ConfusionCounts) -> float:
    """tp / (tp + fp); 0.0 when nothing was detected (see :func:`degenerate_metrics`)."""
    denom = c.tp + c.fp
    return c.tp / denom if denom else 0.0


def recall(c: ConfusionCounts) -> float:
    """tp / (tp + fn); 0.0 when there is no ground truth."""
    denom = c.tp + c.fn
    return c.tp / denom if denom else 0.0


def degenerate_metrics(c: ConfusionCounts) -> tuple[str, ...]:
    """Names of the ratios whose denominator is zero for these counts."""
    flags = []
    if c.tp + c.fp == 0:
        flags.append("precision")
    if c.tp + c.fn == 0:
        flags.append("recall")
    return tuple(flags)


def f1(p: float, r: float) -> float:
    if not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0):
        raise ValueError(f"precision and recall must be in [0, 1], got {p}, {r}")
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def round_half_up(value: float, places: int = 2) -> float:
    """Round like a person reading the decimal expansion (0.125 -> 0.13)."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class PrCurve:
    """Cumulative (recall, precision) after each ranked detection."""

    points: tuple[tuple[float, float], ...]
    total_gt: int

    def __post_init__(self):
        if self.total_gt <= 0:
            raise ValueError("a precision-recall curve needs at least one ground-truth object")
        prev = 0.0
        for r, p in self.points:
            if not (0.0 <= r <= 1.0 and 0.0 <= p <= 1.0):
                raise ValueError(f"curve point out of range: ({r}, {p})")
            if r < prev:
                raise ValueError("curve recalls must be non-decreasing")
            prev = r


def pr_curve_from_hits(hits: Sequence[bool], gt_total: int) -> PrCurve:
    """Curve for a ranked list already labelled true/false positive."""
    if gt_total <= 0:
        raise ValueError("AP is undefined without ground truth (gt_total = 0)")
    points = []
    tp = 0
    for k, hit in enumerate(hits, start=1):
        tp += bool(hit)
        if tp > gt_total:
            raise ValueError("more true positives than ground-truth objects")
        points.append((tp / gt_total, tp / k))
    return PrCurve(tuple(points), gt_total)


def rank_detections(images: Sequence[ImageRecord], category_id: int, confidence_threshold: float = 0.0):
    """All (image index, detection index) of a category, best confidence first.

    Ties keep dataset order, then file order.
    """
    ranked = [
        (i, d)
        for i, rec in enumerate(images)
        for d, det in enumerate(rec.detections)
        if det.category_id == category_id and det.confidence >= confidence_threshold
    ]
    ranked.sort(key=lambda item: -images[item[0]].detections[item[1]].confidence)
    return ranked


def pr_curve(
    images: Sequence[ImageRecord],
    category_id: int,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    confidence_threshold: float = 0.0,
) -> PrCurve:
    """Precision-recall curve of one category over a set of images.

    Walks the globally ranked detections and applies the per-image greedy
    matching rule incrementally; since each image's detections are visited in
    their own confidence order, the TP/FP labels agree with
    :func:`~axle_eval.matching.match_image`.
    """
    gt_total = sum(1 for rec in images for obj in rec.ground_truth if obj.category_id == category_id)
    free = [
        {g: obj.box for g, obj in enumerate(rec.ground_truth) if obj.category_id == category_id}
        for rec in images
    ]
    hits = []
    for i, d in rank_detections(images, category_id, confidence_threshold):
        hit = best_unmatched_gt(images[i].detections[d].box, free[i].items(), iou_threshold)
        if hit is not None:
            del free[i][hit[0]]
        hits.append(hit is not None)
    return pr_curve_from_hits(hits, gt_total)


def average_precision(curve: PrCurve, interpolation: Interpolation = "all-point") -> float:
    """Area under the interpolated precision-recall curve.

    ``"all-point"`` integrates the precision envelope (the running maximum of
    precision taken from the high-recall end) over every recall step.
    ``"11-point"`` averages the envelope sampled at recall 0, 0.1, ..., 1.0.
    """
    points = curve.points
    if interpolation == "all-point":
        envelope = [p for _, p in points]
        for k in range(len(envelope) - 2, -1, -1):
            envelope[k] = max(envelope[k], envelope[k + 1])
        ap = 0.0
        prev_recall = 0.0
        for (r, _), p in zip(points, envelope):
            if r > prev_recall:
                ap += (r - prev_recall) * p
                prev_recall = r
        return ap
    if interpolation == "11-point":
        total = 0.0
        for step in range(11):
            level = step / 10
            total += max((p for r, p in points if r >= level - _RECALL_EPS), default=0.0)
        return total / 11
    raise ValueError(f"unknown interpolation {interpolation!r}; expected one of {INTERPOLATIONS}")


def mean_average_precision(per_category_ap: Mapping[object, float]) -> float:
    if not per_category_ap:
        raise ValueError("mAP needs at least one category")
    return math.fsum(per_category_ap.values()) / len(per_category_ap)


@dataclass(frozen=True)
class MetricsRow:
    """Percentages rounded half-up to two decimals.

    ``degenerate`` names metrics whose denominator was zero (reported as 0).
    """

    recall_pct: float
    precision_pct: float
    f1_pct: float
    map_pct: float | None = None
    degenerate: tuple[str, ...] = ()


def metrics_row(c: ConfusionCounts, map_pct: float | None = None) -> MetricsRow:
    """Assemble a presentation row; ``map_pct`` (already a percentage) passes through."""
    p, r = precision(c), recall(c)
    return MetricsRow(
        recall_pct=round_half_up(100 * r),
        precision_pct=round_half_up(100 * p),
        f1_pct=round_half_up(100 * f1(p, r)),
        map_pct=None if map_pct is None else round_half_up(map_pct),
        degenerate=degenerate_metrics(c),
    )


@dataclass(frozen=True)
class EvaluationResult:
    counts: ConfusionCounts
    per_category_ap: dict[int, float]
    row: MetricsRow

    @property
    def mean_ap(self) -> float | None:
        return mean_average_precision(self.per_category_ap) if self.per_category_ap else None


def evaluate_dataset(
    dataset: Dataset,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
    interpolation: Interpolation = "all-point",
) -> EvaluationResult:
    """Counts at the confidence cutoff plus AP over all detections.

    Counts are summed over categories. AP is computed per category that has
    ground truth, using every detection regardless of the confidence cutoff.
    """
    per_image = [
        match_image(rec, cat, iou_threshold, confidence_threshold)[1]
        for rec in dataset.images
        for cat in dataset.categories
    ]
    counts = accumulate_counts(per_image)
    aps = {}
    for cat in dataset.categories:
        if any(obj.category_id == cat for rec in dataset.images for obj in rec.ground_truth):
            curve = pr_curve(dataset.images, cat, iou_threshold)
            aps[cat] = average_precision(curve, interpolation)
    map_pct = 100 * mean_average_precision(aps) if aps else None
    return EvaluationResult(counts, aps, metrics_row(counts, map_pct))
