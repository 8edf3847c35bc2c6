"""IoU and greedy detection-to-ground-truth matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .annotations import BoundingBox, ImageRecord

DEFAULT_IOU_THRESHOLD = 0.5
DEFAULT_CONFIDENCE_THRESHOLD = 0.25


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError(f"counts must be non-negative: {self}")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one image.

    Indices refer to positions in the image's original ``detections`` and
    ``ground_truth`` sequences. Detections filtered out by category or
    confidence appear nowhere.
    """

    pairs: tuple[tuple[int, int, float], ...]
    unmatched_detections: tuple[int, ...]
    unmatched_ground_truth: tuple[int, ...]

    @property
    def counts(self) -> ConfusionCounts:
        return ConfusionCounts(len(self.pairs), len(self.unmatched_detections), len(self.unmatched_ground_truth))


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes."""
    if a.area <= 0 or b.area <= 0:
        raise ValueError("IoU is undefined for zero-area boxes")
    ax1, ay1, ax2, ay2 = a.corners
    bx1, by1, bx2, by2 = b.corners
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return min(1.0, inter / union)


def ranked_detection_indices(rec: ImageRecord, category_id: int, confidence_threshold: float = 0.0) -> list[int]:
    """Indices of eligible detections, highest confidence first (stable on ties)."""
    eligible = [
        i for i, d in enumerate(rec.detections)
        if d.category_id == category_id and d.confidence >= confidence_threshold
    ]
    return sorted(eligible, key=lambda i: -rec.detections[i].confidence)


def best_unmatched_gt(box: BoundingBox, candidates: Iterable[tuple[int, BoundingBox]], iou_threshold: float):
    """Pick the ground truth with the highest IoU >= threshold.

    ``candidates`` yields (gt index, box) in ascending index order; the lowest
    index wins on equal IoU. Returns (index, iou) or None.
    """
    best = None
    for g, gt_box in candidates:
        value = iou(box, gt_box)
        if value >= iou_threshold and (best is None or value > best[1]):
            best = (g, value)
    return best


def match_image(
    rec: ImageRecord,
    category_id: int,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> tuple[MatchResult, ConfusionCounts]:
    """Greedily match one image's detections of a category to its ground truth.

    Detections are visited in descending confidence; each claims the still
    unmatched ground-truth box it overlaps most, provided the IoU reaches
    ``iou_threshold``.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    if not 0.0 <= confidence_threshold <= 1.0:
        raise ValueError(f"confidence_threshold must be in [0, 1], got {confidence_threshold}")

    gt_indices = [g for g, obj in enumerate(rec.ground_truth) if obj.category_id == category_id]
    free = dict.fromkeys(gt_indices)  # insertion-ordered set
    pairs = []
    unmatched_dets = []
    for d in ranked_detection_indices(rec, category_id, confidence_threshold):
        box = rec.detections[d].box
        hit = best_unmatched_gt(box, ((g, rec.ground_truth[g].box) for g in free), iou_threshold)
        if hit is None:
            unmatched_dets.append(d)
        else:
            g, value = hit
            del free[g]
            pairs.append((d, g, value))

    result = MatchResult(tuple(pairs), tuple(unmatched_dets), tuple(free))
    return result, result.counts


def accumulate_counts(per_image: Iterable[ConfusionCounts]) -> ConfusionCounts:
    return sum(per_image, ConfusionCounts())
