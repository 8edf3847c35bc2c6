"""Annotation data model, text-file parsers and dataset manifests.

Ground truth lives in one text file per image, one object per line::

    category_id cx cy w h

Detections use the same layout with a confidence column::

    category_id confidence cx cy w h

All coordinates are normalized to the image size. A manifest (JSON) ties
image ids to their annotation files::

    {"name": "real",
     "categories": {"0": "axle"},
     "images": [{"id": "img_0001", "gt": "labels/img_0001.txt",
                 "det": "dets/img_0001.txt", "width": 1920, "height": 1080}]}

Relative paths are resolved against the manifest's directory.
"""

from __future__ import annotations

import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import AnnotationParseError, DatasetLoadError

log = logging.getLogger(__name__)

# Coordinates may overshoot the unit square by this much (annotation-tool
# jitter); they are clipped. Anything further out is rejected.
CLIP_SLACK = 0.05


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in normalized center/size coordinates."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"box center outside unit square: ({self.cx}, {self.cy})")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"box size must be in (0, 1]: ({self.w}, {self.h})")

    @property
    def corners(self) -> tuple[float, float, float, float]:
        """(x1, y1, x2, y2)."""
        return (
            self.cx - self.w / 2,
            self.cy - self.h / 2,
            self.cx + self.w / 2,
            self.cy + self.h / 2,
        )

    @property
    def area(self) -> float:
        return self.w * self.h

    @classmethod
    def from_corners(cls, x1: float, y1: float, x2: float, y2: float) -> "BoundingBox":
        return cls((x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1)

    @classmethod
    def clipped(cls, cx: float, cy: float, w: float, h: float) -> "BoundingBox":
        """Build a box from raw values, clipping its extent to the unit square.

        Boxes already inside the square are returned with their values
        untouched so that parse/serialize round trips are exact.
        """
        x1, y1 = cx - w / 2, cy - h / 2
        x2, y2 = cx + w / 2, cy + h / 2
        if x1 >= 0 and y1 >= 0 and x2 <= 1 and y2 <= 1:
            return cls(cx, cy, w, h)
        x1, y1 = max(x1, 0.0), max(y1, 0.0)
        x2, y2 = min(x2, 1.0), min(y2, 1.0)
        if x2 <= x1 or y2 <= y1:
            raise ValueError("box has no area inside the image after clipping")
        return cls.from_corners(x1, y1, x2, y2)


@dataclass(frozen=True)
class GroundTruthObject:
    category_id: int
    box: BoundingBox


@dataclass(frozen=True)
class Detection:
    category_id: int
    confidence: float
    box: BoundingBox

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    ground_truth: tuple[GroundTruthObject, ...] = ()
    detections: tuple[Detection, ...] = ()
    width: int | None = None
    height: int | None = None

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("image_id must be a non-empty string")
        object.__setattr__(self, "ground_truth", tuple(self.ground_truth))
        object.__setattr__(self, "detections", tuple(self.detections))


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of annotated images.

    ``missing_detections`` lists image ids whose detection file was referenced
    but absent at load time; it is bookkeeping only and excluded from equality.
    """

    name: str
    categories: Mapping[int, str]
    images: tuple[ImageRecord, ...]
    missing_detections: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "categories", dict(sorted(self.categories.items())))
        object.__setattr__(self, "images", tuple(self.images))
        seen = set()
        for rec in self.images:
            if rec.image_id in seen:
                raise DatasetLoadError(f"duplicate image id {rec.image_id!r} in dataset {self.name!r}")
            seen.add(rec.image_id)
            for obj in (*rec.ground_truth, *rec.detections):
                if obj.category_id not in self.categories:
                    raise DatasetLoadError(
                        f"image {rec.image_id!r} references unknown category {obj.category_id}"
                    )

    def __len__(self) -> int:
        return len(self.images)

    @property
    def image_ids(self) -> list[str]:
        return [rec.image_id for rec in self.images]

    def canonical(self) -> "Dataset":
        """Same dataset with images ordered by id."""
        return Dataset(
            self.name,
            self.categories,
            tuple(sorted(self.images, key=lambda r: r.image_id)),
            self.missing_detections,
        )


@dataclass(frozen=True)
class DatasetStats:
    image_count: int
    object_count_per_category: dict[int, int]


def _parse_lines(text: str, source: str, n_fields: int, kind: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        if len(tokens) != n_fields:
            raise AnnotationParseError(
                source, lineno, raw.strip(),
                f"{kind} line needs {n_fields} fields, got field count {len(tokens)}",
            )
        try:
            category_id = int(tokens[0])
        except ValueError:
            raise AnnotationParseError(source, lineno, tokens[0], "category id is not an integer") from None
        if category_id < 0:
            raise AnnotationParseError(source, lineno, tokens[0], "category id is negative")
        values = []
        for tok in tokens[1:]:
            try:
                value = float(tok)
            except ValueError:
                raise AnnotationParseError(source, lineno, tok, "not a number") from None
            if not math.isfinite(value):
                raise AnnotationParseError(source, lineno, tok, "not a finite number")
            values.append(value)
        yield lineno, tokens, category_id, values


def _parse_box(values: Sequence[float], tokens: Sequence[str], source: str, lineno: int) -> BoundingBox:
    cx, cy, w, h = values
    for name, value, tok in zip(("cx", "cy", "w", "h"), values, tokens):
        if not -CLIP_SLACK <= value <= 1 + CLIP_SLACK:
            raise AnnotationParseError(source, lineno, tok, f"{name} outside [-{CLIP_SLACK}, {1 + CLIP_SLACK}]")
    if w <= 0 or h <= 0:
        tok = tokens[2] if w <= 0 else tokens[3]
        raise AnnotationParseError(source, lineno, tok, "box width and height must be positive")
    x1, y1, x2, y2 = cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2
    if min(x1, y1) < -CLIP_SLACK or max(x2, y2) > 1 + CLIP_SLACK:
        tok = tokens[0] if x1 < -CLIP_SLACK or x2 > 1 + CLIP_SLACK else tokens[1]
        raise AnnotationParseError(source, lineno, tok, "box extends too far outside the image")
    try:
        return BoundingBox.clipped(cx, cy, w, h)
    except ValueError as exc:
        raise AnnotationParseError(source, lineno, " ".join(tokens), str(exc)) from None


def parse_ground_truth(text: str, image_id: str, source: str | None = None) -> list[GroundTruthObject]:
    """Parse a ground-truth file's contents.

    ``source`` names the file in error messages; defaults to ``image_id``.
    """
    source = source or image_id
    objects = []
    for lineno, tokens, category_id, values in _parse_lines(text, source, 5, "ground-truth"):
        box = _parse_box(values, tokens[1:], source, lineno)
        objects.append(GroundTruthObject(category_id, box))
    return objects


def parse_detections(text: str, image_id: str, source: str | None = None) -> list[Detection]:
    """Parse a detection file's contents, preserving line order."""
    source = source or image_id
    detections = []
    for lineno, tokens, category_id, values in _parse_lines(text, source, 6, "detection"):
        confidence = values[0]
        if not 0.0 <= confidence <= 1.0:
            raise AnnotationParseError(source, lineno, tokens[1], "confidence outside [0, 1]")
        box = _parse_box(values[1:], tokens[2:], source, lineno)
        detections.append(Detection(category_id, confidence, box))
    return detections


def format_ground_truth(objects: Iterable[GroundTruthObject]) -> str:
    return "".join(
        f"{o.category_id} {o.box.cx!r} {o.box.cy!r} {o.box.w!r} {o.box.h!r}\n" for o in objects
    )


def format_detections(detections: Iterable[Detection]) -> str:
    return "".join(
        f"{d.category_id} {d.confidence!r} {d.box.cx!r} {d.box.cy!r} {d.box.w!r} {d.box.h!r}\n"
        for d in detections
    )


def _read_text(path: Path, what: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DatasetLoadError(f"{what} file not found: {path}") from None
    except OSError as exc:
        raise DatasetLoadError(f"cannot read {what} file {path}: {exc}") from None


def _parse_manifest(manifest_path: Path) -> dict:
    try:
        manifest = json.loads(_read_text(manifest_path, "manifest"))
    except json.JSONDecodeError as exc:
        raise DatasetLoadError(f"{manifest_path}: invalid JSON: {exc}") from None
    if not isinstance(manifest, dict):
        raise DatasetLoadError(f"{manifest_path}: manifest must be a JSON object")
    for key, kind in (("name", str), ("categories", dict), ("images", list)):
        if not isinstance(manifest.get(key), kind):
            raise DatasetLoadError(f"{manifest_path}: field {key!r} missing or not a {kind.__name__}")
    return manifest


def load_dataset(manifest_path: str | os.PathLike, *, allow_missing_detections: bool = False) -> Dataset:
    """Load a dataset manifest and every annotation file it references.

    With ``allow_missing_detections`` an absent detection file is logged and
    treated as an image with no detections; its id is recorded in
    ``Dataset.missing_detections``. Otherwise it is a load error.
    """
    manifest_path = Path(manifest_path)
    manifest = _parse_manifest(manifest_path)
    root = manifest_path.parent

    try:
        categories = {int(k): str(v) for k, v in manifest["categories"].items()}
    except ValueError:
        raise DatasetLoadError(f"{manifest_path}: category ids must be integers") from None

    images = []
    missing = []
    seen = set()
    for i, entry in enumerate(manifest["images"]):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str) or not entry["id"]:
            raise DatasetLoadError(f"{manifest_path}: images[{i}] needs a non-empty string 'id'")
        image_id = entry["id"]
        if image_id in seen:
            raise DatasetLoadError(f"{manifest_path}: duplicate image id {image_id!r}")
        seen.add(image_id)
        if not isinstance(entry.get("gt"), str):
            raise DatasetLoadError(f"{manifest_path}: image {image_id!r} has no 'gt' path")

        gt_path = root / entry["gt"]
        ground_truth = parse_ground_truth(_read_text(gt_path, "ground-truth"), image_id, str(gt_path))
        detections: list[Detection] = []
        if entry.get("det") is not None:
            det_path = root / entry["det"]
            if det_path.is_file() or not allow_missing_detections:
                detections = parse_detections(_read_text(det_path, "detection"), image_id, str(det_path))
            else:
                log.warning("detection file missing for image %s: %s", image_id, det_path)
                missing.append(image_id)

        for obj in (*ground_truth, *detections):
            if obj.category_id not in categories:
                raise DatasetLoadError(
                    f"{manifest_path}: image {image_id!r} uses unknown category {obj.category_id}"
                )
        images.append(ImageRecord(
            image_id, tuple(ground_truth), tuple(detections),
            width=entry.get("width"), height=entry.get("height"),
        ))

    return Dataset(manifest["name"], categories, tuple(images), tuple(missing))


def save_dataset(dataset: Dataset, directory: str | os.PathLike, *, manifest_name: str = "manifest.json") -> Path:
    """Write ``dataset`` as a manifest plus one annotation file per image.

    Detection files are written only for images that carry detections.
    Returns the manifest path.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for rec in dataset.images:
        gt_rel = f"labels/{rec.image_id}.txt"
        (directory / gt_rel).parent.mkdir(parents=True, exist_ok=True)
        (directory / gt_rel).write_text(format_ground_truth(rec.ground_truth), encoding="utf-8")
        entry = {"id": rec.image_id, "gt": gt_rel}
        if rec.detections:
            det_rel = f"detections/{rec.image_id}.txt"
            (directory / det_rel).parent.mkdir(parents=True, exist_ok=True)
            (directory / det_rel).write_text(format_detections(rec.detections), encoding="utf-8")
            entry["det"] = det_rel
        if rec.width is not None:
            entry["width"] = rec.width
        if rec.height is not None:
            entry["height"] = rec.height
        entries.append(entry)
    manifest = {
        "name": dataset.name,
        "categories": {str(k): v for k, v in dataset.categories.items()},
        "images": entries,
    }
    path = directory / manifest_name
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def dataset_stats(dataset: Dataset) -> DatasetStats:
    counts = Counter(obj.category_id for rec in dataset.images for obj in rec.ground_truth)
    return DatasetStats(len(dataset.images), dict(sorted(counts.items())))
