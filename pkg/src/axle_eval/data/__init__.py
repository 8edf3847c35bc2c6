"""Shipped fixtures: the published experiment matrix and stand-in annotation sets.

``published_matrix.csv`` holds the 27 detection-count rows and their mAP values;
``published_metrics.csv`` and ``published_dataset_sizes.csv`` hold the published metric and
dataset-size tables verbatim, for golden tests. The annotation datasets under
``datasets/`` match the published image/axle totals but are synthetic
stand-ins (the original images were never released).
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

DATASETS = ("real", "synthetic", "testing")
DETECTION_SETS = ("perfect", "real_yolov3spp", "mixed_yolov8x")


def data_dir() -> Path:
    return Path(str(resources.files(__name__)))


def published_matrix_path() -> Path:
    return data_dir() / "published_matrix.csv"


def dataset_manifest(name: str, detections: str | None = None) -> Path:
    """Manifest path of a shipped dataset, optionally with a detection set."""
    if name not in DATASETS:
        raise KeyError(f"unknown dataset {name!r}; choose from {DATASETS}")
    if detections is None:
        return data_dir() / "datasets" / name / "manifest.json"
    if name != "testing" or detections not in DETECTION_SETS:
        raise KeyError(f"detection sets exist for 'testing' only: {DETECTION_SETS}")
    return data_dir() / "datasets" / name / f"manifest_{detections}.json"


def _read_csv(name: str) -> list[dict[str, str]]:
    with open(data_dir() / name, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def published_metrics() -> dict[tuple[str, str], dict[str, float]]:
    """Published metrics keyed by (database, model)."""
    return {
        (r["database"], r["model"]): {k: float(v) for k, v in r.items() if k.endswith("_pct")}
        for r in _read_csv("published_metrics.csv")
    }


def published_dataset_sizes() -> dict[str, tuple[int, int]]:
    """Published (images, axles) per database."""
    return {r["database"]: (int(r["images"]), int(r["axles"])) for r in _read_csv("published_dataset_sizes.csv")}
