"""Regenerate the annotation fixtures under src/axle_eval/data/datasets.

The original images are not public, so these are stand-in annotation sets with
the same image and axle totals (real 346/1184, synthetic 326/1148, testing
36/119). Geometry mimics a side view: axles spread along a horizontal band.
Detection sets for the testing images reproduce fixed confusion counts.
"""

import json
import random
import shutil
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1] / "src" / "axle_eval" / "data" / "datasets"
CATEGORIES = {"0": "axle"}


def axle_counts(rng, n_images, total):
    counts = [rng.randint(2, 6) for _ in range(n_images)]
    while sum(counts) != total:
        i = rng.randrange(n_images)
        if sum(counts) < total and counts[i] < 7:
            counts[i] += 1
        elif sum(counts) > total and counts[i] > 1:
            counts[i] -= 1
    return counts


def axle_boxes(rng, n):
    cy = rng.uniform(0.6, 0.85)
    slot = 0.8 / n
    boxes = []
    for k in range(n):
        w = min(rng.uniform(0.05, 0.1), slot * 0.8)
        h = rng.uniform(0.08, 0.15)
        cx = 0.1 + slot * (k + 0.5) + rng.uniform(-0.05, 0.05) * slot
        boxes.append((round(cx, 6), round(cy + rng.uniform(-0.01, 0.01), 6), round(w, 6), round(h, 6)))
    return boxes


def gt_line(box):
    return "0 {} {} {} {}\n".format(*box)


def det_line(conf, box):
    return "0 {} {} {} {} {}\n".format(round(conf, 4), *box)


def jitter(rng, box):
    cx, cy, w, h = box
    return (round(cx + rng.uniform(-0.08, 0.08) * w, 6), round(cy + rng.uniform(-0.08, 0.08) * h, 6),
            round(w * rng.uniform(0.92, 1.08), 6), round(h * rng.uniform(0.92, 1.08), 6))


def stray(rng):
    return (round(rng.uniform(0.15, 0.85), 6), round(rng.uniform(0.15, 0.3), 6),
            round(rng.uniform(0.05, 0.1), 6), round(rng.uniform(0.05, 0.1), 6))


def write_dataset(name, prefix, n_images, total, seed):
    rng = random.Random(seed)
    root = ROOT / name
    (root / "labels").mkdir(parents=True)
    images, boxes = [], {}
    for k, n in enumerate(axle_counts(rng, n_images, total), start=1):
        image_id = f"{prefix}_{k:04d}"
        boxes[image_id] = axle_boxes(rng, n)
        (root / "labels" / f"{image_id}.txt").write_text("".join(gt_line(b) for b in boxes[image_id]))
        images.append({"id": image_id, "gt": f"labels/{image_id}.txt", "width": 1920, "height": 1080})
    manifest = {"name": name, "categories": CATEGORIES, "images": images}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return root, images, boxes


def write_detection_set(root, images, boxes, tag, misses, strays, seed):
    """One detection per ground-truth box except ``misses``; plus ``strays`` false positives."""
    rng = random.Random(seed)
    all_gt = [(img["id"], j) for img in images for j in range(len(boxes[img["id"]]))]
    missed = set(rng.sample(all_gt, misses))
    stray_images = [images[rng.randrange(len(images))]["id"] for _ in range(strays)]
    det_dir = root / f"det_{tag}"
    det_dir.mkdir()
    entries = []
    for img in images:
        image_id = img["id"]
        lines = [det_line(rng.uniform(0.55, 0.99), jitter(rng, b))
                 for j, b in enumerate(boxes[image_id]) if (image_id, j) not in missed]
        lines += [det_line(rng.uniform(0.3, 0.7), stray(rng)) for s in stray_images if s == image_id]
        (det_dir / f"{image_id}.txt").write_text("".join(lines))
        entries.append({**img, "det": f"det_{tag}/{image_id}.txt"})
    manifest = {"name": f"testing-{tag}", "categories": CATEGORIES, "images": entries}
    (root / f"manifest_{tag}.json").write_text(json.dumps(manifest, indent=2) + "\n")


def main():
    if ROOT.exists():
        shutil.rmtree(ROOT)
    write_dataset("real", "real", 346, 1184, seed=1)
    write_dataset("synthetic", "synth", 326, 1148, seed=2)
    root, images, boxes = write_dataset("testing", "test", 36, 119, seed=3)
    write_detection_set(root, images, boxes, "perfect", misses=0, strays=0, seed=10)
    write_detection_set(root, images, boxes, "real_yolov3spp", misses=2, strays=2, seed=11)
    write_detection_set(root, images, boxes, "mixed_yolov8x", misses=0, strays=1, seed=12)


if __name__ == "__main__":
    main()
