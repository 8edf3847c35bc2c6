"""Match detections to ground truth and compute the metric battery.

Run: python demos/03_evaluate_detections.py
"""

from axle_eval import data, evaluate_dataset, load_dataset, match_image, pr_curve
from axle_eval.metrics import average_precision

# The testing set ships with three detection sets: a perfect detector and
# two engineered to reproduce published confusion counts.
for name in data.DETECTION_SETS:
    ds = load_dataset(data.dataset_manifest("testing", name))
    result = evaluate_dataset(ds, iou_threshold=0.5, confidence_threshold=0.25)
    c, row = result.counts, result.row
    print(f"{name:>15}: tp={c.tp:3d} fp={c.fp} fn={c.fn}  recall={row.recall_pct:6.2f}  "
          f"precision={row.precision_pct:6.2f}  f1={row.f1_pct:6.2f}  mAP={row.map_pct:6.2f}")

# Matching is greedy per image: detections in descending confidence each
# claim the free ground-truth box they overlap most (IoU >= 0.5).
ds = load_dataset(data.dataset_manifest("testing", "real_yolov3spp"))
for rec in ds.images:
    match, counts = match_image(rec, 0)
    if counts.fp or counts.fn:
        print(f"\n{rec.image_id}: {counts}")
        for d, g, value in match.pairs:
            print(f"  detection {d} -> axle {g} (IoU {value:.2f})")
        print(f"  strays: {match.unmatched_detections}, missed: {match.unmatched_ground_truth}")
        break

# AP integrates the precision envelope over recall; the 11-point variant
# samples it at recall 0, 0.1, ..., 1.
curve = pr_curve(ds.images, 0)
print(f"\nall-point AP: {average_precision(curve):.4f}, "
      f"11-point AP: {average_precision(curve, '11-point'):.4f}")
