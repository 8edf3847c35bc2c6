"""Walk through the shipped annotation fixtures.

Run: python demos/01_dataset_stats.py
"""

from axle_eval import data, dataset_stats, load_dataset

# Three annotation sets ship with the package: real photos, game renders,
# and a held-out testing set. Each is a JSON manifest pointing at one
# YOLO-style label file per image ("class cx cy w h", normalized).
for name in data.DATASETS:
    ds = load_dataset(data.dataset_manifest(name))
    stats = dataset_stats(ds)
    axles = stats.object_count_per_category.get(0, 0)
    print(f"{name:>10}: {stats.image_count:4d} images, {axles:5d} axles "
          f"({axles / stats.image_count:.2f} per image)")

# The published sizes for comparison (the mixed set is built in demo 02).
print()
for database, (images, axles) in data.published_dataset_sizes().items():
    print(f"published {database:>9}: {images} images, {axles} axles")

# One image up close: every ground-truth box is a normalized BoundingBox.
testing = load_dataset(data.dataset_manifest("testing"))
first = testing.images[0]
print(f"\n{first.image_id} ({first.width}x{first.height}) has {len(first.ground_truth)} axles:")
for obj in first.ground_truth:
    b = obj.box
    print(f"  cx={b.cx:.3f} cy={b.cy:.3f} w={b.w:.3f} h={b.h:.3f}  area={b.area:.4f}")
