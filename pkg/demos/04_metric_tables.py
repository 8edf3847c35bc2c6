"""Recompute the published metric table from raw detection counts.

Run: python demos/04_metric_tables.py
"""

from axle_eval import data, derive_metric_table, load_matrix

matrix = load_matrix(data.published_matrix_path())
published = data.published_metrics()
print(f"{len(matrix.rows)} trained models: {len(matrix.models)} architectures x "
      f"{len(matrix.databases)} training databases\n")

# Recall, precision and F1 follow from (tp, fp, fn) alone; mAP is carried
# over from the matrix because it needs the full ranked detections.
print(f"{'database':<10} {'model':<12} {'recall':>7} {'prec.':>7} {'F1':>7}   published")
mismatches = []
for entry in derive_metric_table(matrix):
    m = entry.metrics
    ref = published[(entry.database, entry.model)]
    print(f"{entry.database:<10} {entry.model:<12} {m.recall_pct:7.2f} {m.precision_pct:7.2f} {m.f1_pct:7.2f}"
          f"   {ref['recall_pct']:.2f}/{ref['precision_pct']:.2f}/{ref['f1_pct']:.2f}")
    for name in ("recall_pct", "precision_pct", "f1_pct"):
        if abs(getattr(m, name) - ref[name]) > 0.01:
            mismatches.append((entry.database, entry.model, name, getattr(m, name), ref[name]))

# One published cell disagrees with its own counts: 91 tp, 3 fp, 28 fn give
# F1 = 2*91/(2*91+3+28) = 85.45%, printed as 85.54% -- two swapped digits.
print()
for database, model, name, got, ref in mismatches:
    print(f"disagreement: {database}/{model} {name} computed {got:.2f}, published {ref:.2f}")
