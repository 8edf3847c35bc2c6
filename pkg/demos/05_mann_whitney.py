"""Do training databases or model versions change mAP? Mann-Whitney U tests.

Run: python demos/05_mann_whitney.py
"""

from axle_eval import build_report, data, load_matrix, render
from axle_eval.stats import approx_p_value, critical_value_lookup, u_distribution

matrix = load_matrix(data.published_matrix_path())
report = build_report(matrix, alpha=0.05)

# Each sample holds nine mAP values: one database's models, or one
# version's three sizes across the three databases.
for title, tests in (("databases", report.database_tests), ("versions", report.version_tests)):
    print(f"-- {title}")
    for t in tests:
        print(f"  {t.label_a:>9} x {t.label_b:<9} U={t.u1:4.0f} (min {t.u:2.0f})  critical={t.critical_value}  "
              f"p={t.p_two_tailed:.3f} [{t.p_method}]  {t.decision.value}")

# The critical value 17 is the largest U whose exact two-tailed tail
# probability stays at or below 0.05 for two samples of nine.
counts = u_distribution(9, 9)
total = sum(counts)
print(f"\ncritical U (9, 9, alpha=0.05, two-tailed): {critical_value_lookup(9, 9, 0.05)}")
print(f"  2*P(U <= 17) = {2 * sum(counts[:18]) / total:.4f}, 2*P(U <= 18) = {2 * sum(counts[:19]) / total:.4f}")

# With nine values per sample the normal approximation is already close.
print(f"\nU=24: exact p from the report above, approximate p = {approx_p_value(24, 9, 9):.4f}")

# The same report as a markdown document (hypothesis-test part):
text = render(report, "markdown")
print()
print(text[text.index("## Mann-Whitney"):], end="")
