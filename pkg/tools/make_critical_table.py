"""Regenerate src/axle_eval/_critical_values.py.

The null distribution of U for sizes (m, n) has generating function equal to
the Gaussian binomial coefficient [m+n choose m]_q, built here by polynomial
products/divisions so the table does not depend on the package's recurrence.
"""

from math import comb
from pathlib import Path

MAX_N = 20
ALPHAS = (0.05, 0.01)
OUT = Path(__file__).resolve().parents[1] / "src" / "axle_eval" / "_critical_values.py"


def poly_mul_binomial(poly, k):
    # poly * (1 - q^k)
    out = poly + [0] * k
    for i, c in enumerate(poly):
        out[i + k] -= c
    return out


def poly_div_binomial(poly, k):
    # exact division by (1 - q^k)
    out = list(poly)
    for i in range(k, len(out)):
        out[i] += out[i - k]
    while out and out[-1] == 0:
        out.pop()
    return out


def gaussian_binomial(m, n):
    poly = [1]
    for i in range(1, n + 1):
        poly = poly_mul_binomial(poly, m + i)
        poly = poly_div_binomial(poly, i)
    return poly + [0] * (m * n + 1 - len(poly))


def critical(m, n, alpha, factor):
    counts = gaussian_binomial(m, n)
    assert sum(counts) == comb(m + n, m)
    total = comb(m + n, m)
    best, cum = None, 0
    for u in range(m * n // 2 + 1):
        cum += counts[u]
        # exact rational comparison: factor*cum/total <= alpha
        if factor * cum * 10**6 <= round(alpha * 10**6) * total:
            best = u
        else:
            break
    return best


def main():
    lines = [
        '"""Critical values of the Mann-Whitney U statistic.',
        "",
        "Generated by tools/make_critical_table.py; do not edit by hand.",
        "CRITICAL_VALUES[(alpha, tails)][n1 - 1][n2 - 1] is the largest U whose exact",
        "tail probability (doubled when two-tailed) does not exceed alpha, or None",
        "when the sample sizes are too small to reach significance.",
        '"""',
        "",
        f"TABLE_MAX_N = {MAX_N}",
        f"TABLE_ALPHAS = {ALPHAS!r}",
        "",
        "CRITICAL_VALUES = {",
    ]
    for alpha in ALPHAS:
        for tails, factor in (("one", 1), ("two", 2)):
            lines.append(f"    ({alpha!r}, {tails!r}): (")
            for m in range(1, MAX_N + 1):
                row = ", ".join("None" if v is None else str(v)
                                for v in (critical(m, n, alpha, factor) for n in range(1, MAX_N + 1)))
                lines.append(f"        ({row}),")
            lines.append("    ),")
    lines.append("}")
    OUT.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
