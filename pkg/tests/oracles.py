"""Independent reference implementations used by the unit and acceptance suites.

Each one recomputes a quantity by brute force, sharing no code with the
package, so agreement is evidence rather than tautology.
"""

import itertools
from fractions import Fraction


def brute_force_ap(hits, gt_total, eleven_point=False):
    """AP of a ranked hit list by exact enumeration of the precision envelope."""
    points, tp = [], 0
    for k, h in enumerate(hits, start=1):
        tp += h
        points.append((Fraction(tp, gt_total), Fraction(tp, k)))

    def envelope(level):
        return max((p for r, p in points if r >= level), default=Fraction(0))

    if eleven_point:
        return sum(envelope(Fraction(k, 10)) for k in range(11)) / 11
    return sum(envelope(Fraction(m, gt_total)) for m in range(1, tp + 1)) / gt_total


def pair_count_u(a, b):
    """U of ``a``: pairs with a > b, ties counting one half."""
    return sum(1.0 if x > y else 0.5 if x == y else 0.0 for x in a for y in b)


def enumerated_p(u, n1, n2):
    """Two-tailed p from all C(n1+n2, n1) rank splits (no ties)."""
    splits = list(itertools.combinations(range(1, n1 + n2 + 1), n1))
    u_low = min(u, n1 * n2 - u)
    hits = sum(1 for ranks in splits if sum(ranks) - n1 * (n1 + 1) // 2 <= u_low)
    return min(Fraction(1), 2 * Fraction(hits, len(splits)))
