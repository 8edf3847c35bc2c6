"""Mann-Whitney U test: statistic, exact and normal-approximation p-values,
and critical-value decisions.

Conventions
-----------
``u1`` is the U statistic of the first sample, ``R1 - n1(n1+1)/2``: the
number of (a, b) pairs with a > b, ties counting one half. ``u2`` is the same
for the second sample and ``u1 + u2 = n1*n2``. Two-tailed p-values and
decisions use ``u = min(u1, u2)``; the null hypothesis is rejected when ``u``
does not exceed the critical value.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

from ._critical_values import CRITICAL_VALUES, TABLE_ALPHAS, TABLE_MAX_N
from .errors import StatsError

Tails = Literal["one", "two"]

# exact distribution is used up to the embedded table's sample sizes
MAX_EXACT_N = TABLE_MAX_N


class Decision(str, enum.Enum):
    REJECT = "Reject"
    FAIL_TO_REJECT = "Fail to Reject"


@dataclass(frozen=True)
class Sample:
    label: str
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise StatsError(f"sample {self.label!r} is empty")
        if not all(math.isfinite(v) for v in self.values):
            raise StatsError(f"sample {self.label!r} contains non-finite values")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class UTestOutcome:
    label_a: str
    label_b: str
    n1: int
    n2: int
    u1: float
    u2: float
    u: float
    p_two_tailed: float
    p_method: Literal["exact", "normal-approximation"]
    critical_value: int | None
    alpha: float
    decision: Decision


def rank_with_ties(pooled: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of the ranks they span."""
    if not pooled:
        raise StatsError("cannot rank an empty sequence")
    if not all(math.isfinite(v) for v in pooled):
        raise StatsError("cannot rank non-finite values")
    order = sorted(range(len(pooled)), key=pooled.__getitem__)
    ranks = [0.0] * len(pooled)
    start = 0
    while start < len(order):
        stop = start
        while stop + 1 < len(order) and pooled[order[stop + 1]] == pooled[order[start]]:
            stop += 1
        shared = (start + stop) / 2 + 1
        for k in range(start, stop + 1):
            ranks[order[k]] = shared
        start = stop + 1
    return ranks


def _as_values(x) -> tuple[float, ...]:
    values = x.values if isinstance(x, Sample) else tuple(float(v) for v in x)
    if not values:
        raise StatsError("both samples must be non-empty")
    return values


def u_statistic(a, b) -> tuple[float, float]:
    """(u1, u2) for samples ``a`` and ``b`` (``Sample`` or plain sequences)."""
    xa, xb = _as_values(a), _as_values(b)
    n1, n2 = len(xa), len(xb)
    ranks = rank_with_ties(xa + xb)
    r1 = math.fsum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2
    return u1, n1 * n2 - u1


@lru_cache(maxsize=None)
def u_distribution(n1: int, n2: int) -> tuple[int, ...]:
    """Number of rank arrangements giving U = 0..n1*n2 under the null (no ties).

    Uses the recurrence on whether the largest pooled value belongs to the
    first sample: c(u; n1, n2) = c(u - n2; n1 - 1, n2) + c(u; n1, n2 - 1).
    """
    if n1 < 0 or n2 < 0:
        raise StatsError("sample sizes must be non-negative")
    if n1 == 0 or n2 == 0:
        return (1,)
    counts = [0] * (n1 * n2 + 1)
    for u, c in enumerate(u_distribution(n1 - 1, n2)):
        counts[u + n2] += c
    for u, c in enumerate(u_distribution(n1, n2 - 1)):
        counts[u] += c
    return tuple(counts)


def lower_tail_probability(u: int, n1: int, n2: int) -> float:
    """P(U <= u) under the null hypothesis."""
    counts = u_distribution(n1, n2)
    if u < 0:
        return 0.0
    return sum(counts[: int(u) + 1]) / math.comb(n1 + n2, n1)


def exact_p_value(u: float, n1: int, n2: int) -> float:
    """Two-tailed p-value from the exact null distribution of U.

    Requires tie-free data (an integral ``u``) and ``n1, n2 <= 20``.
    """
    if n1 < 1 or n2 < 1:
        raise StatsError("sample sizes must be positive")
    if n1 > MAX_EXACT_N or n2 > MAX_EXACT_N:
        raise StatsError(f"exact p-value supports sample sizes up to {MAX_EXACT_N}; use approx_p_value")
    if u != int(u):
        raise StatsError("non-integral U means tied values; the exact method assumes no ties, use approx_p_value")
    if not 0 <= u <= n1 * n2:
        raise StatsError(f"U={u} outside [0, {n1 * n2}]")
    u_low = min(int(u), n1 * n2 - int(u))
    return min(1.0, 2 * lower_tail_probability(u_low, n1, n2))


def tie_correction_term(pooled: Sequence[float], n1: int, n2: int) -> float:
    """Amount subtracted from the variance of U because of tied values."""
    n = n1 + n2
    if n < 2:
        return 0.0
    ties = sum(t**3 - t for t in Counter(pooled).values())
    return n1 * n2 * ties / (12 * n * (n - 1))


def approx_p_value(u: float, n1: int, n2: int, tie_correction: float = 0.0, continuity: bool = True) -> float:
    """Two-tailed p-value from the normal approximation, capped at 1."""
    if n1 < 1 or n2 < 1:
        raise StatsError("sample sizes must be positive")
    mean = n1 * n2 / 2
    var = n1 * n2 * (n1 + n2 + 1) / 12 - tie_correction
    if var <= 0:
        raise StatsError("U has zero variance (all values tied)")
    dev = abs(u - mean)
    if continuity:
        dev = max(dev - 0.5, 0.0)
    z = dev / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def critical_value(n1: int, n2: int, alpha: float, tails: Tails = "two") -> int | None:
    """Largest U whose exact tail probability does not exceed ``alpha``.

    Computed from the exact distribution; None when no U can reach
    significance at these sample sizes.
    """
    if tails not in ("one", "two"):
        raise StatsError(f"tails must be 'one' or 'two', got {tails!r}")
    if not 0 < alpha < 1:
        raise StatsError(f"alpha must be in (0, 1), got {alpha}")
    counts = u_distribution(n1, n2)
    total = math.comb(n1 + n2, n1)
    factor = 2 if tails == "two" else 1
    best = None
    cum = 0
    for u in range(n1 * n2 // 2 + 1):
        cum += counts[u]
        if factor * cum / total <= alpha:
            best = u
        else:
            break
    return best


def critical_value_lookup(n1: int, n2: int, alpha: float, tails: Tails = "two") -> int:
    """Critical U from the embedded table (n1, n2 in 1..20, alpha 0.05 or 0.01)."""
    if not (1 <= n1 <= TABLE_MAX_N and 1 <= n2 <= TABLE_MAX_N):
        raise StatsError(f"critical-value table covers sample sizes 1..{TABLE_MAX_N}, got ({n1}, {n2})")
    key = next((a for a in TABLE_ALPHAS if math.isclose(a, alpha)), None)
    if key is None or tails not in ("one", "two"):
        raise StatsError(f"critical-value table has alpha in {TABLE_ALPHAS} and tails one/two, got {alpha}, {tails!r}")
    value = CRITICAL_VALUES[(key, tails)][n1 - 1][n2 - 1]
    if value is None:
        raise StatsError(f"no critical value: ({n1}, {n2}) is too small to reject at alpha={alpha} ({tails}-tailed)")
    return value


def _resolve_critical(n1: int, n2: int, alpha: float) -> int | None:
    if n1 > TABLE_MAX_N or n2 > TABLE_MAX_N:
        return None
    if any(math.isclose(a, alpha) for a in TABLE_ALPHAS):
        try:
            return critical_value_lookup(n1, n2, alpha, "two")
        except StatsError:
            return None
    return critical_value(n1, n2, alpha, "two")


def mann_whitney_test(a, b, alpha: float = 0.05) -> UTestOutcome:
    """Two-tailed Mann-Whitney U test of ``a`` against ``b``.

    The exact p-value is used for tie-free samples of at most 20 values each,
    otherwise the continuity- and tie-corrected normal approximation. The
    decision compares ``min(u1, u2)`` with the critical value (the embedded
    table for alpha 0.05/0.01, the exact distribution for other alphas); when
    no critical value applies, it falls back to ``p <= alpha``.
    """
    if not 0 < alpha < 1:
        raise StatsError(f"alpha must be in (0, 1), got {alpha}")
    sa = a if isinstance(a, Sample) else Sample("a", tuple(a))
    sb = b if isinstance(b, Sample) else Sample("b", tuple(b))
    n1, n2 = len(sa), len(sb)
    u1, u2 = u_statistic(sa, sb)
    u = min(u1, u2)
    pooled = sa.values + sb.values
    has_ties = len(set(pooled)) < len(pooled)

    if not has_ties and n1 <= MAX_EXACT_N and n2 <= MAX_EXACT_N:
        p, method = exact_p_value(u, n1, n2), "exact"
    else:
        p = approx_p_value(u, n1, n2, tie_correction_term(pooled, n1, n2))
        method = "normal-approximation"

    crit = _resolve_critical(n1, n2, alpha)
    rejected = u <= crit if crit is not None else p <= alpha
    return UTestOutcome(
        label_a=sa.label,
        label_b=sb.label,
        n1=n1,
        n2=n2,
        u1=u1,
        u2=u2,
        u=u,
        p_two_tailed=p,
        p_method=method,
        critical_value=crit,
        alpha=alpha,
        decision=Decision.REJECT if rejected else Decision.FAIL_TO_REJECT,
    )
