"""Build a mixed training dataset from two sources under an object-count
balance constraint, and check train/test disjointness.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Mapping

from .annotations import Dataset, ImageRecord
from .errors import CompositionError

log = logging.getLogger(__name__)


def default_tolerance(target: int) -> int:
    """1% of the target object count, rounded down."""
    return target // 100


@dataclass(frozen=True)
class CompositionSpec:
    per_source_image_quota: Mapping[str, int]
    target_object_count: int | None = None
    balance_tolerance: int | None = None
    category_id: int | None = None  # count only this category; None counts every object

    def __post_init__(self):
        object.__setattr__(self, "per_source_image_quota", dict(self.per_source_image_quota))
        for name, quota in self.per_source_image_quota.items():
            if quota <= 0:
                raise CompositionError(f"quota for {name!r} must be positive, got {quota}")
        if self.target_object_count is not None and self.target_object_count <= 0:
            raise CompositionError("target_object_count must be positive")
        if self.balance_tolerance is not None and self.balance_tolerance < 0:
            raise CompositionError("balance_tolerance must be non-negative")

    @property
    def tolerance(self) -> int:
        if self.balance_tolerance is not None:
            return self.balance_tolerance
        if self.target_object_count is None:
            return 0
        return default_tolerance(self.target_object_count)


@dataclass(frozen=True)
class CompositionResult:
    dataset: Dataset
    object_count: int
    target_object_count: int | None
    within_tolerance: bool
    per_source: dict[str, int] = field(default_factory=dict)


def _object_count(rec: ImageRecord, category_id: int | None) -> int:
    if category_id is None:
        return len(rec.ground_truth)
    return sum(1 for obj in rec.ground_truth if obj.category_id == category_id)


class _Pool:
    """One source's images split into selected / unselected, by object count."""

    def __init__(self, order: list[ImageRecord], quota: int, category_id: int | None):
        self.counts = {rec.image_id: _object_count(rec, category_id) for rec in order}
        self.records = {rec.image_id: rec for rec in order}
        self.order = [rec.image_id for rec in order]
        self.selected = set(self.order[:quota])

    @property
    def total(self) -> int:
        return sum(self.counts[i] for i in self.selected)

    def best_swap(self, gap: int):
        """Swap (out_id, in_id, delta) minimizing |gap - delta|, ties by ids."""
        lowest_out: dict[int, str] = {}
        lowest_in: dict[int, str] = {}
        for image_id, c in self.counts.items():
            bucket = lowest_out if image_id in self.selected else lowest_in
            if c not in bucket or image_id < bucket[c]:
                bucket[c] = image_id
        best = None
        for c_out, out_id in lowest_out.items():
            for c_in, in_id in lowest_in.items():
                delta = c_in - c_out
                key = (abs(gap - delta), out_id, in_id)
                if best is None or key < best[0]:
                    best = (key, out_id, in_id, delta)
        return None if best is None else best[1:]


def _reachable_tables(counts: list[int], k: int) -> list[list[int]]:
    """tables[i][j]: bitmask of sums reachable choosing j of the first i items."""
    row = [1] + [0] * k
    tables = [row]
    for i, c in enumerate(counts, start=1):
        nxt = list(row)
        for j in range(min(i, k), 0, -1):
            nxt[j] |= row[j - 1] << c
        tables.append(nxt)
        row = nxt
    return tables


def _reconstruct(tables, counts: list[int], k: int, total: int) -> list[int]:
    chosen = []
    j, s = k, total
    for i in range(len(counts), 0, -1):
        if (tables[i - 1][j] >> s) & 1:
            continue
        chosen.append(i - 1)
        j -= 1
        s -= counts[i - 1]
    if j or s:
        raise AssertionError("inconsistent subset-sum table")
    return chosen


def _exact_repair(pools: list[_Pool], quotas: list[int], target: int, tolerance: int) -> bool:
    """Re-select images so the total lands within tolerance, if any selection can.

    Subset-sum over each source (choose exactly its quota), processed in the
    seeded order. Among feasible totals, the one closest to the target wins,
    lower totals first on ties. Returns False when nothing is feasible.
    """
    tables, reach = [], []
    for pool, k in zip(pools, quotas):
        counts = [pool.counts[i] for i in pool.order]
        t = _reachable_tables(counts, k)
        tables.append((t, counts))
        reach.append(t[-1][k])
    a_mask, b_mask = reach
    best = None
    for sa in range(a_mask.bit_length()):
        if not (a_mask >> sa) & 1:
            continue
        for d in range(tolerance + 1):
            hits = [sb for sb in (target - sa - d, target - sa + d) if sb >= 0 and (b_mask >> sb) & 1]
            if hits:
                key = (d, sa + hits[0], sa)
                if best is None or key < best[0]:
                    best = (key, sa, hits[0])
                break
    if best is None:
        return False
    for pool, k, (t, counts), s in zip(pools, quotas, tables, best[1:]):
        pool.selected = {pool.order[i] for i in _reconstruct(t, counts, k, s)}
    return True


def compose_mixed(a: Dataset, b: Dataset, spec: CompositionSpec, seed: int = 0) -> CompositionResult:
    """Draw the quota of images from each source, steering the object total.

    Each source is shuffled with ``seed`` (after sorting by id, so input order
    does not matter) and its first ``quota`` images are taken. With a target,
    greedy swaps within a source then close the gap to the target; if they
    stall outside tolerance, an exact subset-sum search decides whether a
    quota-respecting selection within tolerance exists and uses it.
    """
    if a.name == b.name:
        raise CompositionError(f"source datasets need distinct names, both are {a.name!r}")
    if dict(a.categories) != dict(b.categories):
        raise CompositionError(f"category tables differ: {a.categories} vs {b.categories}")
    quotas = spec.per_source_image_quota
    if set(quotas) != {a.name, b.name}:
        raise CompositionError(f"quotas must name exactly the sources {a.name!r} and {b.name!r}, got {sorted(quotas)}")
    for src in (a, b):
        if quotas[src.name] > len(src):
            raise CompositionError(
                f"infeasible quota: {quotas[src.name]} images requested from {src.name!r}, which has {len(src)}"
            )
    shared = check_disjoint(a, b)
    if shared:
        raise CompositionError(f"sources share image ids, e.g. {sorted(shared)[0]!r}")

    rng = random.Random(seed)
    pools = []
    for src in (a, b):
        order = sorted(src.images, key=lambda r: r.image_id)
        rng.shuffle(order)
        pools.append(_Pool(order, quotas[src.name], spec.category_id))

    target = spec.target_object_count
    tolerance = spec.tolerance
    within = True
    if target is not None:
        total = sum(p.total for p in pools)
        while abs(target - total) > tolerance:
            gap = target - total
            options = [(p, p.best_swap(gap)) for p in pools]
            options = [(p, s) for p, s in options if s is not None]
            if not options:
                break
            pool, (out_id, in_id, delta) = min(options, key=lambda o: (abs(gap - o[1][2]), o[1][0], o[1][1]))
            if abs(gap - delta) >= abs(gap):
                break
            pool.selected.remove(out_id)
            pool.selected.add(in_id)
            total += delta
        if abs(target - total) > tolerance:
            if _exact_repair(pools, [quotas[a.name], quotas[b.name]], target, tolerance):
                log.debug("greedy swaps stalled; exact search found a balanced selection")
            else:
                log.warning("no selection meets the object target %d within %d", target, tolerance)
                within = False

    images = []
    for pool in pools:
        images += [pool.records[i] for i in pool.order if i in pool.selected]
    images.sort(key=lambda r: r.image_id)
    name = f"mixed({a.name}:{quotas[a.name]}+{b.name}:{quotas[b.name]},seed={seed})"
    dataset = Dataset(name, a.categories, tuple(images))
    count = sum(p.total for p in pools)
    return CompositionResult(
        dataset=dataset,
        object_count=count,
        target_object_count=target,
        within_tolerance=within if target is not None else True,
        per_source={src.name: p.total for src, p in zip((a, b), pools)},
    )


def check_disjoint(train: Dataset, test: Dataset) -> set[str]:
    """Image ids present in both datasets (empty when disjoint)."""
    return set(train.image_ids) & set(test.image_ids)
