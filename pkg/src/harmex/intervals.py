"""Finite unions of disjoint half-open subintervals of [0, 1).

Radius-level sets are represented this way throughout: a right endpoint
equal to 1.0 means the closure of the set reaches the boundary sphere,
which is the divergence case for logarithmic-measure integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

_MERGE_EPS = 1e-15


@dataclass(frozen=True)
class IntervalSet:
    """Sorted disjoint union of intervals [a_i, b_i) with 0 <= a_i < b_i <= 1."""

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        prev_b = -1.0
        for a, b in self.intervals:
            if not (0.0 <= a < b <= 1.0):
                raise ValueError(f"invalid interval [{a}, {b}): endpoints must satisfy 0 <= a < b <= 1")
            if a < prev_b:
                raise ValueError("intervals must be sorted and disjoint; use from_pairs() to normalize")
            prev_b = b

    @staticmethod
    def empty() -> "IntervalSet":
        return IntervalSet(())

    @staticmethod
    def from_pairs(pairs: Iterable[Sequence[float]]) -> "IntervalSet":
        """Build from arbitrary (a, b) pairs, sorting and merging overlaps."""
        cleaned = sorted((float(a), float(b)) for a, b in pairs if float(b) > float(a))
        merged: list[list[float]] = []
        for a, b in cleaned:
            if merged and a <= merged[-1][1] + _MERGE_EPS:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return IntervalSet(tuple((a, b) for a, b in merged))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def touches_one(self) -> bool:
        """True when the closure of the set reaches r = 1."""
        return bool(self.intervals) and self.intervals[-1][1] >= 1.0

    def contains(self, r: float) -> bool:
        return any(a <= r < b for a, b in self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.from_pairs(list(self.intervals) + list(other.intervals))

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    out.append((lo, hi))
        return IntervalSet.from_pairs(out)

    def complement(self) -> "IntervalSet":
        """Complement within [0, 1)."""
        out = []
        cursor = 0.0
        for a, b in self.intervals:
            if a > cursor:
                out.append((cursor, a))
            cursor = max(cursor, b)
        if cursor < 1.0:
            out.append((cursor, 1.0))
        return IntervalSet.from_pairs(out)
