"""Local midranks of absolute responses.

Window indices in the public API are 1-based and inclusive, ``1 <= j < k <= n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

__all__ = [
    "Dataset",
    "DataError",
    "RankTable",
    "local_midranks",
    "abs_groups",
    "window_rank_stream",
]


class DataError(ValueError):
    """Input data violates the model's preconditions."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design points ``x`` (strictly increasing) with responses ``y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
            raise DataError(f"x and y must be 1-d of equal length, got {x.shape} and {y.shape}")
        if len(x) < 2:
            raise DataError(f"need at least 2 observations, got {len(x)}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("x and y must be finite")
        bad = np.flatnonzero(np.diff(x) <= 0)
        if bad.size:
            raise DataError(f"x must be strictly increasing; violated at x={x[bad[0] + 1]!r}")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.x)

    def signs(self) -> np.ndarray:
        """``sign(y)`` as float64, with ``sign(0) = 0``."""
        return np.sign(self.y)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    __hash__ = None


@dataclass(frozen=True)
class RankTable:
    j: int
    k: int
    midranks: np.ndarray = field(repr=False)


def local_midranks(absvals) -> np.ndarray:
    """Midranks of ``absvals``; ties share the average of the ranks they span.

    Equals ``sum_l (1{a_l < a_i} + 1{a_l == a_i} / 2) + 1/2`` for each ``i``.
    """
    a = np.asarray(absvals, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("absvals must be a nonempty 1-d sequence")
    srt = np.sort(a)
    less = np.searchsorted(srt, a, side="left")
    leq = np.searchsorted(srt, a, side="right")
    return (less + leq + 1) / 2.0


def abs_groups(y) -> np.ndarray:
    """Dense rank of ``|y|`` (0-based), equal values share a group."""
    a = np.abs(np.asarray(y, dtype=float))
    _, inv = np.unique(a, return_inverse=True)
    return inv.astype(np.intp).ravel()


class _Fenwick:
    __slots__ = ("tree",)

    def __init__(self, size: int):
        self.tree = np.zeros(size + 1, dtype=np.int64)

    def add(self, i: int, v: int = 1) -> None:
        i += 1
        tree = self.tree
        while i < len(tree):
            tree[i] += v
            i += i & -i

    def prefix(self, i: int) -> int:
        """Sum over positions ``< i``."""
        s = 0
        tree = self.tree
        while i > 0:
            s += tree[i]
            i -= i & -i
        return int(s)


def window_rank_stream(d: Dataset, j: int, groups: np.ndarray | None = None) -> Iterator[RankTable]:
    """Yield midranks for windows ``(j, k)``, ``k = j+1, ..., n``.

    The rank of each newly added point comes from an order-statistic
    counter keyed by the global ordering of ``|y|``; the existing ranks are
    shifted in one vectorized pass.  The yielded arrays are fresh copies.
    """
    n = d.n
    if not 1 <= j < n:
        raise ValueError(f"need 1 <= j < n={n}, got j={j}")
    if groups is None:
        groups = abs_groups(d.y)
    counter = _Fenwick(int(groups.max()) + 1)
    ranks = np.empty(n - j + 1)
    start = j - 1
    g0 = groups[start]
    counter.add(g0)
    ranks[0] = 1.0
    for m in range(1, n - j + 1):
        i = start + m
        g = groups[i]
        less = counter.prefix(g)
        equal = counter.prefix(g + 1) - less
        prev = groups[start:i]
        ranks[:m] += (prev > g) + 0.5 * (prev == g)
        ranks[m] = less + 0.5 * equal + 1.0
        counter.add(g)
        yield RankTable(j, j + m, ranks[: m + 1].copy())
