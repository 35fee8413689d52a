"""Local signed-rank statistics, scale penalty and the multiscale maximum.

For a window ``(j, k)`` the coefficients are ``psi_jk(x_i) * R_jk(i)`` where
``R_jk`` are the midranks of ``|y_j|, ..., |y_k|``.  The local statistic is
``sum c_i sign(y_i) / sqrt(sum c_i**2)`` (zero when the denominator
vanishes), and the multiscale statistic is the maximum over windows of
``|T_jk| - sqrt(2 log(n / (k - j)))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _backend
from .kernels import Kernel
from .ranks import Dataset, abs_groups

__all__ = [
    "WindowPolicy",
    "WindowRecord",
    "ScanResult",
    "CoefficientTable",
    "local_statistic",
    "penalty",
    "enumerate_windows",
    "build_coefficients",
    "scan",
    "max_excess",
    "MAX_STORED_COEFFS",
]

MAX_STORED_COEFFS = 20_000_000
# replicates per work unit; fixed so results never depend on the thread count
CHUNK = 64


@dataclass(frozen=True)
class WindowPolicy:
    """Which windows enter the maximum.

    ``exhaustive`` scans every pair ``j < k`` with ``k - j + 1 >= min_window``.
    ``dyadic`` scans sizes on a geometric grid (ratio sqrt 2) with left
    endpoints on a stride of ``max(1, size // 8)``; it approximates the
    exhaustive maximum from below.
    """

    name: str = "exhaustive"
    min_window: int = 2

    def __post_init__(self):
        if self.name not in ("exhaustive", "dyadic"):
            raise ValueError(f"unknown window policy {self.name!r}")
        if self.min_window < 2:
            raise ValueError(f"min_window must be >= 2, got {self.min_window}")

    @classmethod
    def default_for(cls, n: int, min_window: int = 2) -> "WindowPolicy":
        return cls("exhaustive" if n <= 500 else "dyadic", min_window)


@dataclass(frozen=True)
class WindowRecord:
    j: int
    k: int
    t: float
    penalty: float
    excess: float


def local_statistic(coeffs, signs) -> float:
    c = np.asarray(coeffs, dtype=float)
    s = np.asarray(signs, dtype=float)
    if c.shape != s.shape or c.ndim != 1 or c.size == 0:
        raise ValueError(f"coeffs and signs must be nonempty 1-d of equal length, got {c.shape}, {s.shape}")
    ss = float(np.dot(c, c))
    if ss <= 0:
        return 0.0
    return float(np.dot(c, s) / math.sqrt(ss))


def penalty(n: int, j: int, k: int) -> float:
    if not 1 <= j < k <= n:
        raise ValueError(f"invalid window (j={j}, k={k}) for n={n}")
    return math.sqrt(2.0 * math.log(n / (k - j)))


def _dyadic_sizes(n: int, m_min: int) -> list[int]:
    sizes = []
    m = m_min
    while m < n:
        sizes.append(m)
        m = max(m + 1, int(round(m * math.sqrt(2.0))))
    sizes.append(n)
    return sizes


def enumerate_windows(n: int, policy: WindowPolicy) -> tuple[np.ndarray, np.ndarray]:
    """0-based starts and lengths of the scanned windows, in ``(j, k)`` order."""
    m_min = policy.min_window
    if m_min > n:
        raise ValueError(f"min_window={m_min} exceeds n={n}")
    if policy.name == "exhaustive":
        starts, lengths = [], []
        for s in range(n - m_min + 1):
            ls = np.arange(m_min, n - s + 1)
            starts.append(np.full(ls.size, s))
            lengths.append(ls)
        st = np.concatenate(starts)
        ln = np.concatenate(lengths)
    else:
        pairs = set()
        for m in _dyadic_sizes(n, m_min):
            stride = max(1, m // 8)
            for s in range(0, n - m + 1, stride):
                pairs.add((s, m))
            pairs.add((n - m, m))
        ordered = sorted(pairs)
        st = np.array([p[0] for p in ordered])
        ln = np.array([p[1] for p in ordered])
    return st.astype(np.intp), ln.astype(np.intp)


@dataclass(eq=False)
class CoefficientTable:
    """Per-window coefficients reused by every Monte Carlo replicate.

    In ``"precomputed"`` mode all coefficients are stored in one flat array.
    Past ``MAX_STORED_COEFFS`` the table switches to ``"on_the_fly"`` and
    rebuilds the coefficients one left endpoint at a time whenever a batch of
    replicates is scanned.
    """

    n: int
    x: np.ndarray = field(repr=False)
    groups: np.ndarray = field(repr=False)
    kernel: Kernel
    policy: WindowPolicy
    use_ranks: bool
    starts: np.ndarray = field(repr=False)
    lengths: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)
    sumsq: np.ndarray = field(repr=False)
    denom: np.ndarray = field(repr=False)
    penalty: np.ndarray = field(repr=False)
    coeffs: np.ndarray | None = field(repr=False)
    mode: str = "precomputed"

    @property
    def n_windows(self) -> int:
        return len(self.starts)

    @property
    def total_coeffs(self) -> int:
        return int(self.lengths.sum())

    def windows(self) -> list[tuple[int, int]]:
        """1-based ``(j, k)`` pairs in scan order."""
        return [(int(s) + 1, int(s + m)) for s, m in zip(self.starts, self.lengths)]

    def coefficients(self, w: int) -> np.ndarray:
        """Coefficients of window number ``w`` (scan order)."""
        if self.coeffs is not None:
            off = self.offsets[w]
            return self.coeffs[off : off + self.lengths[w]].copy()
        sl = slice(w, w + 1)
        c, _ = self._build(sl)
        return c

    def _build(self, sl: slice) -> tuple[np.ndarray, np.ndarray]:
        st = np.ascontiguousarray(self.starts[sl])
        ln = np.ascontiguousarray(self.lengths[sl])
        off = np.zeros(len(ln), dtype=np.intp)
        if len(ln) > 1:
            off[1:] = np.cumsum(ln[:-1])
        c = np.empty(int(ln.sum()))
        ss = np.empty(len(ln))
        _backend.core.build_coefficients(
            self.x, self.groups, self.kernel.code, self.kernel.param, self.use_ranks, st, ln, off, c, ss
        )
        return c, ss

    def blocks(self) -> Iterator[tuple[slice, np.ndarray, np.ndarray]]:
        """Yield ``(window slice, coefficients, local offsets)`` for scanning."""
        if self.coeffs is not None:
            yield slice(0, self.n_windows), self.coeffs, self.offsets
            return
        bounds = np.flatnonzero(np.diff(self.starts)) + 1
        bounds = np.concatenate(([0], bounds, [self.n_windows]))
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            sl = slice(int(lo), int(hi))
            c, _ = self._build(sl)
            off = self.offsets[sl] - self.offsets[lo]
            yield sl, c, np.ascontiguousarray(off)


def _make_table(x, groups, kern, policy, use_ranks, max_coeffs) -> CoefficientTable:
    n = len(x)
    starts, lengths = enumerate_windows(n, policy)
    offsets = np.zeros(len(lengths), dtype=np.intp)
    offsets[1:] = np.cumsum(lengths[:-1])
    pen = np.sqrt(2.0 * np.log(n / (lengths - 1.0)))
    total = int(lengths.sum())
    table = CoefficientTable(
        n=n,
        x=np.ascontiguousarray(x, dtype=float),
        groups=np.ascontiguousarray(groups, dtype=np.intp),
        kernel=kern,
        policy=policy,
        use_ranks=use_ranks,
        starts=starts,
        lengths=lengths,
        offsets=offsets,
        sumsq=np.empty(len(lengths)),
        denom=np.empty(len(lengths)),
        penalty=pen,
        coeffs=None,
        mode="precomputed" if total <= max_coeffs else "on_the_fly",
    )
    if table.mode == "precomputed":
        table.coeffs, table.sumsq = table._build(slice(None))
    else:
        # one pass for the denominators; coefficients are discarded
        bounds = np.flatnonzero(np.diff(starts)) + 1
        bounds = np.concatenate(([0], bounds, [len(starts)]))
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            _, table.sumsq[lo:hi] = table._build(slice(int(lo), int(hi)))
    table.denom = np.sqrt(table.sumsq)
    return table


def build_coefficients(
    d: Dataset, kern: Kernel, policy: WindowPolicy | None = None, max_coeffs: int = MAX_STORED_COEFFS
) -> CoefficientTable:
    """Coefficient table of the signed-rank statistic for dataset ``d``.

    Depends on ``y`` only through the ordering of ``|y|``.
    """
    if policy is None:
        policy = WindowPolicy.default_for(d.n)
    return _make_table(d.x, abs_groups(d.y), kern, policy, True, max_coeffs)


def build_weights(x, kern: Kernel, policy: WindowPolicy, max_coeffs: int = MAX_STORED_COEFFS) -> CoefficientTable:
    """Table of plain kernel weights ``psi_jk(x_i)`` (no ranks)."""
    x = np.asarray(x, dtype=float)
    return _make_table(x, np.zeros(len(x), dtype=np.intp), kern, policy, False, max_coeffs)


@dataclass(eq=False)
class ScanResult:
    """Per-window statistics and their penalized maximum ``t_n``.

    Window indices ``j``, ``k`` are 1-based.
    """

    t_n: float
    j: np.ndarray = field(repr=False)
    k: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    penalty: np.ndarray = field(repr=False)
    excess: np.ndarray = field(repr=False)

    @property
    def records(self) -> list[WindowRecord]:
        return [
            WindowRecord(int(j), int(k), float(t), float(p), float(e))
            for j, k, t, p, e in zip(self.j, self.k, self.t, self.penalty, self.excess)
        ]


def scan(table: CoefficientTable, signs) -> ScanResult:
    """Evaluate every window of ``table`` against ``signs`` (length ``n``)."""
    v = np.ascontiguousarray(signs, dtype=float)
    if v.shape != (table.n,):
        raise ValueError(f"signs must have length {table.n}, got shape {v.shape}")
    t = np.empty(table.n_windows)
    for sl, c, off in table.blocks():
        out = np.empty(sl.stop - sl.start)
        _backend.core.window_stats(
            c,
            np.ascontiguousarray(table.starts[sl]),
            np.ascontiguousarray(table.lengths[sl]),
            off,
            np.ascontiguousarray(table.denom[sl]),
            v,
            out,
        )
        t[sl] = out
    excess = np.abs(t) - table.penalty
    return ScanResult(
        t_n=float(excess.max()),
        j=table.starts + 1,
        k=table.starts + table.lengths,
        t=t,
        penalty=table.penalty.copy(),
        excess=excess,
    )


def _max_excess_chunk(table: CoefficientTable, values: np.ndarray) -> np.ndarray:
    out = np.full(values.shape[0], -np.inf)
    for sl, c, off in table.blocks():
        _backend.core.max_excess(
            c,
            np.ascontiguousarray(table.starts[sl]),
            np.ascontiguousarray(table.lengths[sl]),
            off,
            np.ascontiguousarray(table.denom[sl]),
            np.ascontiguousarray(table.penalty[sl]),
            values,
            out,
        )
    return out


def max_excess(table: CoefficientTable, draw, n_rep: int, threads: int | None = None) -> np.ndarray:
    """Penalized maximum for replicates ``0 .. n_rep - 1``.

    ``draw(b0, b1)`` must return the ``(b1 - b0, n)`` value matrix for
    replicates ``b0 .. b1 - 1``; replicates are processed in fixed chunks,
    so the output is identical for every ``threads`` setting.
    """
    chunks = [(b0, min(b0 + CHUNK, n_rep)) for b0 in range(0, n_rep, CHUNK)]

    def work(bounds):
        vals = np.ascontiguousarray(draw(*bounds), dtype=float)
        return _max_excess_chunk(table, vals)

    if threads is None:
        threads = _default_threads()
    if threads <= 1 or len(chunks) <= 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)


def _default_threads() -> int:
    import os

    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1
