"""Rank-conditional calibration of the multiscale signed-rank test.

Under the null hypothesis the signs of the observations are i.i.d.
Rademacher variables independent of the ranks of ``|y|``, so the null law
of ``T_n`` given the ranks is obtained by rescanning the fixed coefficient
table with random sign vectors.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .kernels import Kernel, make_kernel
from .ranks import Dataset
from .report import DetectionSet, Interval, TestReport
from .statistic import CoefficientTable, ScanResult, WindowPolicy, build_coefficients, max_excess, scan

__all__ = [
    "ConfigError",
    "TestConfig",
    "CalibrationResult",
    "ExactNull",
    "TIE_TOL",
    "quantile_rank",
    "sign_draws",
    "normal_draws",
    "simulate_null",
    "exact_null_distribution",
    "conditional_quantile",
    "p_value",
    "detect_intervals",
    "run_test",
]

# values closer than this are treated as ties (counted against rejection)
TIE_TOL = 1e-10

_SIGN_STREAM = 0
_NORMAL_STREAM = 1


class ConfigError(ValueError):
    """Invalid test configuration."""


def quantile_rank(alpha: float, n_rep: int) -> int:
    """Order-statistic rank ``ceil((1 - alpha) * (B + 1))``, computed exactly."""
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    if n_rep < 1:
        raise ConfigError(f"need at least one replicate, got {n_rep}")
    a = Fraction(repr(float(alpha)))
    return math.ceil((1 - a) * (n_rep + 1))


@dataclass(frozen=True)
class TestConfig:
    alpha: float = 0.1
    replicates: int = 999
    seed: int = 0
    kernel: Kernel = field(default_factory=lambda: make_kernel("epanechnikov"))
    policy: WindowPolicy | None = None
    one_sided: bool = False

    __test__ = False

    def __post_init__(self):
        r = quantile_rank(self.alpha, self.replicates)
        if r > self.replicates:
            raise ConfigError(
                f"alpha={self.alpha} needs more than {self.replicates} replicates "
                f"(quantile rank {r} > B)"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(eq=False)
class CalibrationResult:
    kappa: float
    null_samples: np.ndarray = field(repr=False)
    p_value: float


def _stream(seed: int, b: int, domain: int) -> np.random.Philox:
    return np.random.Philox(key=int(seed), counter=[0, 0, int(b), domain])


def sign_draws(seed: int, b0: int, b1: int, n: int, zero_mask=None) -> np.ndarray:
    """Rademacher sign vectors for replicates ``b0 .. b1 - 1``.

    Replicate ``b`` depends only on ``(seed, b)``.  Positions in
    ``zero_mask`` (observations equal to zero) keep sign 0.
    """
    words = -(-n // 64)
    out = np.empty((b1 - b0, n))
    for r, b in enumerate(range(b0, b1)):
        raw = _stream(seed, b, _SIGN_STREAM).random_raw(words)
        bits = np.unpackbits(raw.astype("<u8").view(np.uint8), bitorder="little")[:n]
        out[r] = 2.0 * bits - 1.0
    if zero_mask is not None:
        out[:, np.asarray(zero_mask, dtype=bool)] = 0.0
    return out


def normal_draws(seed: int, b0: int, b1: int, n: int) -> np.ndarray:
    """Standard normal vectors for replicates ``b0 .. b1 - 1``."""
    out = np.empty((b1 - b0, n))
    for r, b in enumerate(range(b0, b1)):
        out[r] = np.random.Generator(_stream(seed, b, _NORMAL_STREAM)).standard_normal(n)
    return out


def simulate_null(
    table: CoefficientTable, n_rep: int, seed: int, threads: int | None = None, zero_mask=None
) -> np.ndarray:
    """``T_n`` for ``n_rep`` random sign vectors given the ranks in ``table``."""
    n = table.n
    return max_excess(table, lambda b0, b1: sign_draws(seed, b0, b1, n, zero_mask), n_rep, threads)


@dataclass(eq=False)
class ExactNull:
    """Discrete null law of ``T_n``: atoms with counts out of ``total`` sign vectors."""

    values: np.ndarray
    counts: np.ndarray
    total: int

    @property
    def probabilities(self) -> list[Fraction]:
        return [Fraction(int(c), self.total) for c in self.counts]

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cum = np.concatenate(([0], np.cumsum(self.counts)))
        idx = np.searchsorted(self.values, x + TIE_TOL, side="right")
        return cum[idx] / self.total

    def sf(self, x) -> np.ndarray:
        """``P(T_n > x)`` with ties at ``x`` counted as not exceeding."""
        return 1.0 - self.cdf(x)

    def mean(self) -> float:
        return float(np.dot(self.values, self.counts) / self.total)


def _merge_atoms(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    srt = np.sort(samples)
    new = np.concatenate(([True], np.diff(srt) > TIE_TOL))
    first = np.flatnonzero(new)
    counts = np.diff(np.concatenate((first, [len(srt)])))
    return srt[first], counts


def exact_null_distribution(table: CoefficientTable, n_limit: int = 12, zero_mask=None) -> ExactNull:
    """Enumerate all sign vectors; refuses when ``n > n_limit``."""
    n = table.n
    if n > n_limit:
        raise ConfigError(f"exact enumeration needs 2**{n} scans; n={n} exceeds n_limit={n_limit}")
    free = np.ones(n, dtype=bool)
    if zero_mask is not None:
        free &= ~np.asarray(zero_mask, dtype=bool)
    nf = int(free.sum())
    codes = np.arange(2**nf, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(nf)[None, :]) & 1
    signs = np.zeros((2**nf, n))
    signs[:, free] = 2.0 * bits - 1.0
    vals = max_excess(table, lambda b0, b1: signs[b0:b1], len(signs), threads=1)
    values, counts = _merge_atoms(vals)
    return ExactNull(values, counts, 2**nf)


def conditional_quantile(samples, alpha: float) -> float:
    """The ``ceil((1 - alpha)(B + 1))``-th smallest of ``samples``."""
    s = np.sort(np.asarray(samples, dtype=float))
    r = quantile_rank(alpha, len(s))
    if r > len(s):
        raise ConfigError(f"quantile rank {r} exceeds the number of samples {len(s)}")
    return float(s[r - 1])


def p_value(samples, t_obs: float) -> float:
    """Monte Carlo p-value ``(1 + #{samples >= t_obs}) / (B + 1)``."""
    s = np.asarray(samples, dtype=float)
    return float((1 + np.count_nonzero(s >= t_obs - TIE_TOL)) / (len(s) + 1))


def exceeds(value, kappa: float):
    return value > kappa + TIE_TOL


def detect_intervals(s: ScanResult, kappa: float, d: Dataset, one_sided: bool = False) -> DetectionSet:
    """Windows whose statistic clears ``penalty + kappa``, plus the minimal ones.

    Two-sided by default (``|T_jk|``); with ``one_sided`` only positive
    deviations ``T_jk > penalty + kappa`` are kept.
    """
    score = s.t - s.penalty if one_sided else s.excess
    hits = np.flatnonzero(exceeds(score, kappa))
    intervals = tuple(
        Interval(
            j=int(s.j[w]),
            k=int(s.k[w]),
            x_j=float(d.x[s.j[w] - 1]),
            x_k=float(d.x[s.k[w] - 1]),
            t=float(s.t[w]),
            penalty=float(s.penalty[w]),
            excess=float(s.excess[w]),
            direction="+" if s.t[w] > 0 else "-",
        )
        for w in hits
    )
    return DetectionSet(intervals, _minimal(intervals))


def _minimal(intervals) -> tuple[Interval, ...]:
    # sweep by right end; an interval is minimal iff no earlier one starts at or after it
    order = sorted(range(len(intervals)), key=lambda i: (intervals[i].k, -intervals[i].j))
    keep = set()
    best_j = -1
    for i in order:
        if intervals[i].j > best_j:
            keep.add(i)
        best_j = max(best_j, intervals[i].j)
    return tuple(iv for i, iv in enumerate(intervals) if i in keep)


def run_test(d: Dataset, cfg: TestConfig, threads: int | None = None, timing: bool = False) -> TestReport:
    """Multiscale signed-rank test of ``l = 0`` for dataset ``d``."""
    t0 = time.perf_counter()
    policy = cfg.policy or WindowPolicy.default_for(d.n)
    table = build_coefficients(d, cfg.kernel, policy)
    t1 = time.perf_counter()
    observed = scan(table, d.signs())
    zero_mask = d.y == 0
    null = simulate_null(table, cfg.replicates, cfg.seed, threads, zero_mask if zero_mask.any() else None)
    t2 = time.perf_counter()
    kappa = conditional_quantile(null, cfg.alpha)
    calib = CalibrationResult(kappa, null, p_value(null, observed.t_n))
    det = detect_intervals(observed, kappa, d, cfg.one_sided)
    return TestReport(
        method="signed-rank",
        version=__version__,
        n=d.n,
        alpha=float(cfg.alpha),
        replicates=cfg.replicates,
        seed=cfg.seed,
        kernel=cfg.kernel.label(),
        policy=policy.name,
        min_window=policy.min_window,
        one_sided=cfg.one_sided,
        table_mode=table.mode,
        t_n=observed.t_n,
        kappa=kappa,
        p_value=calib.p_value,
        reject=bool(exceeds(observed.t_n, kappa)),
        sigma=None,
        intervals=list(det.intervals),
        minimal_intervals=list(det.minimal),
        timing={"build_s": t1 - t0, "calibrate_s": t2 - t1} if timing else None,
        scan=observed,
        calibration=calib,
    )
