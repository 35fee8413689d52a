"""Synthetic data and level / power / robustness experiments.

Each dataset ``i`` of an experiment draws from its own stream derived from
``(seed, i)``, so results do not depend on how datasets are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .calibration import TestConfig, run_test
from .gaussian import GaussianScanConfig, gaussian_calibrate, gaussian_table, gaussian_test
from .ranks import Dataset
from .theory import ErrorLaw, rate_rho

__all__ = [
    "DesignDensity",
    "SignalSpec",
    "NoiseSpec",
    "gen_design",
    "gen_dataset",
    "default_signal",
    "RateResult",
    "LevelResult",
    "PowerResult",
    "RobustnessResult",
    "run_level_experiment",
    "run_power_experiment",
    "run_robustness_comparison",
]


@dataclass(frozen=True)
class DesignDensity:
    """Design density on ``[0, 1]``.

    ``uniform``; ``linear`` with density proportional to ``1 + c x``
    (``c > -1``); ``custom`` with a user quantile function and, optionally,
    its density.
    """

    kind: str = "uniform"
    c: float = 0.0
    quantile: Callable | None = field(default=None, compare=False)
    density_fn: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("uniform", "linear", "custom"):
            raise ValueError(f"unknown design kind {self.kind!r}")
        if self.kind == "linear" and not self.c > -1:
            raise ValueError(f"linear design needs c > -1 for a positive density, got {self.c}")
        if self.kind == "custom" and self.quantile is None:
            raise ValueError("custom design needs a quantile function")

    def inverse_cdf(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform" or (self.kind == "linear" and self.c == 0):
            return u.copy()
        if self.kind == "linear":
            c = self.c
            return (np.sqrt(1.0 + 2.0 * c * u * (1.0 + c / 2.0)) - 1.0) / c
        return np.asarray(self.quantile(u), dtype=float)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            return np.ones_like(x)
        if self.kind == "linear":
            return (1.0 + self.c * x) / (1.0 + self.c / 2.0)
        if self.density_fn is None:
            raise ValueError("custom design has no density function")
        return np.asarray(self.density_fn(x), dtype=float)


def _gamma(u, beta):
    a = np.abs(u)
    return np.where(a <= 1.0, 1.0 - a**beta, 0.0)


@dataclass(frozen=True)
class SignalSpec:
    """Regression function under the alternative.

    Kinds: ``zero``; ``constant`` (value ``amplitude``); ``bump``
    (``amplitude * (1 - |(x - center) / halfwidth| ** beta)`` on its
    support); ``sum`` of ``components``; ``samples`` (values given on the
    design).  With ``couple_density`` the values are divided by ``sqrt(h(x))``.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    center: float = 0.5
    halfwidth: float = 0.1
    beta: float = 1.0
    components: tuple["SignalSpec", ...] = ()
    samples: tuple[float, ...] | None = None
    couple_density: bool = False

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "bump", "sum", "samples"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.kind == "bump" and not (self.halfwidth > 0 and self.beta > 0):
            raise ValueError("bump needs positive halfwidth and beta")
        if self.kind == "samples" and self.samples is None:
            raise ValueError("samples signal needs values")

    def scaled(self, amplitude: float) -> "SignalSpec":
        """Copy with overall size ``amplitude`` (components scaled proportionally)."""
        if self.kind == "sum":
            ref = max((abs(c.amplitude) for c in self.components), default=0.0) or 1.0
            return replace(self, components=tuple(replace(c, amplitude=c.amplitude * amplitude / ref) for c in self.components))
        if self.kind == "zero":
            return replace(self, kind="constant", amplitude=amplitude)
        return replace(self, amplitude=amplitude)

    def values(self, x, dd: DesignDensity | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            v = np.zeros_like(x)
        elif self.kind == "constant":
            v = np.full_like(x, self.amplitude)
        elif self.kind == "bump":
            v = self.amplitude * _gamma((x - self.center) / self.halfwidth, self.beta)
        elif self.kind == "sum":
            v = np.zeros_like(x)
            for c in self.components:
                v = v + replace(c, couple_density=False).values(x)
        else:
            v = np.asarray(self.samples, dtype=float)
            if v.shape != x.shape:
                raise ValueError(f"signal has {v.size} samples for {x.size} design points")
        if self.couple_density:
            v = v / np.sqrt((dd or DesignDensity()).density(x))
        return v


def default_signal(amplitude: float = 2.0) -> SignalSpec:
    """Two triangular bumps of opposite sign."""
    return SignalSpec(
        kind="sum",
        components=(
            SignalSpec("bump", amplitude, 0.3, 0.1, 1.0),
            SignalSpec("bump", -amplitude, 0.7, 0.15, 1.0),
        ),
    )


@dataclass(frozen=True)
class NoiseSpec:
    """Error law times a scale profile ``sigma(x)``: ``constant`` (1),
    ``linear`` (``a + b x``) or ``samples``."""

    law: ErrorLaw = field(default_factory=lambda: ErrorLaw("normal", 1.0))
    hetero: str = "constant"
    a: float = 1.0
    b: float = 0.0
    samples: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.hetero not in ("constant", "linear", "samples"):
            raise ValueError(f"unknown scale profile {self.hetero!r}")
        if self.hetero == "linear" and not (self.a > 0 and self.a + self.b > 0):
            raise ValueError(f"linear scale profile must be positive on [0, 1], got a={self.a}, b={self.b}")
        if self.hetero == "samples" and (self.samples is None or min(self.samples) <= 0):
            raise ValueError("sample scale profile needs positive values")

    def scale(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.hetero == "constant":
            return np.ones_like(x)
        if self.hetero == "linear":
            return self.a + self.b * x
        s = np.asarray(self.samples, dtype=float)
        if s.shape != x.shape:
            raise ValueError(f"scale profile has {s.size} samples for {x.size} design points")
        return s

    def describe(self) -> str:
        if self.hetero == "linear":
            return f"{self.law.label()}*({self.a:g}+{self.b:g}x)"
        return self.law.label() if self.hetero == "constant" else f"{self.law.label()}*custom"


def gen_design(n: int, dd: DesignDensity | None = None) -> np.ndarray:
    """Design points ``H^{-1}(i/n)``, ``i = 1..n``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    dd = dd or DesignDensity()
    return dd.inverse_cdf(np.arange(1, n + 1) / n)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _substream_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1, np.uint64)[0])


def gen_dataset(
    n: int,
    dd: DesignDensity | None = None,
    sig: SignalSpec | None = None,
    ns: NoiseSpec | None = None,
    seed: int | np.random.Generator = 0,
) -> Dataset:
    """``y_i = l(x_i) + sigma(x_i) e_i`` with ``e_i`` i.i.d. from the noise law."""
    dd = dd or DesignDensity()
    sig = sig or SignalSpec()
    ns = ns or NoiseSpec()
    rng = seed if isinstance(seed, np.random.Generator) else _rng(seed)
    x = gen_design(n, dd)
    y = sig.values(x, dd) + ns.scale(x) * ns.law.sample(rng, n)
    return Dataset(x, y)


@dataclass(frozen=True)
class RateResult:
    rate: float
    se: float
    count: int
    M: int


def _rate(count: int, M: int) -> RateResult:
    p = count / M
    return RateResult(p, math.sqrt(p * (1 - p) / M), count, M)


def _map(fn, M: int, threads: int | None):
    if threads is None or threads <= 1:
        return [fn(i) for i in range(M)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(M)))


def _one_test(i, seed, n, dd, sig, ns, cfg):
    d = gen_dataset(n, dd, sig, ns, _rng(seed, i, 0))
    r = run_test(d, replace(cfg, seed=_substream_seed(seed, i, 1)), threads=1)
    return r.reject, bool(r.minimal_intervals)


@dataclass(frozen=True)
class LevelResult:
    n: int
    alpha: float
    noise: str
    size: RateResult

    def to_rows(self) -> list[dict]:
        return [{"noise": self.noise, "n": self.n, "alpha": self.alpha, "M": self.size.M,
                 "rejections": self.size.count, "rate": self.size.rate, "se": self.size.se}]


def run_level_experiment(
    M: int,
    n: int,
    dd: DesignDensity | None = None,
    ns: NoiseSpec | None = None,
    cfg: TestConfig | None = None,
    seed: int = 0,
    threads: int | None = None,
) -> LevelResult:
    """Rejection rate of the signed-rank test on ``M`` null datasets."""
    if M < 1:
        raise ValueError("M must be >= 1")
    cfg = cfg or TestConfig()
    ns = ns or NoiseSpec()
    res = _map(lambda i: _one_test(i, seed, n, dd, SignalSpec(), ns, cfg), M, threads)
    return LevelResult(n, cfg.alpha, ns.describe(), _rate(sum(r for r, _ in res), M))


@dataclass(frozen=True)
class PowerResult:
    n: int
    alpha: float
    noise: str
    beta: float
    amplitudes: tuple[float, ...]
    amplitudes_rho: tuple[float, ...]
    power: tuple[RateResult, ...]

    def to_rows(self) -> list[dict]:
        return [
            {"amplitude": a, "amplitude_rho": ar, "n": self.n, "alpha": self.alpha, "noise": self.noise,
             "M": p.M, "rejections": p.count, "rate": p.rate, "se": p.se}
            for a, ar, p in zip(self.amplitudes, self.amplitudes_rho, self.power)
        ]


def run_power_experiment(
    M: int,
    n: int,
    amplitudes: Sequence[float],
    signal: SignalSpec | None = None,
    dd: DesignDensity | None = None,
    ns: NoiseSpec | None = None,
    cfg: TestConfig | None = None,
    seed: int = 0,
    beta: float = 1.0,
    threads: int | None = None,
) -> PowerResult:
    """Rejection rate for ``signal`` scaled to each amplitude.

    The same noise draws are reused across amplitudes (common random
    numbers), which keeps the estimated curve close to monotone.
    """
    amps = tuple(float(a) for a in amplitudes)
    if not amps or min(amps) < 0:
        raise ValueError("amplitudes must be a nonempty list of nonnegative numbers")
    cfg = cfg or TestConfig()
    ns = ns or NoiseSpec()
    signal = signal or SignalSpec("constant", 1.0)
    rho = rate_rho(n, beta)
    power = []
    for a in amps:
        sig = signal.scaled(a)
        res = _map(lambda i: _one_test(i, seed, n, dd, sig, ns, cfg), M, threads)
        power.append(_rate(sum(r for r, _ in res), M))
    return PowerResult(n, cfg.alpha, ns.describe(), beta, amps, tuple(a / rho for a in amps), tuple(power))


@dataclass(frozen=True)
class RobustnessResult:
    n: int
    alpha: float
    noise: str
    signed_rank: RateResult
    gaussian: RateResult
    signed_rank_detections: int
    gaussian_detections: int
    gaussian_kappa: float

    def to_rows(self) -> list[dict]:
        return [
            {"test": "signed-rank", "noise": self.noise, "n": self.n, "alpha": self.alpha, "M": self.signed_rank.M,
             "rejections": self.signed_rank.count, "rate": self.signed_rank.rate, "se": self.signed_rank.se,
             "false_detection_datasets": self.signed_rank_detections},
            {"test": "gaussian-reference", "noise": self.noise, "n": self.n, "alpha": self.alpha, "M": self.gaussian.M,
             "rejections": self.gaussian.count, "rate": self.gaussian.rate, "se": self.gaussian.se,
             "false_detection_datasets": self.gaussian_detections},
        ]


def run_robustness_comparison(
    M: int,
    n: int,
    cfg: TestConfig | None = None,
    gauss_cfg: GaussianScanConfig | None = None,
    ns: NoiseSpec | None = None,
    dd: DesignDensity | None = None,
    seed: int = 0,
    threads: int | None = None,
) -> RobustnessResult:
    """Both tests on the same ``M`` null datasets (t3 noise by default).

    The reference test is standardized by the noise standard deviation
    unless ``gauss_cfg`` says otherwise.
    """
    ns = ns or NoiseSpec(ErrorLaw("student_t", 3.0))
    cfg = cfg or TestConfig()
    if gauss_cfg is None:
        gauss_cfg = GaussianScanConfig(sigma=ns.law.std(), alpha=cfg.alpha, replicates=cfg.replicates,
                                       seed=cfg.seed, kernel=cfg.kernel, policy=cfg.policy)
    if gauss_cfg.kernel != cfg.kernel or gauss_cfg.alpha != cfg.alpha or gauss_cfg.policy != cfg.policy:
        raise ValueError("both tests must share kernel, window policy and alpha")
    x = gen_design(n, dd)
    gtable = gaussian_table(x, gauss_cfg)
    calib = gaussian_calibrate(x, gauss_cfg, threads, gtable)

    def one(i):
        d = gen_dataset(n, dd, SignalSpec(), ns, _rng(seed, i, 0))
        r = run_test(d, replace(cfg, seed=_substream_seed(seed, i, 1)), threads=1)
        g = gaussian_test(d, gauss_cfg, threads=1, calibration=calib)
        return r.reject, bool(r.minimal_intervals), g.reject, bool(g.minimal_intervals)

    res = _map(one, M, threads)
    return RobustnessResult(
        n=n,
        alpha=cfg.alpha,
        noise=ns.describe(),
        signed_rank=_rate(sum(r[0] for r in res), M),
        gaussian=_rate(sum(r[2] for r in res), M),
        signed_rank_detections=sum(r[1] for r in res),
        gaussian_detections=sum(r[3] for r in res),
        gaussian_kappa=calib[0],
    )
