"""Detection constants for symmetric error laws.

Fisher information ``I(f)``, the density mass ``int f**2``, the lower and
upper sup-norm detection constants for Hölder alternatives, the rate
``((log n) / n) ** (beta / (2 beta + 1))`` and the efficiency ratio
``12 (int f**2)**2 / I(f)`` of the signed-rank test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .kernels import gamma_norm_sq

__all__ = [
    "ErrorLaw",
    "TheoryConstants",
    "parse_law",
    "fisher_information",
    "density_l2",
    "efficiency_ratio",
    "detection_constants",
    "rate_rho",
    "theory_constants",
]

FAMILIES = ("normal", "laplace", "logistic", "student_t")


@dataclass(frozen=True)
class ErrorLaw:
    """Symmetric error law.

    ``param`` is the standard deviation for ``normal``, the rate ``lam`` of
    the density ``lam/2 exp(-lam |x|)`` for ``laplace``, the scale for
    ``logistic`` and the degrees of freedom for ``student_t``.
    """

    family: str
    param: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unsupported error law {self.family!r}; expected one of {FAMILIES}")
        if not (math.isfinite(self.param) and self.param > 0):
            raise ValueError(f"{self.family} parameter must be positive, got {self.param}")
        if self.family == "student_t" and self.param < 1:
            raise ValueError(f"student_t needs nu >= 1, got {self.param}")

    def label(self) -> str:
        name = "t" if self.family == "student_t" else self.family
        return f"{name}:{self.param:g}"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.param
        if self.family == "normal":
            return np.exp(-0.5 * (x / p) ** 2) / (p * math.sqrt(2 * math.pi))
        if self.family == "laplace":
            return 0.5 * p * np.exp(-p * np.abs(x))
        if self.family == "logistic":
            z = np.exp(-np.abs(x) / p)
            return z / (p * (1 + z) ** 2)
        nu = p
        c = math.exp(math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2)) / math.sqrt(nu * math.pi)
        return c * (1 + x * x / nu) ** (-(nu + 1) / 2)

    def score(self, x):
        """``f'(x) / f(x)``."""
        x = np.asarray(x, dtype=float)
        p = self.param
        if self.family == "normal":
            return -x / p**2
        if self.family == "laplace":
            return -p * np.sign(x)
        if self.family == "logistic":
            return -np.tanh(x / (2 * p)) / p
        return -(p + 1) * x / (p + x * x)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        p = self.param
        if self.family == "normal":
            return rng.normal(0.0, p, size)
        if self.family == "laplace":
            return rng.laplace(0.0, 1.0 / p, size)
        if self.family == "logistic":
            return rng.logistic(0.0, p, size)
        z = rng.standard_normal(size)
        v = rng.chisquare(p, size)
        return z / np.sqrt(v / p)

    def std(self) -> float:
        """Standard deviation (``inf`` for t with ``nu <= 2``)."""
        p = self.param
        if self.family == "normal":
            return p
        if self.family == "laplace":
            return math.sqrt(2.0) / p
        if self.family == "logistic":
            return p * math.pi / math.sqrt(3.0)
        return math.sqrt(p / (p - 2)) if p > 2 else math.inf


def parse_law(text: str) -> ErrorLaw:
    """``normal:1``, ``laplace:1``, ``logistic:1`` or ``t:3``."""
    name, _, arg = text.strip().partition(":")
    name = {"t": "student_t", "student": "student_t", "gauss": "normal"}.get(name, name)
    default = 3.0 if name == "student_t" else 1.0
    try:
        return ErrorLaw(name, float(arg) if arg else default)
    except ValueError as exc:
        raise ValueError(f"cannot parse error law {text!r}: {exc}") from None


def _symmetric_integral(g) -> float:
    val, _ = integrate.quad(g, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=500)
    return 2.0 * val


def fisher_information(law: ErrorLaw, method: str = "auto") -> float:
    """``int (f'/f)**2 f``; closed form where known unless ``method="quadrature"``."""
    p = law.param
    if method == "auto":
        if law.family == "normal":
            return p**-2
        if law.family == "laplace":
            return p**2
        if law.family == "logistic":
            return 1.0 / (3.0 * p**2)
    elif method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    return _symmetric_integral(lambda x: float(law.score(x)) ** 2 * float(law.pdf(x)))


def density_l2(law: ErrorLaw, method: str = "auto") -> float:
    """``int f(y)**2 dy``."""
    p = law.param
    if method == "auto":
        if law.family == "normal":
            return 1.0 / (2.0 * p * math.sqrt(math.pi))
        if law.family == "laplace":
            return p / 4.0
        if law.family == "logistic":
            return 1.0 / (6.0 * p)
    elif method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    return _symmetric_integral(lambda x: float(law.pdf(x)) ** 2)


def efficiency_ratio(law: ErrorLaw, method: str = "auto") -> float:
    return 12.0 * density_l2(law, method) ** 2 / fisher_information(law, method)


def _boundary(beta: float, L: float, info: float) -> float:
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    base = 2.0 * L ** (1.0 / beta) / ((2.0 * beta + 1.0) * info * gamma_norm_sq(beta))
    return base ** (beta / (2.0 * beta + 1.0))


def detection_constants(beta: float, L: float, law: ErrorLaw) -> tuple[float, float]:
    """Lower bound constant (any test) and the constant the signed-rank test attains."""
    lower = _boundary(beta, L, fisher_information(law))
    upper = _boundary(beta, L, 12.0 * density_l2(law) ** 2)
    return lower, upper


def rate_rho(n: float, beta: float) -> float:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return (math.log(n) / n) ** (beta / (2.0 * beta + 1.0))


@dataclass(frozen=True)
class TheoryConstants:
    law: str
    beta: float
    L: float
    n: int
    fisher: float
    l2mass: float
    d_star_lower: float
    d_star_upper: float
    rate: float
    efficiency: float

    def rate_at(self, n: float) -> float:
        return rate_rho(n, self.beta)


def theory_constants(law: ErrorLaw, beta: float = 1.0, L: float = 1.0, n: int = 100) -> TheoryConstants:
    lower, upper = detection_constants(beta, L, law)
    return TheoryConstants(
        law=law.label(),
        beta=float(beta),
        L=float(L),
        n=int(n),
        fisher=fisher_information(law),
        l2mass=density_l2(law),
        d_star_lower=lower,
        d_star_upper=upper,
        rate=rate_rho(n, beta),
        efficiency=efficiency_ratio(law),
    )
