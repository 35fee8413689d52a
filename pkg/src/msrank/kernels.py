"""Kernel weight functions on the unit interval.

A kernel is evaluated on ``[0, 1]`` and rescaled to any window ``[s, t]``
by the affine map ``x -> (x - s) / (t - s)``.  Positive multiples of a
kernel give identical local statistics, so no normalizing constants are
carried.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kernel",
    "KernelError",
    "UnsupportedKernelError",
    "make_kernel",
    "parse_kernel",
    "rescale_eval",
    "gamma_norm_sq",
]

KINDS = ("rectangular", "epanechnikov", "holder")
# integer codes shared with the compiled core
KIND_CODES = {"rectangular": 0, "epanechnikov": 1, "holder": 2}


class KernelError(ValueError):
    """Invalid kernel parameter or degenerate window."""


class UnsupportedKernelError(KernelError):
    """Requested kernel has no closed form available here."""


@dataclass(frozen=True)
class Kernel:
    kind: str
    beta: float | None = None

    def __call__(self, x):
        """Evaluate the kernel at ``x`` (scalar or array) in ``[0, 1]``."""
        u = np.asarray(x, dtype=float)
        if self.kind == "rectangular":
            out = np.ones_like(u)
        elif self.kind == "epanechnikov":
            v = 2.0 * u - 1.0
            out = 1.0 - v * v
        else:
            out = 1.0 - np.abs(2.0 * u - 1.0) ** self.beta
        if out.ndim == 0:
            return float(out)
        return out

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    @property
    def param(self) -> float:
        return 1.0 if self.beta is None else float(self.beta)

    def label(self) -> str:
        """Short CLI form: ``rect``, ``epa`` or ``holder:<beta>``."""
        if self.kind == "rectangular":
            return "rect"
        if self.kind == "epanechnikov":
            return "epa"
        return f"holder:{self.beta!r}"


def make_kernel(kind: str, beta: float | None = None) -> Kernel:
    """Build a kernel.

    Parameters
    ----------
    kind : {"rectangular", "epanechnikov", "holder"}
    beta : float, optional
        Hölder smoothness, required for ``kind="holder"``.  Only
        ``0 < beta <= 1`` is supported: the optimal kernel is then
        ``1 - |2x - 1|**beta``.

    Raises
    ------
    KernelError
        Unknown kind, missing or nonpositive beta.
    UnsupportedKernelError
        ``beta > 1``.
    """
    if kind not in KINDS:
        raise KernelError(f"unknown kernel kind {kind!r}; expected one of {KINDS}")
    if kind != "holder":
        if beta is not None:
            raise KernelError(f"kernel {kind!r} takes no beta")
        return Kernel(kind)
    if beta is None:
        raise KernelError("holder kernel requires beta")
    beta = float(beta)
    if not np.isfinite(beta) or beta <= 0:
        raise KernelError(f"beta must be positive, got {beta}")
    if beta > 1:
        raise UnsupportedKernelError(
            f"optimal kernel for beta={beta} > 1 has no closed form; use 0 < beta <= 1"
        )
    return Kernel("holder", beta)


def parse_kernel(text: str) -> Kernel:
    """Parse ``rect``, ``epa`` or ``holder:<beta>``."""
    name, _, arg = text.strip().partition(":")
    aliases = {
        "rect": "rectangular",
        "rectangular": "rectangular",
        "epa": "epanechnikov",
        "epanechnikov": "epanechnikov",
        "holder": "holder",
    }
    if name not in aliases:
        raise KernelError(f"cannot parse kernel {text!r}")
    if aliases[name] == "holder":
        if not arg:
            raise KernelError("holder kernel needs a beta, e.g. holder:0.5")
        try:
            beta = float(arg)
        except ValueError:
            raise KernelError(f"bad beta in {text!r}") from None
        return make_kernel("holder", beta)
    if arg:
        raise KernelError(f"kernel {name!r} takes no parameter")
    return make_kernel(aliases[name])


def rescale_eval(k: Kernel, s: float, t: float, x):
    """Evaluate ``k`` rescaled to the window ``[s, t]`` at ``x``."""
    if not s < t:
        raise KernelError(f"degenerate window: s={s} must be < t={t}")
    return k((np.asarray(x, dtype=float) - s) / (t - s))


def gamma_norm_sq(beta: float) -> float:
    """Squared L2 norm of ``(1 - |x|**beta)`` on ``[-1, 1]``."""
    if not 0 < beta <= 1:
        raise KernelError(f"beta must lie in (0, 1], got {beta}")
    return 2.0 * (1.0 - 2.0 / (beta + 1.0) + 1.0 / (2.0 * beta + 1.0))
