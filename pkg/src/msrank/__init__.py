"""Multiscale signed-rank goodness-of-fit test for nonparametric regression.

Tests ``l = 0`` in ``y_i = l(x_i) + e_i`` with symmetric, possibly
heteroscedastic errors.  The test statistic combines kernel-weighted local
signed-rank statistics over all design subintervals and is calibrated by
Monte Carlo conditional on the ranks of ``|y|``, which makes it exact in
finite samples.  Rejections come with the family of subintervals on which
the regression function deviates significantly from zero.
"""

__version__ = "0.1.0"

from . import _backend  # noqa: E402
from .calibration import (  # noqa: E402
    TestConfig,
    conditional_quantile,
    detect_intervals,
    exact_null_distribution,
    run_test,
    simulate_null,
)
from .kernels import Kernel, gamma_norm_sq, make_kernel, parse_kernel, rescale_eval  # noqa: E402
from .ranks import Dataset, local_midranks, window_rank_stream  # noqa: E402
from .report import TestReport, emit_report, parse_report  # noqa: E402
from .statistic import WindowPolicy, build_coefficients, local_statistic, penalty, scan  # noqa: E402


def backend() -> str:
    """Name of the active compute backend: ``"cython"`` or ``"python"``."""
    return _backend.name


__all__ = [
    "Dataset",
    "Kernel",
    "TestConfig",
    "TestReport",
    "WindowPolicy",
    "backend",
    "build_coefficients",
    "conditional_quantile",
    "detect_intervals",
    "emit_report",
    "exact_null_distribution",
    "gamma_norm_sq",
    "local_midranks",
    "local_statistic",
    "make_kernel",
    "parse_kernel",
    "parse_report",
    "penalty",
    "rescale_eval",
    "run_test",
    "scan",
    "simulate_null",
    "window_rank_stream",
]
