"""Select the compiled core when available, else the numpy fallback.

Set ``MSRANK_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pycore

core = _pycore
name = "python"

if os.environ.get("MSRANK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as core  # type: ignore[no-redef]

        name = "cython"
    except ImportError:  # pragma: no cover - depends on build
        pass


def use(backend: str) -> None:
    """Switch the active backend (``"cython"`` or ``"python"``)."""
    global core, name
    if backend == "python":
        core, name = _pycore, "python"
    elif backend == "cython":
        from . import _core

        core, name = _core, "cython"
    else:
        raise ValueError(f"unknown backend {backend!r}")
