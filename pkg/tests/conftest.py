import numpy as np
import pytest

from msrank import _backend


def _available():
    names = ["python"]
    try:
        from msrank import _core  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names


BACKENDS = _available()


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Run the test once per available compute backend."""
    previous = _backend.name
    _backend.use(request.param)
    yield request.param
    _backend.use(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
