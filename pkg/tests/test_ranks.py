import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msrank.ranks import DataError, Dataset, local_midranks, window_rank_stream


def midranks_by_definition(a):
    """Direct double sum: sum_l (1{a_l < a_i} + 1{a_l == a_i}/2) + 1/2."""
    return np.array([sum((al < ai) + 0.5 * (al == ai) for al in a) + 0.5 for ai in a])


def test_examples():
    np.testing.assert_array_equal(local_midranks([2, 2, 5]), [1.5, 1.5, 3])
    np.testing.assert_array_equal(local_midranks([3, 1, 2]), [3, 1, 2])
    np.testing.assert_array_equal(local_midranks([7]), [1])


small_vals = st.lists(st.integers(0, 6).map(float), min_size=1, max_size=25)


@settings(max_examples=300, deadline=None)
@given(small_vals)
def test_matches_definition_and_sum_identity(vals):
    r = local_midranks(vals)
    np.testing.assert_array_equal(r, midranks_by_definition(vals))
    m = len(vals)
    assert r.sum() == m * (m + 1) / 2
    assert r.min() >= 1 and r.max() <= m


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=20, unique=True))
def test_distinct_values_give_permutation(vals):
    r = local_midranks(vals)
    assert sorted(r) == list(range(1, len(vals) + 1))


@settings(max_examples=200, deadline=None)
@given(small_vals)
def test_monotone_invariance(vals):
    a = np.array(vals)
    for g in (np.sqrt, np.exp, lambda v: 3 * v + v**3):
        np.testing.assert_array_equal(local_midranks(g(a)), local_midranks(a))


def test_stream_examples():
    d = Dataset([1, 2, 3], [1, -2, 3])
    tabs = list(window_rank_stream(d, 1))
    assert [(t.j, t.k) for t in tabs] == [(1, 2), (1, 3)]
    np.testing.assert_array_equal(tabs[0].midranks, [1, 2])
    np.testing.assert_array_equal(tabs[1].midranks, [1, 2, 3])
    tied = list(window_rank_stream(Dataset([1, 2, 3], [2, -2, 5]), 1))
    np.testing.assert_array_equal(tied[1].midranks, [1.5, 1.5, 3])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-4, 4).map(float), min_size=2, max_size=20), st.data())
def test_stream_equals_naive(ys, data):
    d = Dataset(np.arange(len(ys)), ys)
    j = data.draw(st.integers(1, len(ys) - 1))
    for tab in window_rank_stream(d, j):
        naive = local_midranks(np.abs(d.y[tab.j - 1 : tab.k]))
        np.testing.assert_array_equal(tab.midranks, naive)


def test_stream_rejects_bad_start():
    d = Dataset([0, 1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        next(window_rank_stream(d, 3))


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset([1.0], [2.0])
    with pytest.raises(DataError, match="strictly increasing"):
        Dataset([1, 1, 2], [0, 0, 0])
    with pytest.raises(DataError):
        Dataset([1, 2], [0, 0, 0])
    d = Dataset([1, 2], [0.0, -3.0])
    np.testing.assert_array_equal(d.signs(), [0.0, -1.0])
    with pytest.raises(ValueError):
        d.x[0] = 5.0
