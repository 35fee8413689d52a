import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msrank.kernels import make_kernel
from msrank.ranks import Dataset
from msrank.statistic import (
    WindowPolicy,
    build_coefficients,
    enumerate_windows,
    local_statistic,
    max_excess,
    penalty,
    scan,
)

RECT = make_kernel("rectangular")
EPA = make_kernel("epanechnikov")
H1 = make_kernel("holder", 1.0)
KERNELS = [RECT, EPA, H1, make_kernel("holder", 0.5)]


def naive_scan(x, y, kern, m_min=2, scale=1.0):
    """Double loop straight from the definitions; no shared code with the library."""
    n = len(x)
    out = {}
    for j in range(n):
        for k in range(j + m_min - 1, n):
            a = np.abs(y[j : k + 1])
            ranks = [sum((al < ai) + 0.5 * (al == ai) for al in a) + 0.5 for ai in a]
            w = [scale * float(kern((x[i] - x[j]) / (x[k] - x[j]))) for i in range(j, k + 1)]
            c = [wi * ri for wi, ri in zip(w, ranks)]
            den = math.sqrt(sum(ci * ci for ci in c))
            num = sum(ci * np.sign(yi) for ci, yi in zip(c, y[j : k + 1]))
            t = num / den if den > 0 else 0.0
            pen = math.sqrt(2 * math.log(n / (k - j)))
            out[(j + 1, k + 1)] = (t, pen, abs(t) - pen)
    return out


def test_local_statistic_examples():
    assert local_statistic([1, 2, 3], [1, -1, 1]) == pytest.approx(2 / math.sqrt(14), abs=1e-15)
    assert local_statistic([0.0, 0.0], [1, -1]) == 0.0
    c, s = [0.3, 1.2, 2.5], np.array([1, -1, -1])
    assert local_statistic(c, -s) == -local_statistic(c, s)
    with pytest.raises(ValueError):
        local_statistic([1, 2], [1])


def test_penalty_examples():
    assert penalty(100, 1, 11) == pytest.approx(math.sqrt(2 * math.log(10)), abs=1e-15)
    assert penalty(100, 1, 11) == pytest.approx(2.14597, abs=1e-5)
    assert penalty(100, 1, 100) == pytest.approx(0.14178, abs=1e-5)
    assert penalty(5, 1, 5) > 0
    with pytest.raises(ValueError):
        penalty(10, 3, 3)


def test_window_enumeration_small():
    table = build_coefficients(Dataset([1, 2, 3], [1, -2, 3]), RECT, WindowPolicy())
    assert table.windows() == [(1, 2), (1, 3), (2, 3)]
    assert list(table.lengths) == [2, 3, 2]


def test_holder_coefficients_vanish_at_window_ends(backend):
    d = Dataset([1 / 3, 2 / 3, 1], [1, -2, 3])
    table = build_coefficients(d, H1, WindowPolicy())
    np.testing.assert_allclose(table.coefficients(1), [0.0, 2.0, 0.0], atol=1e-15)
    # size-2 windows have zero weights everywhere: statistic 0
    res = scan(table, d.signs())
    assert res.t[0] == 0.0 and res.t[2] == 0.0
    assert res.excess[0] == -res.penalty[0]


def test_positive_scaling_of_y_keeps_table(backend):
    y = np.array([0.4, -1.3, 2.2, -0.1, 0.9])
    a = build_coefficients(Dataset(np.arange(5), y), EPA)
    b = build_coefficients(Dataset(np.arange(5), 5 * y), EPA)
    np.testing.assert_array_equal(a.coeffs, b.coeffs)
    np.testing.assert_array_equal(a.denom, b.denom)


def test_scan_three_points(backend):
    d = Dataset([1 / 3, 2 / 3, 1], [1, -2, 3])
    res = scan(build_coefficients(d, RECT), d.signs())
    np.testing.assert_allclose(res.t, [-1 / math.sqrt(5), 2 / math.sqrt(14), 1 / math.sqrt(5)], atol=1e-15)
    np.testing.assert_allclose(res.penalty, [1.48230, 0.90052, 1.48230], atol=1e-5)
    assert res.t_n == pytest.approx(-0.36600, abs=1e-5)
    flipped = scan(build_coefficients(d, RECT), -d.signs())
    np.testing.assert_array_equal(flipped.t, -res.t)
    assert flipped.t_n == res.t_n


def test_scan_two_points(backend):
    d = Dataset([0.5, 1.0], [1.0, 2.0])
    res = scan(build_coefficients(d, RECT), d.signs())
    assert res.t[0] == pytest.approx(3 / math.sqrt(5), abs=1e-15)
    assert res.t_n == pytest.approx(0.164231, abs=1e-6)
    assert res.t_n == pytest.approx(3 / math.sqrt(5) - math.sqrt(2 * math.log(2)), abs=1e-15)


def test_records_and_invariants(backend, rng):
    y = rng.standard_t(3, 15)
    d = Dataset(np.sort(rng.uniform(size=15)), y)
    res = scan(build_coefficients(d, EPA), d.signs())
    recs = res.records
    assert len(recs) == 15 * 14 // 2
    assert res.t_n == max(r.excess for r in recs)
    for r in recs:
        assert r.excess == abs(r.t) - r.penalty
        assert abs(r.t) <= math.sqrt(r.k - r.j + 1) + 1e-12
        assert r.penalty > 0


@pytest.mark.parametrize("kern", KERNELS, ids=lambda k: k.label())
def test_scan_matches_naive_double_loop(backend, kern, rng):
    for _ in range(8):
        n = int(rng.integers(2, 31))
        x = np.sort(rng.uniform(0, 3, n))
        # rounding creates ties in |y|
        y = np.round(rng.standard_normal(n), 1)
        d = Dataset(x, y)
        m_min = int(rng.integers(2, min(n, 5) + 1))
        res = scan(build_coefficients(d, kern, WindowPolicy("exhaustive", m_min)), d.signs())
        ref = naive_scan(x, y, kern, m_min)
        assert [(int(j), int(k)) for j, k in zip(res.j, res.k)] == list(ref)
        want = np.array(list(ref.values()))
        np.testing.assert_allclose(res.t, want[:, 0], atol=1e-12)
        np.testing.assert_allclose(res.penalty, want[:, 1], atol=1e-14)
        assert res.t_n == pytest.approx(want[:, 2].max(), abs=1e-12)


def test_kernel_scale_invariance(rng):
    n = 12
    x, y = np.arange(n) / n, rng.standard_normal(n)
    d = Dataset(x, y)
    res = scan(build_coefficients(d, EPA), d.signs())
    ref = naive_scan(x, y, EPA, scale=7.5)
    np.testing.assert_allclose(res.t, [v[0] for v in ref.values()], atol=1e-12)


def test_conditional_variance_identity(rng):
    for _ in range(10):
        m = int(rng.integers(2, 11))
        d = Dataset(np.sort(rng.uniform(size=m)), rng.standard_normal(m))
        table = build_coefficients(d, KERNELS[int(rng.integers(4))])
        signs = np.array(list(itertools.product([-1.0, 1.0], repeat=m)))
        for w, (j, k) in enumerate(table.windows()):
            c = table.coefficients(w)
            second = np.mean((signs[:, j - 1 : k] @ c) ** 2)
            assert second == pytest.approx(table.denom[w] ** 2, rel=1e-12, abs=1e-300)
            assert table.denom[w] ** 2 == pytest.approx(np.dot(c, c), rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 14), st.integers(0, 2**32 - 1))
def test_odd_monotone_transform_invariance(n, seed):
    r = np.random.default_rng(seed)
    d = Dataset(np.arange(n), r.standard_normal(n))
    g = Dataset(d.x, np.sinh(3 * d.y) + d.y**3)
    a = scan(build_coefficients(d, EPA), d.signs())
    b = scan(build_coefficients(g, EPA), g.signs())
    np.testing.assert_array_equal(a.t, b.t)
    neg = Dataset(d.x, -d.y)
    assert scan(build_coefficients(neg, EPA), neg.signs()).t_n == a.t_n


def test_dyadic_policy_is_subset():
    n = 300
    st_e, ln_e = enumerate_windows(n, WindowPolicy("exhaustive"))
    st_d, ln_d = enumerate_windows(n, WindowPolicy("dyadic"))
    exh = set(zip(st_e.tolist(), ln_e.tolist()))
    dy = list(zip(st_d.tolist(), ln_d.tolist()))
    assert set(dy) <= exh
    assert dy == sorted(dy)
    assert len(dy) < len(exh) / 10
    assert (0, n) in dy and (n - 2, 2) in dy
    assert WindowPolicy.default_for(500).name == "exhaustive"
    assert WindowPolicy.default_for(501).name == "dyadic"


def test_on_the_fly_table_matches_precomputed(backend, rng):
    n = 25
    d = Dataset(np.arange(n), rng.standard_t(3, n))
    pre = build_coefficients(d, EPA)
    fly = build_coefficients(d, EPA, max_coeffs=0)
    assert pre.mode == "precomputed" and fly.mode == "on_the_fly" and fly.coeffs is None
    np.testing.assert_array_equal(pre.denom, fly.denom)
    np.testing.assert_array_equal(pre.coefficients(37), fly.coefficients(37))
    a, b = scan(pre, d.signs()), scan(fly, d.signs())
    np.testing.assert_array_equal(a.t, b.t)
    vals = np.where(rng.uniform(size=(9, n)) < 0.5, -1.0, 1.0)
    draw = lambda b0, b1: vals[b0:b1]  # noqa: E731
    np.testing.assert_array_equal(max_excess(pre, draw, 9), max_excess(fly, draw, 9))


def test_backends_agree(rng):
    from msrank import _backend

    n = 40
    d = Dataset(np.sort(rng.uniform(size=n)), np.round(rng.standard_t(3, n), 1))
    vals = np.where(rng.uniform(size=(70, n)) < 0.5, -1.0, 1.0)
    out = {}
    for name in ("cython", "python"):
        try:
            _backend.use(name)
        except ImportError:
            pytest.skip("compiled core not built")
        t = build_coefficients(d, make_kernel("holder", 0.5))
        out[name] = (t.coeffs, scan(t, d.signs()).t, max_excess(t, lambda b0, b1: vals[b0:b1], 70))
    _backend.use("cython")
    for a, b in zip(out["cython"], out["python"]):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
