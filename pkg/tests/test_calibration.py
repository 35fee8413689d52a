import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msrank.calibration import (
    ConfigError,
    TestConfig,
    conditional_quantile,
    detect_intervals,
    exact_null_distribution,
    p_value,
    quantile_rank,
    run_test,
    sign_draws,
    simulate_null,
)
from msrank.kernels import make_kernel
from msrank.ranks import Dataset
from msrank.report import emit_report
from msrank.statistic import ScanResult, build_coefficients, scan

RECT = make_kernel("rectangular")
EPA = make_kernel("epanechnikov")

HI = 3 / math.sqrt(5) - math.sqrt(2 * math.log(2))
LO = 1 / math.sqrt(5) - math.sqrt(2 * math.log(2))


def two_point_table():
    return build_coefficients(Dataset([0.5, 1.0], [1.0, -2.0]), RECT)


def test_quantile_examples():
    s = np.arange(1, 10)
    assert conditional_quantile(s, 0.1) == 9
    assert conditional_quantile(s, 0.5) == 5
    assert quantile_rank(0.1, 999) == 900
    with pytest.raises(ConfigError):
        conditional_quantile(s, 0.05)


def test_config_validation():
    with pytest.raises(ConfigError):
        TestConfig(alpha=0.01, replicates=50)
    with pytest.raises(ConfigError):
        TestConfig(alpha=1.0)
    with pytest.raises(ConfigError):
        TestConfig(replicates=0)
    with pytest.raises(ConfigError):
        TestConfig(seed=-1)
    TestConfig(alpha=0.5, replicates=1)


def test_sign_streams_are_counter_based():
    full = sign_draws(42, 0, 9, 130)
    np.testing.assert_array_equal(sign_draws(42, 5, 9, 130), full[5:])
    assert set(np.unique(full)) == {-1.0, 1.0}
    assert not np.array_equal(sign_draws(43, 0, 9, 130), full)
    masked = sign_draws(42, 0, 9, 130, zero_mask=np.arange(130) == 3)
    assert (masked[:, 3] == 0).all()


def test_single_replicate_reproducible():
    table = build_coefficients(Dataset(np.arange(7), [1.0, -0.2, 0.5, 3.0, -1.1, 0.7, 0.05]), EPA)
    a = simulate_null(table, 1, seed=9)
    b = simulate_null(table, 1, seed=9)
    assert a[0] == b[0] == scan(table, sign_draws(9, 0, 1, 7)[0]).t_n


def test_two_point_null_law():
    table = two_point_table()
    ex = exact_null_distribution(table)
    np.testing.assert_allclose(ex.values, [LO, HI], atol=1e-15)
    assert ex.probabilities == [Fraction(1, 2), Fraction(1, 2)]
    assert sum(ex.probabilities) == 1
    sims = simulate_null(table, 10_000, seed=1)
    assert set(np.round(sims, 12)) == {round(LO, 12), round(HI, 12)}
    assert abs(np.mean(np.isclose(sims, HI)) - 0.5) <= 0.015


def test_exact_null_refuses_large_n():
    table = build_coefficients(Dataset(np.arange(13), np.arange(1, 14)), RECT)
    with pytest.raises(ConfigError):
        exact_null_distribution(table)


def test_mc_mean_matches_exact(rng):
    for n in (5, 9, 12):
        d = Dataset(np.arange(n), rng.standard_t(3, n))
        table = build_coefficients(d, EPA)
        ex = exact_null_distribution(table)
        assert sum(ex.probabilities) == 1
        sims = simulate_null(table, 4000, seed=n)
        se = sims.std(ddof=1) / math.sqrt(len(sims))
        assert abs(sims.mean() - ex.mean()) <= 3 * se


def test_exact_null_with_zero_observation():
    d = Dataset(np.arange(4), [0.0, 1.0, -2.0, 0.5])
    ex = exact_null_distribution(build_coefficients(d, RECT), zero_mask=d.y == 0)
    assert ex.total == 8


def test_thread_count_does_not_change_output(rng):
    d = Dataset(np.arange(30), rng.standard_normal(30))
    table = build_coefficients(d, EPA)
    ref = simulate_null(table, 300, seed=3, threads=1)
    for k in (2, 4, 8):
        np.testing.assert_array_equal(simulate_null(table, 300, seed=3, threads=k), ref)


def test_p_value():
    null = np.array([0.1, 0.5, 0.9, 0.5])
    assert p_value(null, 0.5) == 4 / 5
    assert p_value(null, 2.0) == 1 / 5
    assert p_value(null, -1.0) == 1.0


def fake_scan(windows, excess, t=None):
    j = np.array([w[0] for w in windows])
    k = np.array([w[1] for w in windows])
    excess = np.asarray(excess, dtype=float)
    pen = np.ones(len(windows))
    t = excess + pen if t is None else np.asarray(t, dtype=float)
    return ScanResult(float(excess.max()), j, k, t, pen, excess)


def test_detection_nested_and_empty():
    d = Dataset(np.arange(1, 13) / 12, np.zeros(12))
    s = fake_scan([(1, 10), (2, 4), (3, 5), (6, 12)], [2.0, 0.5, 2.5, 1.5])
    det = detect_intervals(s, 1.0, d)
    assert [(iv.j, iv.k) for iv in det.intervals] == [(1, 10), (3, 5), (6, 12)]
    assert [(iv.j, iv.k) for iv in det.minimal] == [(3, 5), (6, 12)]
    assert det.intervals[0].x_j == d.x[0] and det.intervals[0].x_k == d.x[9]
    assert not detect_intervals(s, 3.0, d)


def test_one_sided_detection():
    d = Dataset(np.arange(1, 5), np.zeros(4))
    s = fake_scan([(1, 2), (2, 4)], [2.0, 2.0], t=[-3.0, 3.0])
    assert [iv.direction for iv in detect_intervals(s, 1.0, d).intervals] == ["-", "+"]
    assert [(iv.j, iv.k) for iv in detect_intervals(s, 1.0, d, one_sided=True).intervals] == [(2, 4)]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 30), st.integers(1, 30), st.floats(-2, 3)), min_size=1, max_size=40, unique_by=lambda r: (min(r[0], r[1]), max(r[0], r[1]))), st.floats(-1, 2), st.floats(0, 1))
def test_detection_set_properties(rows, kappa, bump):
    rows = [(min(a, b), max(a, b) + 1, e) for a, b, e in rows]
    d = Dataset(np.arange(32), np.zeros(32))
    s = fake_scan([(a, b) for a, b, _ in rows], [e for _, _, e in rows])
    det = detect_intervals(s, kappa, d)
    hits = {(iv.j, iv.k) for iv in det.intervals}
    mins = {(iv.j, iv.k) for iv in det.minimal}
    assert hits == {(a, b) for a, b, e in rows if e > kappa + 1e-10}
    for a, b in hits:
        inside = [(c, e) for c, e in hits if a <= c and e <= b]
        assert ((a, b) in mins) == (inside == [(a, b)])
        assert any(a <= c and e <= b for c, e in mins)
    tighter = {(iv.j, iv.k) for iv in detect_intervals(s, kappa + bump, d).intervals}
    assert tighter <= hits
    assert bool(hits) == (s.t_n > kappa + 1e-10)


def test_run_test_contract(rng):
    x = np.arange(1, 41) / 40
    y = rng.standard_t(3, 40) + np.where((x > 0.3) & (x < 0.6), 2.5, 0.0)
    d = Dataset(x, y)
    cfg = TestConfig(alpha=0.1, replicates=199, seed=77)
    r = run_test(d, cfg, threads=1)
    assert r.reject == (r.t_n > r.kappa) == bool(r.minimal_intervals) == (r.p_value <= 0.1)
    assert 1 / 200 <= r.p_value <= 1
    assert r.kappa == np.sort(r.calibration.null_samples)[179]
    assert r.reject
    assert emit_report(run_test(d, cfg, threads=4)) == emit_report(r)
    for iv in r.intervals:
        assert abs(iv.t) - iv.penalty > r.kappa


def test_run_test_keeps_zero_signs():
    d = Dataset(np.arange(6), [0.0, 1.0, -2.0, 0.0, 0.4, -0.3])
    r = run_test(d, TestConfig(alpha=0.5, replicates=63, kernel=RECT, seed=2))
    assert r.n == 6 and 0 < r.p_value <= 1
