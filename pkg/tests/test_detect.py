import numpy as np
import pytest
from hypothesis import given, strategies as st

from thresholds import detect, models
from thresholds.overlaps import rademacher_overlaps


def normal(mu):
    return lambda g, m: mu + g.standard_normal(m)


def test_separation_gaussian_shift():
    r = detect.separation_ratio(lambda x: x, normal(10.0), normal(0.0), 20000, rng=0, vectorized=True)
    assert abs(r.ratio - 0.1) < 0.005
    r = detect.separation_ratio(lambda x: x, normal(0.0), normal(0.0), 20000, rng=1, vectorized=True)
    assert r.classification == "none"


def test_separation_constant_statistic():
    r = detect.separation_ratio(lambda x: 0 * x + 3, normal(1.0), normal(0.0), 200, vectorized=True)
    assert r.ratio == np.inf and r.classification == "none"
    with pytest.raises(ValueError):
        detect.separation_ratio(lambda x: x, normal(1.0), normal(0.0), 50)


def test_threshold_test():
    out = detect.threshold_test(lambda x: x, 5.0, normal(10.0), normal(0.0), 100000, vectorized=True)
    assert out.type_i_error < 1e-4 and out.type_ii_error < 1e-4
    same = detect.threshold_test(lambda x: x, 0.3, normal(0.0), normal(0.0), 100000, vectorized=True)
    assert abs(same.error_sum - 1) < 0.02
    t = detect.midpoint_threshold(lambda x: x, normal(2.0), normal(0.0), 10000, vectorized=True)
    assert abs(t - 1) < 0.05


@given(st.floats(0.1, 10), st.floats(-2, 2))
def test_threshold_scale_invariance(c, thr):
    a = detect.threshold_test(lambda x: x, thr, normal(1.0), normal(0.0), 200, rng=3, vectorized=True)
    b = detect.threshold_test(lambda x: c * x, c * thr, normal(1.0), normal(0.0), 200, rng=3, vectorized=True)
    assert (a.type_i_error, a.type_ii_error) == (b.type_i_error, b.type_ii_error)


def test_lr_second_moment():
    for prior in ["rademacher", "gaussian"]:
        assert detect.lr_second_moment(models.PriorSpec(prior), 0.0, 50).value == 1.0
    vals = [detect.lr_second_moment(models.PriorSpec(), 0.5, n).value for n in (100, 200, 400)]
    lim = detect.rademacher_lr_limit(0.5)
    gaps = [abs(v - lim) for v in vals]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-3
    logs = [detect.lr_second_moment(models.PriorSpec(), 1.5, n).log_value for n in (100, 200, 400)]
    slopes = np.diff(logs) / np.diff([100, 200, 400])
    assert slopes.min() > 0 and abs(slopes[1] / slopes[0] - 1) < 0.2


def test_lr_second_moment_mc_matches_exact():
    ex = detect.lr_second_moment(models.PriorSpec(), 0.5, 100)
    mc = detect.lr_second_moment(models.PriorSpec(), 0.5, 100, mc_budget=200000, exact=False)
    assert abs(ex.value - mc.value) < 4 * mc.stderr


def test_subgaussian_tails():
    assert detect.subgaussian_tail_bound(1.0, 0.0) == 2.0
    assert np.isclose(detect.subgaussian_tail_bound(1.0, 2.0), 2 * np.exp(-2))
    rad = lambda g, m: g.choice([-1.0, 1.0], size=m)
    p, se = detect.empirical_tail(rad, 2.0, 100000)
    assert p == 0
    n = 50
    sums = lambda g, m: 2.0 * g.binomial(n, 0.5, size=m) - n
    for a in [np.sqrt(n), 2 * np.sqrt(n), 3 * np.sqrt(n)]:
        p, se = detect.empirical_tail(sums, a, 100000, rng=1)
        assert p <= detect.subgaussian_tail_bound(n, a) + 3 * se


def test_spectral_helpers():
    I = np.eye(5)
    assert np.isclose(detect.lambda_max(I), 1.0)
    assert detect.spectral_test(I, 0.5) and not detect.spectral_test(I, 1.5)
    with pytest.raises(ValueError):
        detect.spectral_test(np.triu(np.ones((3, 3))), 0)
    assert detect.bbp_overlap_limit(0.5) == 0 and detect.bbp_overlap_limit(2) == 0.5


def test_top_eigenpair_lanczos_branch(monkeypatch):
    W = models.sample_goe(300, rng=0)
    w_dense, v_dense = detect.top_eigenpair(W)
    monkeypatch.setattr(detect, "DENSE_LIMIT", 100)
    w_l, v_l = detect.top_eigenpair(W)
    assert abs(w_dense - w_l) < 1e-8 and abs(abs(v_dense @ v_l) - 1) < 1e-6


def test_triangle_small_cases():
    assert detect.signed_triangle_stat(np.zeros((5, 5)), 0.0) == 0
    K4 = np.ones((4, 4)) - np.eye(4)
    assert detect.signed_triangle_stat(K4, 0.0) == 4
    with pytest.raises(ValueError):
        detect.signed_triangle_stat(np.zeros((2, 2)), 0.0)


def test_triangle_implementations_agree():
    g = np.random.default_rng(0)
    for _ in range(100):
        n = int(g.integers(3, 60))
        q = float(g.uniform(0, 0.9))
        A = np.triu((g.random((n, n)) < g.uniform(0, 1)).astype(float), 1)
        A = A + A.T
        a, b = detect.signed_triangle_stat(A, q), detect.signed_triangle_stat_trace(A, q)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_triangle_formulas():
    assert detect.triangle_moment_formulas(100, 10, 0.1, 0.0, 1)[0] == 0
    assert np.isclose(detect.triangle_moment_formulas(100, 10, 0.3, 0.1, 1)[0], 1 / 6)


def test_triangle_spec_params_mean():
    # k = 150 of n = 300 vertices carry labels; 200 draws
    n, k, q, s, M = 300, 150, 0.2, 0.05, 2
    vals = np.array([detect.signed_triangle_stat_trace(
        models.sample_binary_community(n, k, q, s, M, rng=i).observation.dense(np.float64), q) for i in range(200)])
    mean = detect.triangle_moment_formulas(n, k, q, s, M)[0]
    assert abs(vals.mean() - mean) < 3 * vals.std(ddof=1) / np.sqrt(200) + abs(
        mean - detect.triangle_exact_mean(n, k, s, M))
