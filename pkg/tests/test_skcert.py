import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thresholds import models, skcert
from thresholds.rng import split

# frozen oracle window: 2000 brute-force draws at n = 18 give mean 1.296, 30-draw stderr 0.028
SK18_WINDOW = (1.18, 1.41)


def brute_itertools(W):
    n = len(W)
    return max(np.array(x) @ W @ np.array(x) for x in itertools.product([-1, 1], repeat=n)) / n


def test_bruteforce_small_cases():
    assert skcert.sk_bruteforce(np.array([[2.5]])).value == 2.5
    assert np.isclose(skcert.sk_bruteforce(np.ones((4, 4)) / 4).value, 1)
    with pytest.raises(ValueError):
        skcert.sk_bruteforce(np.zeros((23, 23)))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2 ** 32))
def test_bruteforce_matches_itertools(n, seed):
    W = models.sample_goe(n, "normalized", rng=seed)
    r = skcert.sk_bruteforce(W)
    assert np.isclose(r.value, brute_itertools(W))
    assert set(np.unique(r.argmax)) <= {-1.0, 1.0}


def test_certificates_examples():
    assert skcert.abssum_cert(np.zeros((3, 3))).value == 0
    I = np.eye(6)
    assert np.isclose(skcert.spectral_cert(I).value, 1) and np.isclose(skcert.sk_bruteforce(I).value, 1)
    assert np.isclose(skcert.sign_rounding_search(I)[1], 1)
    with pytest.raises(ValueError):
        skcert.spectral_cert(np.triu(np.ones((3, 3))))
    with pytest.raises(NotImplementedError):
        skcert.sdp_cert(I)


def test_soundness_and_sandwich_n16():
    rows = skcert.sk_sandwich(16, 50, rng=0)
    assert all(r.ordered for r in rows)
    m = lambda a: np.mean([getattr(r, a) for r in rows])
    assert m("search") <= m("brute") <= m("spectral")


def test_sk18_window_and_slepian_slack():
    vals = np.array([skcert.sk_bruteforce(models.sample_goe(18, "normalized", g)).value for g in split(7, 30)])
    assert SK18_WINDOW[0] <= vals.mean() <= SK18_WINDOW[1]
    assert np.mean(vals <= skcert.slepian_bound_constant() + 0.15) >= 0.9


def test_slepian():
    assert abs(skcert.slepian_bound_constant() - 1.59577) < 1e-5
    assert skcert.PARISI_CONSTANT < skcert.slepian_bound_constant() < 2
    mean, se = skcert.slepian_mc_check(2000, 200, rng=0)
    assert abs(mean / skcert.slepian_bound_constant() - 1) < 0.02


def test_abssum_growth():
    n = 1000
    W = models.sample_goe(n, "normalized", rng=0)
    assert abs(skcert.abssum_cert(W).value / n ** 1.5 / np.sqrt(2 / np.pi) - 1) < 0.05


def test_auc():
    assert skcert.auc([0, 1], [2, 3]) == 1 and skcert.auc([2, 3], [0, 1]) == 0
    assert skcert.auc([1, 1], [1, 1]) == 0.5


def test_planting_value_and_auc_small():
    rows = skcert.quiet_planting_experiment(300, [0.0, 2.0], 40, rng=0)
    for r in rows:
        assert abs(r.planted_value - r.c) < 3 * r.planted_stderr
    assert rows[1].auc > 0.95
    with pytest.raises(ValueError):
        skcert.quiet_planting_experiment(10, [3.5], 2)
