import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thresholds import freeenergy as fe

GAUSS = fe.ScalarChannel("gaussian")
RAD = fe.ScalarChannel("rademacher")


def test_psi_examples():
    assert fe.scalar_psi(GAUSS, 0.0) == 0 and fe.scalar_psi(RAD, 0.0) == 0
    assert np.isclose(fe.scalar_psi(GAUSS, 1.0), (1 - np.log(2)) / 2)
    assert abs(fe.scalar_psi(GAUSS, 1.0) - 0.15343) < 1e-5


def test_psi_rademacher_vs_mc():
    g = np.random.default_rng(0)
    gam, m = 0.5, 10 ** 6
    X = g.choice([-1.0, 1.0], size=m)
    Z = g.standard_normal(m)
    # log int dP0(x) exp(...) for the two atoms
    vals = np.logaddexp(np.sqrt(gam) * Z + gam * X, -np.sqrt(gam) * Z - gam * X) - np.log(2) - gam / 2
    assert abs(fe.scalar_psi(RAD, gam) - vals.mean()) < 3 * vals.std() / np.sqrt(m)


def test_psi_prime_against_differences():
    # order 60 leaves ~1e-5 quadrature error at large gamma; order 200 isolates the derivative formula
    for order, tol in ((60, 1e-4), (200, 1e-7)):
        for ch in (fe.ScalarChannel("rademacher", order=order), fe.ScalarChannel("two-point", p=0.2, order=order)):
            for gam in (0.3, 1.0, 4.0):
                h = 1e-4
                fd = (fe.scalar_psi(ch, gam + h) - fe.scalar_psi(ch, gam - h)) / (2 * h)
                assert abs(fd - fe.scalar_psi_prime(ch, gam)) < tol


def test_mmse_examples():
    assert fe.scalar_mmse(RAD, 0.0) == 1 and fe.scalar_mmse(GAUSS, 0.0) == 1
    assert fe.scalar_mmse(GAUSS, 3.0) == 0.25
    for lam in (0.5, 1, 2, 5):
        assert fe.scalar_mmse(RAD, lam) <= 1 / (1 + lam)


def test_mmse_rademacher_vs_mc():
    g = np.random.default_rng(1)
    lam, m = 1.0, 400000
    X = g.choice([-1.0, 1.0], size=m)
    Y = np.sqrt(lam) * X + g.standard_normal(m)
    err = (X - np.tanh(np.sqrt(lam) * Y)) ** 2
    assert abs(fe.scalar_mmse(RAD, lam) - err.mean()) < 3 * err.std() / np.sqrt(m)
    assert np.allclose(fe.posterior_mean(RAD, Y[:10], lam), np.tanh(np.sqrt(lam) * Y[:10]))


def test_mmse_non_increasing():
    for ch in (RAD, GAUSS, fe.ScalarChannel("two-point", p=0.05)):
        m = [fe.scalar_mmse(ch, l) for l in np.linspace(0, 8, 33)]
        assert np.all(np.diff(m) <= 1e-12)


def test_immse():
    assert fe.immse_check(GAUSS, 1.0) < 1e-6
    assert fe.immse_check(GAUSS, 0.0) < 1e-4
    for lam in (0.5, 1, 2):
        assert fe.immse_check(RAD, lam) < 1e-4
    with pytest.raises(ValueError):
        fe.immse_check(RAD, 1.0, h=0.1)


def test_monotone_lipschitz():
    for ch in (RAD, GAUSS, fe.ScalarChannel("two-point", p=0.1)):
        assert fe.monotone_lipschitz(ch, np.linspace(0, 6, 25)) == (True, True)


def test_channel_validation():
    with pytest.raises(ValueError):
        fe.ScalarChannel("laplace")
    with pytest.raises(ValueError):
        fe.ScalarChannel("two-point")
    vals, probs = fe.ScalarChannel("two-point", p=0.3).atoms()
    assert np.isclose(probs @ vals, 0) and np.isclose(probs @ vals ** 2, 1)


def test_gibbs_table_normalized():
    S = fe.hypercube(6)
    Y = np.random.default_rng(0).standard_normal((6, 6))
    tab = fe.spiked_posterior(Y, 1.0, S)
    assert abs(tab.probs().sum() - 1) < 1e-12
    with pytest.raises(ValueError):
        fe.hypercube(21)


def test_nishimori():
    r0 = fe.nishimori_check(6, 0.0, 200, rng=0)
    assert r0.within_3se
    r = fe.nishimori_check(8, 1.0, 2000, rng=1)
    assert r.within_3se and r.planted > 1 / 8


def test_needle_small_cases():
    assert fe.needle_free_energy(10, 0.0, 5).free_energy == 0
    est = fe.needle_free_energy(12, 3.0, 200, rng=0)
    assert est.free_energy > 0 and 0 <= est.mmse <= 1
    assert fe.needle_limit(0.7) == 0 and np.isclose(fe.needle_limit(2), 1 - np.log(2))


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 4.0), st.integers(0, 2 ** 32))
def test_needle_nonnegative(lam, seed):
    # F_n >= 0 holds for the expectation; the estimate may dip by Monte Carlo error
    est = fe.needle_free_energy(8, lam, 20, rng=seed)
    assert est.free_energy >= -3 * est.stderr - 1e-12


def test_rs_gaussian():
    for lam in (0.5, 1.0, 1.5, 2.0, 3.0, 5.0):
        r = fe.rs_fixed_point(GAUSS, lam)
        assert abs(r.q_star - max(0, 1 - 1 / lam)) < 1e-6
        assert abs(r.q_star - 2 * fe.scalar_psi_prime(GAUSS, lam * r.q_star)) < 1e-8
        grid = np.linspace(0, 1, 201)
        assert r.potential >= max(fe.rs_potential(GAUSS, lam, q) for q in grid) - 1e-12
    assert fe.rs_fixed_point(RAD, 0.2).q_star == 0
    assert np.isclose(fe.mmse_limit(GAUSS, 2.0), 0.75)
    assert np.isclose(fe.pca_mse_limit(2.0), 0.75)
    assert np.isclose(fe.mmse_limit(GAUSS, 0.8), 1) and fe.mmse_limit(GAUSS, 0) == fe.dummy_mse(GAUSS)
    for lam in (1.5, 3.0):
        assert np.isclose(fe.mmse_limit(GAUSS, lam), fe.pca_mse_limit(lam), atol=1e-6)


def test_rs_two_point_first_order():
    ch = fe.ScalarChannel("two-point", p=0.05)
    curve = fe.mmse_limit_curve(ch, np.linspace(0.2, 3.0, 15))
    assert np.isfinite(curve.lam_c)
    # below and above the crossing the global maximizer jumps
    lo = fe.rs_fixed_point(ch, curve.lam_c - 0.01).q_star
    hi = fe.rs_fixed_point(ch, curve.lam_c + 0.01).q_star
    assert lo < 1e-3 and hi > 0.3
    assert any(len(fe.rs_fixed_point(ch, l).roots) >= 3 for l in np.linspace(curve.lam_c - 0.2, curve.lam_c + 0.05, 6))
