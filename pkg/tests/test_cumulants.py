import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thresholds import cumulants as cu
from thresholds.cumulants import Multigraph


def test_multigraph_basics():
    a = Multigraph.from_pairs([(1, 0), (0, 1), (2, 2)])
    assert a.edges == (((0, 1), 2), ((2, 2), 1))
    assert a.size == 3 and a.factorial() == 2 and a.vertices == {0, 1, 2}
    assert sorted(map(sorted, a.components())) == [[0, 1], [2]]
    assert a.has_component_avoiding(0) and a.label() == "0-1x2;2-2"
    assert len(list(a.sub_multigraphs())) == 5
    assert a.minus(Multigraph.from_pairs([(0, 1)])) == Multigraph.from_pairs([(0, 1), (2, 2)])
    with pytest.raises(ValueError):
        Multigraph.from_dict({(1, 0): 1})


def test_enumeration_counts():
    from math import comb
    coords = cu.all_pairs(3)
    assert len(cu.enumerate_multigraphs(coords, 3)) == comb(6 + 3, 3)
    assert len(cu.enumerate_simple(coords, 2)) == 1 + 6 + 15


def test_kappa_small_examples():
    lam, rho = 0.7, 0.3
    tab = cu.kappa_cumulants(cu.SubmatrixOracle(lam, rho), 1, coords=cu.all_pairs(3))
    assert tab[Multigraph()] == rho
    assert np.isclose(tab[Multigraph.from_pairs([(0, 1)])], lam * rho ** 2 * (1 - rho), atol=1e-15)
    assert abs(tab[Multigraph.from_pairs([(1, 2)])]) < 1e-15


def test_kappa_closed_form_matches_enumeration():
    n, D, lam, rho = 4, 3, 0.7, 0.3
    alphas = cu.enumerate_multigraphs(cu.all_pairs(n), D)
    a = cu.kappa_cumulants(cu.SubmatrixOracle(lam, rho), D, alphas=alphas)
    b = cu.kappa_cumulants(cu.submatrix_enumeration_oracle(n, lam, rho), D, alphas=alphas)
    assert max(abs(a[k] - b[k]) for k in a) < 1e-12
    for k, v in a.items():
        assert abs(v) <= cu.kappa_magnitude_bound(k, lam, rho) + 1e-15


multigraphs = st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), min_size=1, max_size=5) \
    .map(Multigraph.from_pairs).filter(lambda a: a.has_component_avoiding(0))


@settings(max_examples=500, deadline=None)
@given(multigraphs, st.floats(0.1, 2.0), st.floats(0.05, 0.95))
def test_kappa_vanishes_on_disconnected(alpha, lam, rho):
    tab = cu.kappa_cumulants(cu.SubmatrixOracle(lam, rho), alpha.size, alphas=[alpha])
    assert abs(tab[alpha]) < 1e-12


def test_r_alpha_identical_models():
    P = cu.community_oracle(3, 1.5, 2, 0.5)
    tab = cu.r_alpha_recursion(P, P, 3, coords=P.coords)
    assert tab[Multigraph()] == 1
    assert max(abs(v) for a, v in tab.items() if a.size) < 1e-14
    assert np.isclose(cu.adv_bound_gaussian(tab), 1)


def test_r_alpha_scaling():
    coords = [(0, 0), (0, 1)]
    P = cu.AtomOracle(coords, [[1.0, 0.5], [-0.3, 2.0], [0.2, -1.0]], [0.2, 0.5, 0.3])
    Q = cu.AtomOracle(coords, [[0.5, 0.1], [-1.0, 0.4]], [0.6, 0.4])
    base = cu.r_alpha_recursion(P, Q, 4, coords=coords)
    scaled = cu.r_alpha_recursion(P.scaled(2.0), Q.scaled(2.0), 4, coords=coords)
    for a in base:
        assert np.isclose(scaled[a], 2.0 ** a.size * base[a], atol=1e-12)


def test_r_alpha_binomial_factor_irrelevant_on_simple():
    P = cu.community_oracle(4, 2, 2, 0.3)
    Q = cu.community_oracle(4, 2, 1, 0.3)
    simple = cu.enumerate_simple(P.coords, 3)
    a = cu.r_alpha_recursion(P, Q, 3, alphas=simple)
    b = cu.r_alpha_recursion(P, Q, 3, alphas=simple, binomial=False)
    assert all(np.isclose(a[k], b[k]) for k in a)


def test_adv_bound_small_lambda():
    vals = []
    for lam in (0.3, 0.1, 0.03):
        P = cu.community_oracle(4, 2, 2, lam)
        Q = cu.community_oracle(4, 2, 1, lam)
        vals.append(cu.adv_bound_gaussian(cu.r_alpha_recursion(P, Q, 3, coords=P.coords)))
    assert vals[0] > vals[1] > vals[2] > 1 and vals[2] < 1.01


def test_adv_bound_binary_domain():
    with pytest.raises(ValueError):
        cu.adv_bound_binary({}, 0.5, 0.4)


def test_oracle_domain():
    with pytest.raises(cu.OracleDomainError):
        cu.submatrix_enumeration_oracle(7, 1.0, 0.5)
    o = cu.submatrix_enumeration_oracle(3, 1.0, 0.5)
    big = Multigraph.from_pairs([(0, 1)] * 7)
    with pytest.raises(cu.OracleDomainError):
        o.moment(big)


def test_corr_bound_examples():
    assert cu.corr_ld_bound(0.0, 0.2, 100, 3).value == 0.2 ** 2
    n = 1e6
    b = cu.corr_ld_bound(n ** -0.4, n ** -0.2, n, 5)
    assert b.excess > 0
    # hard regime: the relative excess shrinks only for very large n
    b30 = cu.corr_ld_bound(1e30 ** -0.4, 1e30 ** -0.2, 1e30, 5)
    assert b30.excess < 0.1 < b.excess
    with pytest.raises(ValueError):
        cu.corr_ld_bound(1.0, 0.1, 10, 0)


def test_corr_bound_dominates_exact_correlation():
    for lam, rho in [(0.5, 0.3), (1.0, 0.5), (0.2, 0.1)]:
        corr2, cond = cu.exact_corr_submatrix(3, lam, rho, 2)
        assert cond < 1e12
        assert rho ** 2 - 1e-12 <= corr2 <= cu.corr_ld_bound(lam, rho, 3, 2).value


def test_gaussian_raw_moment():
    assert cu.gaussian_raw_moment(0.0, 4) == 3
    assert cu.gaussian_raw_moment(2.0, 2) == 5


def test_export_table(tmp_path):
    tab = cu.kappa_cumulants(cu.SubmatrixOracle(0.5, 0.5), 1, coords=[(0, 1)])
    p = tmp_path / "k.csv"
    cu.export_table(tab, p)
    assert p.read_text().splitlines()[1].startswith("empty,0,")
