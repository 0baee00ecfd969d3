"""Low-degree likelihood ratio, Franz-Parisi criterion and Fourier characters.

Gaussian additive model Y = lam u + Z: the degree-D norm is
E exp^{<=D}(lam^2 <u,v>) and the Franz-Parisi value is
E[1{|<u,v>| <= delta(D)} exp(lam^2 <u,v>)], both functions of the overlap law
only (see ``overlaps``).
"""
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from .overlaps import OverlapSampler, rademacher_overlaps
from .rng import as_generator


class UnresolvableTail(ValueError):
    """Monte Carlo budget too small to resolve an e^{-D} overlap tail."""


@dataclass
class Estimate:
    value: float
    stderr: float = 0.0
    method: str = "exact"
    note: str = ""
    extra: dict = field(default_factory=dict)


def truncated_exp(x, D):
    """sum_{d=0}^{D} x^d / d!, by the recurrence t_{d+1} = t_d x / (d+1)."""
    if D < 0:
        raise ValueError("D must be >= 0")
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for d in range(D):
        term = term * x / (d + 1)
        total = total + term
    return total if total.ndim else float(total)


def _mean_se(vals):
    vals = np.asarray(vals, dtype=float)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0


def ld_value(overlaps, lam, D, mc_budget=100000, rng=0, exact=False, symmetric=None):
    """LD(D, lam) = E exp^{<=D}(lam^2 s).

    With ``exact`` the overlap pmf is used.  For symmetric overlap laws the Monte
    Carlo estimator averages s and -s (antithetic pairs), so odd moments vanish
    exactly and the estimate is monotone in D and in lam for even D.
    """
    if lam == 0:
        return Estimate(1.0)
    if exact:
        return Estimate(overlaps.expect(lambda s: truncated_exp(lam ** 2 * s, D)))
    s = overlaps.sample(rng, mc_budget)
    if symmetric is None:
        symmetric = overlaps.exact and np.allclose(overlaps.support, -overlaps.support[::-1]) \
            and np.allclose(overlaps.pmf, overlaps.pmf[::-1])
    if symmetric:
        vals = 0.5 * (truncated_exp(lam ** 2 * s, D) + truncated_exp(-lam ** 2 * s, D))
    else:
        vals = truncated_exp(lam ** 2 * s, D)
    m, se = _mean_se(vals)
    return Estimate(m, se, "mc")


def overlap_quantile_delta(overlaps, D, mc_budget=None, rng=0, exact=False, samples=None):
    """delta(D) = sup{eps >= 0 : P(|s| >= eps) >= e^{-D}}.

    Exact mode returns the largest atom a of |s| with P(|s| >= a) >= e^{-D}.
    The empirical version is the ceil(m e^{-D})-th largest |s| and needs
    m >= 10 e^D samples.
    """
    target = np.exp(-D)
    if exact:
        a = np.unique(np.abs(overlaps.support[overlaps.pmf > 0]))
        tails = np.array([overlaps.tail(t) for t in a])
        # tiny slack for pmf rounding
        ok = a[tails >= target * (1 - 1e-12)]
        return float(ok.max()) if len(ok) else 0.0
    if samples is None:
        if mc_budget is None or mc_budget < 10 * np.exp(D):
            raise UnresolvableTail(
                f"need at least {int(np.ceil(10 * np.exp(D)))} overlap samples for D={D}, got {mc_budget}")
        samples = overlaps.sample(rng, mc_budget)
    m = len(samples)
    if m < 10 * np.exp(D):
        raise UnresolvableTail(f"{m} samples cannot resolve a tail of e^-{D}")
    r = int(np.ceil(m * target))
    a = np.sort(np.abs(samples))[::-1]
    return float(a[r - 1])


DELTA_BIAS_NOTE = ("empirical delta uses the ceil(m e^-D)-th order statistic of |s|; "
                   "it estimates the population quantile with O(e^{D/2}/sqrt(m)) relative rank error")


def fp_value(overlaps, lam, D, mc_budget=None, rng=0, exact=False):
    """FP(D, lam) = E[1{|s| <= delta(D)} exp(lam^2 s)] (log-safe)."""
    if exact:
        delta = overlap_quantile_delta(overlaps, D, exact=True)
        keep = (np.abs(overlaps.support) <= delta) & (overlaps.pmf > 0)
        if not keep.any():
            return Estimate(0.0, extra={"delta": delta})
        logv = logsumexp(lam ** 2 * overlaps.support[keep], b=overlaps.pmf[keep])
        return Estimate(float(np.exp(logv)), extra={"delta": delta})
    if mc_budget is None or mc_budget < 10 * np.exp(D):
        raise UnresolvableTail(
            f"need at least {int(np.ceil(10 * np.exp(D)))} overlap samples for D={D}, got {mc_budget}")
    s = overlaps.sample(rng, mc_budget)
    delta = overlap_quantile_delta(overlaps, D, samples=s)
    a = lam ** 2 * s
    shift = a.max()
    vals = np.where(np.abs(s) <= delta, np.exp(a - shift), 0.0)
    m, se = _mean_se(vals)
    scale = np.exp(shift)
    return Estimate(m * scale, se * scale, "mc", DELTA_BIAS_NOTE, {"delta": delta})


def sandwich_degree(D, lam, max_sq_norm):
    """D~ = D (2 + log(1 + lam^2 M)) from the LD <= FP + e^{-D} comparison."""
    return D * (2 + np.log1p(lam ** 2 * max_sq_norm))


@dataclass
class SandwichRow:
    D: int
    lam: float
    D_tilde: float
    ld: float
    ld_stderr: float
    fp: float
    fp_stderr: float
    slack: float   # fp + e^{-D} - ld
    holds: bool


def fp_ld_sandwich(overlaps, lam, D, mc_budget=None, rng=0, exact=True, n_sigma=3.0):
    """Check LD(D, lam) <= FP(D~, lam) + e^{-D} (odd D)."""
    if D % 2 == 0:
        raise ValueError("the comparison is stated for odd D")
    M = overlaps.max_sq_norm
    if M is None:
        raise ValueError("overlap law must declare sup |u|^2")
    Dt = sandwich_degree(D, lam, M)
    ld = ld_value(overlaps, lam, D, mc_budget or 100000, rng, exact=exact)
    fp = fp_value(overlaps, lam, Dt, mc_budget, rng, exact=exact)
    slack = fp.value + np.exp(-D) - ld.value
    err = n_sigma * np.hypot(ld.stderr, fp.stderr)
    return SandwichRow(D, lam, Dt, ld.value, ld.stderr, fp.value, fp.stderr, slack, bool(slack >= -err))


# ---------------------------------------------------------------------------
# boolean example where the criterion misfires

def boolean_prior(n, total):
    """All u in {+-1}^n with sum(u) = total, uniform."""
    if (n + total) % 2 or abs(total) > n:
        raise ValueError("sum(u) must have the parity of n and |sum| <= n")
    minus = (n - total) // 2
    us = []
    for idx in combinations(range(n), minus):
        u = np.ones(n)
        u[list(idx)] = -1
        us.append(u)
    return np.array(us)


def boolean_kernel(U, V=None):
    """<L_u, L_v> = prod_i (1 + u_i v_i) for biased Rademacher planted laws."""
    V = U if V is None else V
    return np.prod(1 + U[:, None, :] * V[None, :, :], axis=2)


def boolean_overlaps(U):
    """Exact law of <u,v>/n for independent uniform draws from the rows of U."""
    n = U.shape[1]
    s = (U @ U.T).ravel() / n
    vals, counts = np.unique(s, return_counts=True)
    return vals, counts / counts.sum()


def boolean_lo(U, delta):
    """LO(delta) = E[1{|<u,v>/n| <= delta} <L_u, L_v>], exact over all pairs."""
    n = U.shape[1]
    K = boolean_kernel(U)
    S = np.abs(U @ U.T) / n
    return float(np.mean(np.where(S <= delta, K, 0.0)))


def boolean_ld(U, D):
    """LD(D) = sum_{|S| <= D} (E_u prod_{i in S} u_i)^2, exact."""
    n = U.shape[1]
    total = 0.0
    for d in range(D + 1):
        for S in combinations(range(n), d):
            m = np.mean(np.prod(U[:, list(S)], axis=1)) if d else 1.0
            total += m * m
    return total


def boolean_fp(U, D):
    vals, probs = boolean_overlaps(U)
    ov = OverlapSampler(draw=None, support=vals, pmf=probs)
    delta = overlap_quantile_delta(ov, D, exact=True)
    return boolean_lo(U, delta), delta


# ---------------------------------------------------------------------------
# Fourier characters for binary models

@dataclass
class BinaryModel:
    """Y_i in {a_i, b_i} with a_i b_i = -1; under P, E[Y_i | X] = X_i with X from a finite prior."""
    a: np.ndarray
    b: np.ndarray
    atoms: np.ndarray      # (A, N) signal values
    probs: np.ndarray      # (A,)

    def __post_init__(self):
        self.a = np.asarray(self.a, float)
        self.b = np.asarray(self.b, float)
        self.atoms = np.atleast_2d(np.asarray(self.atoms, float))
        self.probs = np.asarray(self.probs, float)
        if not np.allclose(self.a * self.b, -1):
            raise ValueError("need a_i b_i = -1")
        if np.any(self.atoms < self.a - 1e-12) or np.any(self.atoms > self.b + 1e-12):
            raise ValueError("signal must lie in [a_i, b_i]")

    @property
    def N(self):
        return len(self.a)

    def q_probs(self):
        """P_Q(Y_i = b_i), fixed by mean zero: p_b = -a/(b - a)."""
        return -self.a / (self.b - self.a)


def character_mean(model, S):
    """E_P chi_S(Y) = E_X prod_{i in S} X_i (conditional independence)."""
    if not S:
        return 1.0
    return float(model.probs @ np.prod(model.atoms[:, list(S)], axis=1))


def fourier_ldlr_binary(model, D, max_terms=10 ** 6):
    """||L^{<=D}||^2 = sum_{|S| <= D} (E_P chi_S)^2, exact by enumeration."""
    N = model.N
    count = sum(_ncomb(N, d) for d in range(D + 1))
    if count > max_terms:
        raise ValueError(f"enumeration budget exceeded ({count} subsets)")
    total = 0.0
    for d in range(D + 1):
        for S in combinations(range(N), d):
            c = character_mean(model, S)
            total += c * c
    return total


def _ncomb(N, d):
    from math import comb
    return comb(N, d)


def binary_outcomes(model):
    """All Y in {a,b}^N with their Q and P probabilities (small N only)."""
    N = model.N
    if N > 16:
        raise ValueError("too many coordinates to enumerate outcomes")
    bits = np.array(list(product([0, 1], repeat=N)), dtype=float)
    Y = np.where(bits == 1, model.b, model.a)
    pb_q = model.q_probs()
    q = np.prod(np.where(bits == 1, pb_q, 1 - pb_q), axis=1)
    # under P, P(Y_i = b_i | X_i) = (X_i - a_i)/(b_i - a_i)
    pb = (model.atoms - model.a) / (model.b - model.a)           # (A, N)
    lik = np.prod(np.where(bits[None, :, :] == 1, pb[:, None, :], 1 - pb[:, None, :]), axis=2)
    p = model.probs @ lik
    return Y, q, p


def projected_ldlr_norm(model, D):
    """||L^{<=D}||^2 by least-squares projection of L = dP/dQ onto monomials of degree <= D.

    Independent of the character formula: uses raw monomials in Y and the
    Q-weighted normal equations.
    """
    Y, q, p = binary_outcomes(model)
    L = p / q
    cols = [np.ones(len(Y))]
    for d in range(1, D + 1):
        for S in combinations(range(model.N), d):
            cols.append(np.prod(Y[:, list(S)], axis=1))
    B = np.column_stack(cols)
    w = np.sqrt(q)
    coef, *_ = np.linalg.lstsq(B * w[:, None], L * w, rcond=None)
    proj = B @ coef
    return float(q @ proj ** 2), (Y, q, proj)


def sbm_binary_model(n, k, d, eta, self_loops=True):
    """The SBM on n vertices written as a binary model over vertex pairs.

    Coordinates are pairs i <= j (i < j without loops); signal
    X_ij = Delta_ij sqrt(p/(1-p)) with p = d/n.
    """
    p = d / n
    pairs = [(i, j) for i in range(n) for j in range(i if self_loops else i + 1, n)]
    a = np.full(len(pairs), -np.sqrt(p / (1 - p)))
    b = np.full(len(pairs), np.sqrt((1 - p) / p))
    atoms = []
    for labels in product(range(k), repeat=n):
        row = []
        for i, j in pairs:
            if i == j:
                delta = eta * (k - 1) / np.sqrt(2)
            elif labels[i] == labels[j]:
                delta = eta * (k - 1)
            else:
                delta = -eta
            row.append(delta * np.sqrt(p / (1 - p)))
        atoms.append(row)
    probs = np.full(len(atoms), float(k) ** -n)
    return BinaryModel(a, b, np.array(atoms), probs)


# ---------------------------------------------------------------------------
# SBM low-degree bound via the Gaussian comparison

def community_gram(labels, k):
    """U U^T with rows sqrt(k) e_{label} - 1/sqrt(k); entries k 1[same] - 1."""
    U = np.sqrt(k) * np.eye(k)[labels] - 1.0 / np.sqrt(k)
    return U @ U.T


def label_gram_inner(n, k, m, g):
    """m draws of <U U^T, U' U'^T> via the k x k confusion table of two labelings."""
    N = g.multinomial(n, np.full(k * k, 1.0 / (k * k)), size=m).reshape(m, k, k).astype(float)
    rows = N.sum(axis=2)
    cols = N.sum(axis=1)
    return (k * k * (N ** 2).sum(axis=(1, 2)) - k * (rows ** 2).sum(axis=1)
            - k * (cols ** 2).sum(axis=1) + n * n)


def sbm_ldlr_bound(n, k, d, eta, D, mc_budget=100000, rng=0, exact=None):
    """sum_{j<=D} (1/j!) E[(eta^2/2 p/(1-p) <UU^T, U'U'^T>)^j], p = d/n.

    For k = 2 the inner product is n^2 s^2 with s a Rademacher overlap and the
    expectation is exact; otherwise Monte Carlo over the confusion table.
    """
    p = d / n
    c = eta ** 2 / 2 * p / (1 - p)
    if eta == 0:
        return Estimate(1.0)
    if exact is None:
        exact = k == 2
    if exact:
        if k != 2:
            raise ValueError("exact evaluation only for k = 2")
        ov = rademacher_overlaps(n)
        return Estimate(ov.expect(lambda s: truncated_exp(c * n * n * s * s, D)))
    g = as_generator(rng)
    T = label_gram_inner(n, k, mc_budget, g)
    m, se = _mean_se(truncated_exp(c * T, D))
    return Estimate(m, se, "mc")


def sbm_gaussian_limit(d_eta2, k, D=None):
    """n -> infinity value of the bound: E exp^{<=D}((d eta^2 / 2) chi^2_{(k-1)^2})."""
    m = (k - 1) ** 2
    a = d_eta2 / 2
    if D is None:
        return np.inf if d_eta2 >= 1 else (1 - d_eta2) ** (-m / 2)
    # term_j = a^j E[chi^2_m^j] / j!, built by its ratio to avoid huge factorials
    total, term = 1.0, 1.0
    for j in range(1, D + 1):
        term *= a * (m + 2 * (j - 1)) / j
        total += term
    return total


# ---------------------------------------------------------------------------
# advantage bound versus observed separation

@dataclass
class ImplicationRow:
    name: str
    ratio: float
    classification: str
    consistent: bool


def separation_implication_check(adv_value, candidates, p_sampler, q_sampler, mc_budget,
                                 rng=0, adv_tol=0.05):
    """Compare candidate statistics' separation with a degree-D advantage value.

    ``candidates`` maps names to statistics of one draw.  When adv_value is
    within ``adv_tol`` of 1, a candidate showing strong separation is flagged
    as inconsistent; otherwise every outcome is consistent.
    """
    from .detect import separation_ratio
    from .rng import split
    near_one = abs(adv_value - 1) <= adv_tol
    rows = []
    for (name, stat), g in zip(candidates.items(), split(rng, len(candidates))):
        rep = separation_ratio(stat, p_sampler, q_sampler, mc_budget, g)
        ok = not (near_one and rep.classification == "strong")
        rows.append(ImplicationRow(name, rep.ratio, rep.classification, ok))
    return rows
