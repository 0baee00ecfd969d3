"""Tests, separation metrics, second moments and spectral/triangle statistics."""
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import eigsh
from scipy.special import logsumexp

from .models import ModelInstance, PriorSpec
from .overlaps import OverlapSampler, overlaps_for
from .rng import as_generator, split

STRONG_CUTOFF = 0.1
WEAK_CUTOFF = 10.0


def _evaluate(statistic, sampler, g, m, vectorized):
    draws = sampler(g, m)
    if vectorized:
        return np.asarray(statistic(draws), dtype=float)
    return np.array([statistic(d) for d in draws], dtype=float)


@dataclass
class SeparationReport:
    mean_p: float
    mean_q: float
    var_p: float
    var_q: float
    ratio: float
    classification: str
    note: str = ""


def classify(ratio, strong=STRONG_CUTOFF, weak=WEAK_CUTOFF):
    if not np.isfinite(ratio):
        return "none"
    if ratio < strong:
        return "strong"
    if ratio < weak:
        return "weak"
    return "none"


def separation_ratio(statistic, p_sampler, q_sampler, mc_budget, rng=0,
                     vectorized=False, strong=STRONG_CUTOFF, weak=WEAK_CUTOFF):
    """Empirical sqrt(max variance) / |mean gap| of ``statistic`` under P and Q.

    Samplers are callables ``(generator, m) -> sequence of m draws``.
    """
    if mc_budget < 100:
        raise ValueError("mc_budget must be >= 100")
    gp, gq = split(rng, 2)
    fp = _evaluate(statistic, p_sampler, gp, mc_budget, vectorized)
    fq = _evaluate(statistic, q_sampler, gq, mc_budget, vectorized)
    mp, mq = fp.mean(), fq.mean()
    vp, vq = fp.var(ddof=1), fq.var(ddof=1)
    gap = abs(mp - mq)
    spread = np.sqrt(max(vp, vq))
    # a gap below MC resolution is reported as zero
    resolution = 1e-12 * max(1.0, abs(mp), abs(mq))
    ratio = np.inf if gap <= resolution else spread / gap
    mc_err = np.sqrt(vp / len(fp) + vq / len(fq))
    note = f"mean-gap MC stderr {mc_err:.3g} from {mc_budget} draws per model"
    return SeparationReport(mp, mq, vp, vq, ratio, classify(ratio, strong, weak), note)


@dataclass
class TestOutcome:
    type_i_error: float
    type_ii_error: float
    threshold: float

    @property
    def error_sum(self):
        return self.type_i_error + self.type_ii_error


def midpoint_threshold(statistic, p_sampler, q_sampler, mc_budget, rng=0, vectorized=False):
    """(mean_P + mean_Q)/2 from a calibration sample."""
    gp, gq = split(rng, 2)
    fp = _evaluate(statistic, p_sampler, gp, mc_budget, vectorized)
    fq = _evaluate(statistic, q_sampler, gq, mc_budget, vectorized)
    return 0.5 * (fp.mean() + fq.mean())


def threshold_test(statistic, threshold, p_sampler, q_sampler, mc_budget, rng=0, vectorized=False):
    """Declare P when statistic > threshold; errors estimated on fresh draws."""
    if not np.isfinite(threshold):
        raise ValueError("threshold must be finite")
    # fresh streams, disjoint from any calibration run on the same rng
    gp, gq = split(rng, 4)[2:]
    fp = _evaluate(statistic, p_sampler, gp, mc_budget, vectorized)
    fq = _evaluate(statistic, q_sampler, gq, mc_budget, vectorized)
    return TestOutcome(float(np.mean(fq > threshold)), float(np.mean(fp <= threshold)), threshold)


# ---------------------------------------------------------------------------
# likelihood ratio second moment

@dataclass
class MomentEstimate:
    value: float
    log_value: float
    stderr: float
    method: str


def lr_second_moment(prior, lam, n, mc_budget=10000, rng=0, exact=True):
    """||L_n||^2 = E exp((n lam^2 / 2) <x, x'>^2) for the spiked Wigner model.

    Uses the exact overlap law when the prior has one (and ``exact``), otherwise
    a log-space Monte Carlo mean.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    ov = prior if isinstance(prior, OverlapSampler) else overlaps_for(prior, n)
    if lam == 0:
        return MomentEstimate(1.0, 0.0, 0.0, "exact")
    c = n * lam ** 2 / 2
    if exact and ov.exact:
        mask = ov.pmf > 0
        logv = logsumexp(c * ov.support[mask] ** 2, b=ov.pmf[mask])
        return MomentEstimate(float(np.exp(logv)), float(logv), 0.0, "exact")
    s = ov.sample(rng, mc_budget)
    a = c * s ** 2
    logv = logsumexp(a) - np.log(len(a))
    # delta-method stderr of the mean, computed relative to the max to stay finite
    w = np.exp(a - a.max())
    rel = w.std(ddof=1) / np.sqrt(len(a)) / w.mean()
    return MomentEstimate(float(np.exp(logv)), float(logv), float(np.exp(logv) * rel), "mc")


def rademacher_lr_limit(lam):
    """Limit of ||L_n||^2 under the Rademacher prior: n <x,x'>^2 -> chi^2_1."""
    if lam >= 1:
        return np.inf
    return 1.0 / np.sqrt(1 - lam ** 2)


# ---------------------------------------------------------------------------
# sub-Gaussian tails

def subgaussian_tail_bound(sigma2, a):
    """2 exp(-a^2 / (2 sigma2)) bound on P(|X| >= a)."""
    if sigma2 <= 0:
        raise ValueError("variance proxy must be > 0")
    if a < 0:
        raise ValueError("a must be >= 0")
    return 2.0 * np.exp(-a * a / (2.0 * sigma2))


def empirical_tail(sampler, a, mc_budget, rng=0):
    """(fraction of |X| >= a, binomial stderr); sampler is ``(generator, m) -> array``."""
    x = np.asarray(sampler(as_generator(rng), mc_budget), dtype=float)
    p = float(np.mean(np.abs(x) >= a))
    return p, float(np.sqrt(max(p * (1 - p), 1.0 / mc_budget) / mc_budget))


# ---------------------------------------------------------------------------
# spectral statistics

DENSE_LIMIT = 3000


def top_eigenpair(Y):
    """Largest eigenvalue and unit eigenvector of a symmetric matrix.

    Dense LAPACK (subset mode) up to DENSE_LIMIT, Lanczos with a fixed start
    vector above it.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if n <= DENSE_LIMIT:
        w, v = linalg.eigh(Y, subset_by_index=[n - 1, n - 1])
        return float(w[0]), v[:, 0]
    w, v = eigsh(Y, k=1, which="LA", v0=np.ones(n) / np.sqrt(n), tol=1e-8)
    return float(w[0]), v[:, 0]


def lambda_max(Y):
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if n <= DENSE_LIMIT:
        return float(linalg.eigh(Y, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0])
    return top_eigenpair(Y)[0]


def spectral_test(Y, threshold):
    """True (declare planted) when lambda_max(Y) exceeds ``threshold``."""
    if np.max(np.abs(Y - Y.T)) > 0:
        raise ValueError("Y must be symmetric")
    return lambda_max(Y) > threshold


def squared_cosine(x, v):
    x, v = np.asarray(x, float), np.asarray(v, float)
    return float((x @ v) ** 2 / ((x @ x) * (v @ v)))


def bbp_overlap(instance):
    """<x, v_max>^2 / (|x|^2 |v|^2) where v_max is the top eigenvector.

    Non-symmetric observations (the rank-one channel and the asymmetric spiked
    Wigner variant) are first symmetrized as Y + Y^T.
    """
    Y = instance.observation if isinstance(instance, ModelInstance) else instance[0]
    x = instance.signal if isinstance(instance, ModelInstance) else instance[1]
    if x is None or np.ndim(x) != 1:
        raise ValueError("bbp_overlap needs a rank-one signal")
    if np.max(np.abs(Y - Y.T)) > 0:
        Y = Y + Y.T
    _, v = top_eigenpair(Y)
    return squared_cosine(x, v)


def bbp_overlap_limit(lam):
    """Limit of the squared overlap in the rank-one channel parametrization."""
    return 0.0 if lam <= 1 else 1.0 - 1.0 / lam


# ---------------------------------------------------------------------------
# signed triangles

def _centered(A, q):
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n < 3:
        raise ValueError("need n >= 3")
    if not 0 <= q < 1:
        raise ValueError("q must be in [0, 1)")
    R = A - q
    np.fill_diagonal(R, 0.0)
    return R


def signed_triangle_stat(A, q):
    """Sum over i < j < k of R_ij R_ik R_jk with R = A - q (exact triangle sum)."""
    R = _centered(A, q)
    n = R.shape[0]
    total = 0.0
    for j in range(1, n - 1):
        # sum over i < j < k of R_ij R_ik R_jk
        inner = R[:j, j + 1:] @ R[j, j + 1:]
        total += float(R[:j, j] @ inner)
    return total


def signed_triangle_stat_trace(A, q):
    """Same statistic as tr(R^3)/6 with the diagonal of R zeroed."""
    R = _centered(A, q)
    return float(np.einsum("ij,ji->", R @ R, R)) / 6.0


def triangle_moment_formulas(n, k, q, s, M):
    """(asymptotic mean M s^3 k^3 / 6, analytic variance upper bound)."""
    if M < 1 or k < 1 or n < 3:
        raise ValueError("invalid model parameters")
    mean = M * s ** 3 * k ** 3 / 6.0
    var = (M ** 2 * k ** 5 * s ** 6 + M * k ** 4 * s ** 4 * q + M ** 2 * k ** 4 * s ** 5
           + n ** 3 * q ** 3 / 3.0 + n * k ** 2 * s * q ** 2 + k ** 3 * q ** 2 * s
           + k ** 3 * q * s ** 2 + M * k ** 3 * s ** 3 / 3.0)
    return mean, var


def triangle_exact_mean(n, k, s, M):
    """Finite-n mean: C(n,3) triangles, each all-same-label w.p. k^3/(n^3 M^2), worth (sM)^3."""
    return comb(n, 3) * k ** 3 * s ** 3 * M / n ** 3
