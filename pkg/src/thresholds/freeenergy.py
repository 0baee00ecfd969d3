"""Scalar Gaussian channel free energy, I-MMSE, Nishimori checks, the needle
model and the replica-symmetric fixed point for rank-one estimation.

Scalar channel: Y = sqrt(gamma) X + Z with X ~ P0, Z ~ N(0, 1).
"""
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.optimize import brentq
from scipy.special import logsumexp

from .models import two_point_atoms
from .rng import as_generator, split

GH_ORDER = 60


class QuadratureError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScalarChannel:
    """Prior P0 for the scalar channel: 'rademacher', 'gaussian' or 'two-point' (parameter p)."""
    prior: str = "gaussian"
    p: float = None
    order: int = GH_ORDER

    def __post_init__(self):
        if self.prior not in ("rademacher", "gaussian", "two-point"):
            raise ValueError(f"unknown prior {self.prior!r}")
        if self.prior == "two-point" and not (self.p and 0 < self.p < 1):
            raise ValueError("two-point prior needs p in (0, 1)")

    def atoms(self):
        """Discrete prior (values, probabilities); None for the Gaussian prior."""
        if self.prior == "rademacher":
            return np.array([1.0, -1.0]), np.array([0.5, 0.5])
        if self.prior == "two-point":
            hi, lo = two_point_atoms(self.p)
            return np.array([hi, lo]), np.array([self.p, 1 - self.p])
        return None

    @property
    def second_moment(self):
        return 1.0

    @property
    def mean(self):
        return 0.0


def _nodes(order):
    z, w = hermegauss(order)
    return z, w / np.sqrt(2 * np.pi)


def _posterior_tables(ch, gamma):
    """Quadrature over (X, Z): weights, X values, posterior means <x>, log partition.

    ``gamma`` may be an array; results then carry it as the leading axis.
    """
    vals, probs = ch.atoms()
    z, wz = _nodes(ch.order)
    gamma = np.asarray(gamma, dtype=float)[..., None, None, None]
    # exponent for candidate x given truth X and noise z: sqrt(g) z x + g x X - g x^2/2
    X = vals[:, None, None]
    Z = z[None, :, None]
    x = vals[None, None, :]
    expo = np.log(probs) + np.sqrt(gamma) * Z * x + gamma * x * X - gamma * x * x / 2
    logZ = logsumexp(expo, axis=-1)                              # (..., atoms, nodes)
    post = np.exp(expo - logZ[..., None])
    mean = post @ vals                                           # <x>
    weight = probs[:, None] * wz[None, :]
    return weight, vals[:, None], mean, logZ


def scalar_psi(ch, gamma):
    """psi(gamma) = E log int dP0(x) exp(sqrt(gamma) Z x + gamma x X - gamma x^2 / 2)."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if gamma == 0:
        return 0.0
    if ch.prior == "gaussian":
        return 0.5 * (gamma - np.log1p(gamma))
    w, _, _, logZ = _posterior_tables(ch, gamma)
    val = float(np.sum(w * logZ))
    if not np.isfinite(val):
        raise QuadratureError(f"psi quadrature not finite at gamma={gamma}")
    return val


def scalar_psi_prime(ch, gamma):
    """psi'(gamma) = E[X <x>] - E[<x>^2] / 2, from the integrand derivative after Gaussian integration by parts."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma must be >= 0")
    if ch.prior == "gaussian":
        out = 0.5 * g / (1 + g)
    else:
        w, X, mean, _ = _posterior_tables(ch, g)
        out = np.sum(w * (X * mean - 0.5 * mean ** 2), axis=(-2, -1))
    return float(out) if out.ndim == 0 else out


def scalar_mmse(ch, lam):
    """E (X - E[X|Y])^2 for Y = sqrt(lam) X + Z."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if ch.prior == "gaussian":
        return 1.0 / (1.0 + lam)
    if lam == 0:
        return ch.second_moment - ch.mean ** 2
    w, X, mean, _ = _posterior_tables(ch, lam)
    return float(np.sum(w * (X - mean) ** 2))


def posterior_mean(ch, y, lam):
    """E[X | Y = y]."""
    y = np.asarray(y, dtype=float)
    if ch.prior == "gaussian":
        return np.sqrt(lam) / (1 + lam) * y
    vals, probs = ch.atoms()
    expo = np.log(probs) + np.sqrt(lam) * y[..., None] * vals - lam * vals ** 2 / 2
    post = np.exp(expo - logsumexp(expo, axis=-1, keepdims=True))
    return post @ vals


def immse_check(ch, lam, h=1e-3):
    """|F'(lam) - (E X^2 - MMSE(lam)) / 2| with F = psi; one-sided at lam = 0."""
    if not 1e-4 <= h <= 1e-2:
        raise ValueError("h must lie in [1e-4, 1e-2]")
    if lam < h:
        # second-order one-sided difference
        d = (-3 * scalar_psi(ch, lam) + 4 * scalar_psi(ch, lam + h) - scalar_psi(ch, lam + 2 * h)) / (2 * h)
    else:
        d = (scalar_psi(ch, lam + h) - scalar_psi(ch, lam - h)) / (2 * h)
    return abs(d - 0.5 * (ch.second_moment - scalar_mmse(ch, lam)))


# ---------------------------------------------------------------------------
# Gibbs tables and the Nishimori identity

@dataclass
class GibbsTable:
    states: np.ndarray
    log_weights: np.ndarray
    log_partition: float = field(init=False)

    def __post_init__(self):
        self.log_partition = float(logsumexp(self.log_weights))

    def probs(self):
        return np.exp(self.log_weights - self.log_partition)

    def expect(self, f_values):
        return float(self.probs() @ f_values)


def hypercube(n):
    if n > 20:
        raise ValueError("enumeration budget exceeded")
    return np.array(list(product([1.0, -1.0], repeat=n)))


def spiked_posterior(Y, lam, states):
    """Posterior over x in {+-1}^n for Y_ij = sqrt(lam/n) X_i X_j + Z_ij (i < j)."""
    n = Y.shape[0]
    Yu = np.triu(Y, 1)
    H = np.sqrt(lam / n) * np.einsum("si,ij,sj->s", states, Yu, states)
    return GibbsTable(states, H)


@dataclass
class NishimoriReport:
    planted: float          # E <(x . X)^2> / n^2
    replica: float          # E <(x1 . x2)^2> / n^2
    discrepancy: float
    stderr: float
    draws: int

    @property
    def within_3se(self):
        return abs(self.discrepancy) <= 3 * self.stderr + 1e-12


def nishimori_check(n, lam, mc_budget, rng=0):
    """Compare E<(x . X)^2> with E<(x1 . x2)^2> over Y draws, posterior enumerated exactly.

    The first-moment form E<x . X> = E|<x>|^2 is identically 0 = 0 under the
    Rademacher prior because the posterior is sign symmetric, so the squared
    overlap is the informative instance of the identity.
    """
    if n > 12:
        raise ValueError("enumeration budget exceeded (n <= 12)")
    g = as_generator(rng)
    S = hypercube(n)
    diffs = np.empty(mc_budget)
    planted = np.empty(mc_budget)
    replica = np.empty(mc_budget)
    for t in range(mc_budget):
        X = g.choice([-1.0, 1.0], size=n)
        Z = g.standard_normal((n, n))
        Y = np.sqrt(lam / n) * np.outer(X, X) + Z
        tab = spiked_posterior(Y, lam, S)
        p = tab.probs()
        planted[t] = p @ (S @ X) ** 2 / n ** 2
        second = (S * p[:, None]).T @ S          # <x x^T>
        replica[t] = np.sum(second ** 2) / n ** 2
        diffs[t] = planted[t] - replica[t]
    se = diffs.std(ddof=1) / np.sqrt(mc_budget) if mc_budget > 1 else 0.0
    return NishimoriReport(float(planted.mean()), float(replica.mean()), float(diffs.mean()),
                           float(se), mc_budget)


# ---------------------------------------------------------------------------
# needle in a haystack

@dataclass
class NeedleEstimate:
    n: int
    lam: float
    free_energy: float
    stderr: float
    mmse: float
    mmse_stderr: float
    draws: int


def needle_free_energy(n, lam, mc_budget, rng=0):
    """F_n(lam) = (1/n) E log 2^{-n} sum_sigma exp(sqrt(lam n) Y_sigma - lam n / 2).

    Y_sigma = sqrt(lam n) 1[sigma = sigma0] + Z_sigma; by symmetry sigma0 is
    the first state.  Also returns the posterior MMSE
    E |X - <x>|^2 = 1 - 2 p0 + sum p_sigma^2.
    """
    if n > 24:
        raise ValueError("enumeration budget exceeded (n <= 24)")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    N = 2 ** n
    if lam == 0:
        return NeedleEstimate(n, lam, 0.0, 0.0, 1.0 - 1.0 / N, 0.0, mc_budget)
    g = as_generator(rng)
    a = np.sqrt(lam * n)
    F = np.empty(mc_budget)
    mm = np.empty(mc_budget)
    for t in range(mc_budget):
        h = a * g.standard_normal(N)
        h[0] += lam * n
        h -= lam * n / 2
        lz = logsumexp(h)
        F[t] = (lz - n * np.log(2)) / n
        p = np.exp(h - lz)
        mm[t] = 1 - 2 * p[0] + p @ p
    se = lambda v: float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
    return NeedleEstimate(n, lam, float(F.mean()), se(F), float(mm.mean()), se(mm), mc_budget)


def needle_limit(lam):
    """Large-n free energy: 0 below 2 log 2, lam/2 - log 2 above."""
    return max(0.0, lam / 2 - np.log(2))


# ---------------------------------------------------------------------------
# replica-symmetric potential

def rs_potential(ch, lam, q):
    """F(lam, q) = psi(lam q) - lam q^2 / 4."""
    return scalar_psi(ch, lam * q) - lam * q * q / 4


@dataclass
class FixedPointReport:
    lam: float
    q_star: float
    potential: float
    roots: list
    potentials: list
    iterates: list          # damped-iteration limits from each start
    tie: bool


def rs_fixed_point(ch, lam, tol=1e-8, damping=0.5, starts=16, max_iter=5000, grid=2001):
    """Global maximizer of q -> F(lam, q) among solutions of q = 2 psi'(lam q) in [0, E X^2].

    Roots are bracketed on a q-grid and polished with Brent's method; damped
    iterations from evenly spaced starts are reported as diagnostics.
    """
    if lam <= 0:
        raise ValueError("lam must be > 0")
    top = ch.second_moment
    g = lambda q: 2 * scalar_psi_prime(ch, lam * q) - q
    qs = np.linspace(0, top, grid)
    gv = 2 * scalar_psi_prime(ch, lam * qs) - qs
    roots = []
    if abs(gv[0]) < tol:
        roots.append(0.0)
    for i in range(1, grid):
        if gv[i] == 0:
            roots.append(float(qs[i]))
        elif gv[i - 1] * gv[i] < 0:
            roots.append(float(brentq(g, qs[i - 1], qs[i], xtol=tol * 1e-2, rtol=4 * np.finfo(float).eps)))
    roots = [r for i, r in enumerate(roots) if i == 0 or r - roots[i - 1] > 1e-7]
    if not roots:
        raise ConvergenceError(f"no fixed point bracketed at lam={lam}")

    q = np.linspace(0, top, starts)
    for _ in range(max_iter):
        nq = np.maximum((1 - damping) * q + damping * 2 * scalar_psi_prime(ch, lam * q), 0.0)
        done = np.max(np.abs(nq - q)) < tol
        q = nq
        if done:
            break
    iterates = [float(v) for v in q]

    pots = [rs_potential(ch, lam, q) for q in roots]
    best = int(np.argmax(pots))
    tie = sum(abs(p - pots[best]) < 1e-10 for p in pots) > 1
    return FixedPointReport(lam, roots[best], pots[best], roots, pots, iterates, tie)


@dataclass
class MmseCurve:
    lams: np.ndarray
    q_star: np.ndarray
    mmse: np.ndarray
    dmse: float
    lam_c: float


def dummy_mse(ch):
    """(E X^2)^2 - (E X)^4: error of the estimator that ignores the data."""
    return ch.second_moment ** 2 - ch.mean ** 4


def mmse_limit(ch, lam):
    if lam == 0:
        return dummy_mse(ch)
    q = rs_fixed_point(ch, lam).q_star
    return ch.second_moment ** 2 - q * q


def critical_lambda(ch, lo, hi, tol=1e-4, margin=1e-6):
    """Smallest lam with q*(lam) > (E X)^2 + margin, by bisection on [lo, hi]."""
    base = ch.mean ** 2
    above = lambda lam: rs_fixed_point(ch, lam).q_star > base + margin
    if above(lo) or not above(hi):
        raise ValueError("bracket does not straddle the transition")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if above(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def mmse_limit_curve(ch, lam_grid, tol=1e-4):
    """(E X^2)^2 - q*(lam)^2 on a grid, plus the dummy MSE and the refined crossing lam_c."""
    lams = np.asarray(lam_grid, dtype=float)
    qs = np.array([rs_fixed_point(ch, l).q_star if l > 0 else 0.0 for l in lams])
    base = ch.mean ** 2
    idx = np.nonzero(qs > base + 1e-6)[0]
    lam_c = np.nan
    if len(idx) and idx[0] > 0:
        lam_c = critical_lambda(ch, lams[idx[0] - 1], lams[idx[0]], tol)
    elif len(idx):
        lam_c = lams[0]
    return MmseCurve(lams, qs, ch.second_moment ** 2 - qs ** 2, dummy_mse(ch), lam_c)


def pca_mse_limit(lam):
    """Limit MSE of the rescaled top-eigenvector estimator in the rank-one channel."""
    return 1.0 if lam <= 1 else (1 / lam) * (2 - 1 / lam)


def monotone_lipschitz(ch, lam_grid):
    """(non-decreasing, max slope <= E X^2 / 2) for lam -> psi(lam) on a grid."""
    lams = np.sort(np.asarray(lam_grid, dtype=float))
    F = np.array([scalar_psi(ch, l) for l in lams])
    slopes = np.diff(F) / np.diff(lams)
    return bool(np.all(slopes >= -1e-10)), bool(np.all(slopes <= ch.second_moment / 2 + 1e-10))
