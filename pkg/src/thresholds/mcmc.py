"""Gibbs measures on sparse slices, Metropolis dynamics, free-energy wells and
hitting times.

Sparse PCA energy: H(v) = -v^T Y v for v in {0,1}^n with |v|_0 = k'.
Gaussian additive energy on a finite set S of unit vectors: H(v) = -<v, Y>.
"""
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
from scipy.special import comb as scomb
from scipy.special import logsumexp

from .freeenergy import GibbsTable
from .lowdeg import fp_value, overlap_quantile_delta
from .overlaps import rademacher_overlaps
from .rng import as_generator

MAX_STATES = 10 ** 6


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# state spaces

class SparseSlice:
    """All v in {0,1}^n with exactly k ones, in colexicographic rank order.

    Neighbours differ in exactly two coordinates (one index swapped out, one
    swapped in), so every state has k (n - k) of them.
    """

    def __init__(self, n, k):
        if not 1 <= k < n:
            raise ValueError("need 1 <= k < n")
        if comb(n, k) > MAX_STATES:
            raise ValueError("slice too large to enumerate")
        self.n, self.k = n, k
        combos = np.array(list(combinations(range(n), k)), dtype=np.int64).reshape(-1, k)
        order = np.argsort(self.rank(combos))
        self.supports = combos[order]
        self._neighbors = None

    def __len__(self):
        return len(self.supports)

    @property
    def degree(self):
        return self.k * (self.n - self.k)

    def rank(self, supports):
        """Colex rank sum_i C(c_i, i + 1) of sorted supports."""
        supports = np.asarray(supports)
        pos = np.arange(1, self.k + 1)
        return scomb(supports, pos, exact=False).round().astype(np.int64).sum(axis=-1)

    def indicators(self):
        V = np.zeros((len(self), self.n))
        np.put_along_axis(V, self.supports, 1.0, axis=1)
        return V

    def complements(self):
        mask = np.ones((len(self), self.n), dtype=bool)
        np.put_along_axis(mask, self.supports, False, axis=1)
        return np.nonzero(mask)[1].reshape(len(self), self.n - self.k)

    def neighbors(self):
        """(states, k (n - k)) table; slot a (n - k) + b swaps out support[a] for complement[b]."""
        if self._neighbors is None:
            comp = self.complements()
            C = len(self)
            out = np.empty((C, self.degree), dtype=np.int64)
            keep = [np.delete(self.supports, a, axis=1) for a in range(self.k)]
            for a in range(self.k):
                for b in range(self.n - self.k):
                    new = np.sort(np.column_stack([keep[a], comp[:, b]]), axis=1)
                    out[:, a * (self.n - self.k) + b] = self.rank(new)
            self._neighbors = out
        return self._neighbors

    def energies(self, Y):
        """H(v) = -v^T Y v for every state."""
        S = self.supports
        return -Y[S[:, :, None], S[:, None, :]].sum(axis=(1, 2))

    def overlaps(self, x):
        """<v, x> for a 0/1 signal x."""
        return np.asarray(x, dtype=float)[self.supports].sum(axis=1)

    def index_of(self, support):
        return int(self.rank(np.sort(np.asarray(support))[None, :])[0])


def hypercube_states(N):
    """All of {+-1/sqrt(N)}^N."""
    if 2 ** N > MAX_STATES:
        raise ValueError("hypercube too large to enumerate")
    bits = ((np.arange(2 ** N)[:, None] >> np.arange(N)) & 1).astype(float)
    return (1 - 2 * bits) / np.sqrt(N)


# ---------------------------------------------------------------------------
# Gibbs tables, Metropolis

def gibbs_exact(energies, beta, states=None):
    """mu_beta(v) proportional to exp(-beta H(v)), normalized in log space."""
    energies = np.asarray(energies, dtype=float)
    if len(energies) > MAX_STATES:
        raise ValueError("space too large")
    return GibbsTable(states if states is not None else np.arange(len(energies)), -beta * energies)


def metropolis_step(state, propose, delta_h, beta, g):
    """One Metropolis move with a symmetric proposal; only H(cand) - H(state) is used."""
    cand = propose(g, state)
    dh = delta_h(state, cand)
    if dh <= 0 or g.random() < np.exp(-beta * dh):
        return cand
    return state


def metropolis_matrix(energies, neighbors, beta):
    """Explicit transition matrix: uniform proposal over neighbours, acceptance 1 ^ exp(-beta dH)."""
    C, d = neighbors.shape
    if C > 1000:
        raise ValueError("explicit matrix limited to 1000 states")
    P = np.zeros((C, C))
    for s in range(C):
        for t in neighbors[s]:
            P[s, t] += min(1.0, np.exp(-beta * (energies[t] - energies[s]))) / d
        P[s, s] += 1.0 - P[s].sum()
    return P


def detailed_balance_check(P, pi):
    """max_{x,y} |pi(x) P(x,y) - pi(y) P(y,x)|."""
    F = pi[:, None] * P
    return float(np.max(np.abs(F - F.T)))


def run_chain(energies, neighbors, beta, steps, start, rng=0, debug_supports=None):
    """Single Metropolis chain on an indexed space; returns the visit counts.

    With ``debug_supports`` every accepted move is checked to change exactly two
    coordinates of the sparse indicator.
    """
    g = as_generator(rng)
    d = neighbors.shape[1]
    props = g.integers(0, d, size=steps)
    logu = np.log(g.random(steps))
    E = energies.tolist()
    nbr = neighbors.tolist()
    counts = np.zeros(len(energies), dtype=np.int64)
    s = int(start)
    visits = []
    for t in range(steps):
        c = nbr[s][props[t]]
        dh = E[c] - E[s]
        if dh <= 0 or logu[t] < -beta * dh:
            if debug_supports is not None:
                diff = set(debug_supports[s]) ^ set(debug_supports[c])
                assert len(diff) == 2, "non-local transition"
            s = c
        visits.append(s)
    np.add.at(counts, np.array(visits, dtype=np.int64), 1)
    return counts


def tv_distance(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def occupation_tv(energies, neighbors, beta, steps, rng=0, start=0):
    counts = run_chain(energies, neighbors, beta, steps, start, rng)
    pi = gibbs_exact(energies, beta).probs()
    return tv_distance(counts / counts.sum(), pi)


# ---------------------------------------------------------------------------
# free energy wells

@dataclass
class WellDepth:
    depth: float
    size_a: int
    size_b: int
    ell: int
    beta: float


def well_sets(overlaps, ell):
    """A = {0 <= <v,x> < ell}, B = {ell <= <v,x> <= 2 ell}."""
    if ell < 1 or int(ell) != ell:
        raise ValueError("ell must be a positive integer")
    A = (overlaps >= 0) & (overlaps < ell)
    B = (overlaps >= ell) & (overlaps <= 2 * ell)
    return A, B


def well_depth(energies, overlaps, beta, ell):
    """D = log mu_beta(A) - log mu_beta(B)."""
    A, B = well_sets(overlaps, ell)
    if not A.any() or not B.any():
        raise ValueError(f"empty well set at ell={ell}: |A|={A.sum()}, |B|={B.sum()}")
    lw = -beta * np.asarray(energies, dtype=float)
    D = float(logsumexp(lw[A]) - logsumexp(lw[B]))
    return WellDepth(D, int(A.sum()), int(B.sum()), int(ell), beta)


def well_depth_lower_bound(beta, lam, k, ell):
    """-(4 beta lam / k) ell^2 + (log 2 / 2) ell - log 2."""
    return -4 * beta * lam / k * ell ** 2 + np.log(2) / 2 * ell - np.log(2)


def informative_windows(n, k, kp, lam):
    """(k' window, ell window) from the informative-range definitions; empty windows have lo > hi."""
    ln = np.log(n)
    kwin = (k * k * ln / (lam * lam * n), n * lam * lam / ln)
    lwin = (max(1.0, k * kp / n), k / (2 * lam) * np.sqrt(kp / n * ln))
    return kwin, lwin


# ---------------------------------------------------------------------------
# hitting times

@dataclass
class HittingReport:
    t_grid: np.ndarray
    empirical: np.ndarray       # Pr{tau <= t}
    bound: np.ndarray           # t exp(-D)
    sigma: np.ndarray           # binomial sd at min(bound, 1)
    depth: float
    replicas: int
    hits: int

    @property
    def violations(self):
        return int(np.sum(self.empirical > self.bound + 3 * self.sigma))


def sample_conditional(table_probs, mask, size, g):
    """Draws from mu(. | mask) using the exact table."""
    mass = table_probs[mask].sum()
    if mass < 1e-6:
        raise ValueError(f"conditioning set has mass {mass:.3g} < 1e-6")
    p = np.where(mask, table_probs, 0.0) / mass
    return g.choice(len(p), size=size, p=p)


def hitting_times(energies, neighbors, beta, start, target, t_max, rng=0):
    """First t >= 1 with X_t in ``target`` for vectorized Metropolis replicas; t_max + 1 if never."""
    g = as_generator(rng)
    state = np.array(start, dtype=np.int64)
    R = len(state)
    d = neighbors.shape[1]
    tau = np.full(R, t_max + 1, dtype=np.int64)
    alive = np.ones(R, dtype=bool)
    for t in range(1, t_max + 1):
        cand = neighbors[state, g.integers(0, d, size=R)]
        dh = energies[cand] - energies[state]
        acc = (dh <= 0) | (g.random(R) < np.exp(-beta * np.maximum(dh, 0)))
        state = np.where(acc, cand, state)
        hit = alive & target[state]
        tau[hit] = t
        alive &= ~hit
        if not alive.any():
            break
    return tau


def hitting_time_experiment(energies, neighbors, overlaps, beta, ell, t_max, replicas,
                            rng=0, t_grid=None):
    """Empirical Pr{tau <= t} from X_0 ~ mu(. | A) against t exp(-D_{beta,ell})."""
    g = as_generator(rng)
    A, B = well_sets(overlaps, ell)
    wd = well_depth(energies, overlaps, beta, ell)
    pi = gibbs_exact(energies, beta).probs()
    start = sample_conditional(pi, A, replicas, g)
    tau = hitting_times(energies, neighbors, beta, start, B, t_max, g)
    if t_grid is None:
        t_grid = np.unique(np.round(np.logspace(0, np.log10(t_max), 40)).astype(np.int64))
    t_grid = np.asarray(t_grid)
    emp = np.array([(tau <= t).mean() for t in t_grid])
    bound = t_grid * np.exp(-wd.depth)
    b = np.minimum(bound, 1.0)
    sigma = np.sqrt(b * (1 - b) / replicas)
    return HittingReport(t_grid, emp, bound, sigma, wd.depth, replicas, int((tau <= t_max).sum()))


def walk_hitting_bound(n, kp, t):
    """Pr{tau >= t} <= k' n^{2k'} / t for the beta = 0 walk."""
    return kp * float(n) ** (2 * kp) / np.asarray(t, dtype=float)


def walk_hitting_experiment(space, target_index, t_max, replicas, rng=0):
    """Uniform-neighbour walk from uniform starts; returns hitting times of one fixed state."""
    g = as_generator(rng)
    nbr = space.neighbors()
    start = g.integers(0, len(space), size=replicas)
    target = np.zeros(len(space), dtype=bool)
    target[target_index] = True
    zero = np.zeros(len(space))
    tau = hitting_times(zero, nbr, 0.0, start, target, t_max, g)
    tau[start == target_index] = 0
    return tau


# ---------------------------------------------------------------------------
# hill climbing

def hill_climb(values, neighbors, start, max_steps=10 ** 6):
    """Move to the best neighbour while it strictly improves ``values`` (maximization).

    Ties between equally good neighbours go to the lowest state index.
    Returns the trajectory of state indices.
    """
    traj = [int(start)]
    s = int(start)
    for _ in range(max_steps):
        nb = neighbors[s]
        vals = values[nb]
        best = vals.max()
        if best <= values[s]:
            break
        s = int(nb[vals == best].min())
        traj.append(s)
    return traj


def is_local_max(values, neighbors, s):
    return bool(np.all(values[neighbors[s]] <= values[s]))


# ---------------------------------------------------------------------------
# Franz-Parisi barrier on the hypercube prior

@dataclass
class BarrierReport:
    lam: float
    beta: float
    delta: float
    bound: float
    ratios: np.ndarray
    violation_rate: float
    allowed_rate: float
    sigma: float
    fp: float

    @property
    def ok(self):
        return self.violation_rate <= self.allowed_rate + 3 * self.sigma


def fp_tilde_lambda(beta, lam, eps):
    """lam~ = sqrt(beta lam (2 + eps) / (1 - 2 eps))."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must be in (0, 1/2)")
    return np.sqrt(beta * lam * (2 + eps) / (1 - 2 * eps))


def barrier_bound(N, lam, beta, eps, D):
    """2 (2 FP(D + log 2, lam~))^{1 - 2 eps} e^{-eps D} with the exact hypercube overlap law."""
    ov = rademacher_overlaps(N)
    fp = fp_value(ov, fp_tilde_lambda(beta, lam, eps), D + np.log(2), exact=True).value
    return 2 * (2 * fp) ** (1 - 2 * eps) * np.exp(-eps * D), fp


def barrier_sets(states, u, delta, eps):
    """A = {|<u,v>| <= delta}, B = {<u,v> in (delta, (1 + eps) delta]}."""
    s = states @ u
    tol = 1e-12
    A = np.abs(s) <= delta + tol
    B = (s > delta + tol) & (s <= (1 + eps) * delta + tol)
    return A, B


def fp_barrier_pipeline(N, lam, beta, eps, D, draws, rng=0):
    """nu_beta(B) / nu_beta(A) over noise draws, against the Franz-Parisi barrier bound.

    Ground truth u is the all-plus vector (the hypercube is transitive).
    """
    if D < 2:
        raise ValueError("D must be >= 2")
    g = as_generator(rng)
    S = hypercube_states(N)
    u = np.ones(N) / np.sqrt(N)
    delta = overlap_quantile_delta(rademacher_overlaps(N), D, exact=True)
    A, B = barrier_sets(S, u, delta, eps)
    bound, fp = barrier_bound(N, lam, beta, eps, D)
    ratios = np.empty(draws)
    for t in range(draws):
        Y = lam * u + g.standard_normal(N)
        lw = beta * (S @ Y)
        ratios[t] = np.exp(logsumexp(lw[B]) - logsumexp(lw[A])) if B.any() else 0.0
    rate = float(np.mean(ratios > bound))
    allowed = float(np.exp(-eps * D))
    sigma = float(np.sqrt(allowed * (1 - allowed) / draws))
    return BarrierReport(lam, beta, delta, float(bound), ratios, rate, allowed, sigma, float(fp))


def bayes_temperature_gap(N, lam, rng=0):
    """max |nu_lam(v) - posterior(v)|, posterior from the Gaussian likelihood of Y = lam u + Z."""
    g = as_generator(rng)
    S = hypercube_states(N)
    u = S[g.integers(len(S))]
    Y = lam * u + g.standard_normal(N)
    nu = gibbs_exact(-(S @ Y), lam).probs()
    loglik = -0.5 * np.sum((Y - lam * S) ** 2, axis=1)
    post = np.exp(loglik - logsumexp(loglik))
    return float(np.max(np.abs(nu - post)))


@dataclass
class LocalChainReport:
    N: int
    delta: float
    step: float
    tau_bound: float
    fp: float
    taus: np.ndarray = field(repr=False)
    fraction_below: float
    allowed: float
    sigma: float
    skipped: str = ""

    @property
    def ok(self):
        return bool(self.skipped) or self.fraction_below <= self.allowed + 3 * self.sigma


def local_chain_hitting_bound(N, lam, beta, eps, D, replicas, rng=0, t_max=None):
    """Single-flip Metropolis on {+-1/sqrt(N)}^N targeting nu_beta, started from nu_beta(. | A).

    The chain is Delta-local with Delta = 2/sqrt(N), which must not exceed
    eps delta(D).  Reports the fraction of replicas hitting <u, X_t> > delta
    before e^{eps D/2} / (2 (2 FP(D + log 2, lam~))^{1 - 2 eps}).
    """
    ov = rademacher_overlaps(N)
    delta = overlap_quantile_delta(ov, D, exact=True)
    step = 2 / np.sqrt(N)
    if step > eps * delta:
        raise PreconditionError(f"chain step {step:.4g} exceeds eps*delta = {eps * delta:.4g}")
    fp = fp_value(ov, fp_tilde_lambda(beta, lam, eps), D + np.log(2), exact=True).value
    tau_bound = np.exp(eps * D / 2) / (2 * (2 * fp) ** (1 - 2 * eps))
    allowed = float(np.exp(-eps * D / 2))
    sigma = float(np.sqrt(allowed * (1 - allowed) / replicas))
    if tau_bound < 1:
        return LocalChainReport(N, delta, step, tau_bound, fp, np.array([]), 0.0, allowed, sigma,
                                skipped="vacuous bound (< 1)")
    g = as_generator(rng)
    t_max = int(np.ceil(tau_bound)) if t_max is None else t_max
    Y = lam * np.ones(N) / np.sqrt(N) + g.standard_normal(N)
    # nu_beta is a product measure: P(v_i = +) = sigmoid(2 beta Y_i / sqrt(N))
    p_plus = 1 / (1 + np.exp(-2 * beta * Y / np.sqrt(N)))
    sgn = np.empty((replicas, N))
    filled = 0
    for _ in range(10000):
        cand = np.where(g.random((replicas, N)) < p_plus, 1.0, -1.0)
        ok = np.abs(cand.sum(axis=1) / N) <= delta + 1e-12
        take = min(int(ok.sum()), replicas - filled)
        sgn[filled:filled + take] = cand[ok][:take]
        filled += take
        if filled == replicas:
            break
    else:
        raise ValueError("rejection sampling from nu(. | A) failed")
    ov_now = sgn.sum(axis=1) / N
    tau = np.full(replicas, t_max + 1, dtype=np.int64)
    alive = np.ones(replicas, dtype=bool)
    rows = np.arange(replicas)
    coef = 2 * beta * Y / np.sqrt(N)
    for t in range(1, t_max + 1):
        i = g.integers(0, N, size=replicas)
        v = sgn[rows, i]
        # flipping v_i changes beta <v, Y> by -2 beta v_i Y_i / sqrt(N)
        logacc = -v * coef[i]
        acc = np.log(g.random(replicas)) < logacc
        sgn[rows[acc], i[acc]] = -v[acc]
        ov_now = ov_now - np.where(acc, 2 * v / N, 0.0)
        hit = alive & (ov_now > delta + 1e-12)
        tau[hit] = t
        alive &= ~hit
    frac = float(np.mean(tau < tau_bound))
    return LocalChainReport(N, delta, step, float(tau_bound), float(fp), tau, frac, allowed, sigma)
