"""Overlap-gap certificates for number partitioning, interpolation paths for
p-spin tensors, and stability of low-degree polynomial maps.

Number partitioning: H(sigma, X) = |<sigma, X>| / sqrt(n), overlap
O(sigma, tau) = |<sigma, tau>| / n.
"""
from dataclasses import dataclass, field
from math import comb, factorial, lgamma, log

import numpy as np
from numpy.polynomial.hermite_e import hermeval
from scipy.special import logsumexp

from .models import contract_full
from .rng import as_generator

MAX_SCAN_N = 26


def binary_entropy(x):
    """h(x) = -x log2 x - (1 - x) log2 (1 - x), with h(0) = h(1) = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    h = np.where((x <= 0) | (x >= 1), 0.0, h)
    return float(h) if h.ndim == 0 else h


# ---------------------------------------------------------------------------
# exhaustive landscape

def sign_class_sums(X):
    """<sigma, X> for the 2^{n-1} sign patterns with sigma_0 = +1.

    Bit i-1 of the index is set when sigma_i = -1 (i >= 1).
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    if n > MAX_SCAN_N:
        raise MemoryError(f"n = {n} exceeds the scan cap {MAX_SCAN_N}")
    sums = np.array([X[0]])
    for i in range(1, n):
        sums = np.concatenate([sums + X[i], sums - X[i]])
    return sums


def index_to_sigma(idx, n):
    idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
    bits = (idx[:, None] >> np.arange(n - 1)) & 1
    return np.column_stack([np.ones(len(idx)), 1 - 2 * bits]).astype(np.int8)


@dataclass
class LandscapeScan:
    n: int
    energy_level: float             # E_n; solutions satisfy H <= 2^{-E_n}
    threshold: float
    indices: np.ndarray             # sign-class indices of solutions
    energies: np.ndarray
    solutions: np.ndarray           # one representative per +-pair
    overlaps: np.ndarray            # pairwise O over distinct solution classes
    min_energy: float

    def forbidden_pairs(self, rho):
        """Number of distinct pairs with O in [rho, (n - 2)/n]."""
        hi = (self.n - 2) / self.n
        return int(np.sum((self.overlaps >= rho - 1e-12) & (self.overlaps <= hi + 1e-12)))

    def overlap_histogram(self):
        vals, counts = np.unique(np.round(self.overlaps * self.n).astype(int), return_counts=True)
        return vals / self.n, counts


def npp_exhaustive_scan(X, eps, max_solutions=200000):
    """All sign classes with H <= 2^{-eps n} and their pairwise overlaps."""
    n = len(X)
    sums = sign_class_sums(X)
    H = np.abs(sums) / np.sqrt(n)
    thr = 2.0 ** (-eps * n)
    idx = np.nonzero(H <= thr)[0]
    if len(idx) > max_solutions:
        raise MemoryError(f"{len(idx)} solutions exceed the cap {max_solutions}")
    S = index_to_sigma(idx, n).astype(float)
    G = np.abs(S @ S.T) / n
    iu = np.triu_indices(len(idx), 1)
    return LandscapeScan(n, eps * n, thr, idx, H[idx], S.astype(np.int8), G[iu], float(H.min()))


def npp_first_moment_exponent(n, eps, rho, form="exact", C=1.0, c=0.0):
    """Upper bound on (1/n) log2 E[#forbidden pairs].

    ``exact``: pair count 2^n * 2 sum_{k<=K} C(n,k), K = ceil(n(1-rho)/2), and the
    bivariate-normal box bound C1 / sqrt(1 - rhobar^2) 2^{-2 n eps} with
    rhobar = (n-2)/n, C1 = 4 C^2 / (2 pi).
    ``entropy``: 1 + h((1-rho)/2) - 2 eps + log2(n)/(2n) + c/n; pass n = inf for the limit.
    """
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    if form == "entropy":
        if np.isinf(n):
            return 1 + binary_entropy((1 - rho) / 2) - 2 * eps
        return 1 + binary_entropy((1 - rho) / 2) - 2 * eps + np.log2(n) / (2 * n) + c / n
    if rho > (n - 2) / n + 1e-12:
        raise ValueError("rho must be <= (n-2)/n")
    K = int(np.ceil(n * (1 - rho) / 2 - 1e-12))
    pairs = n + np.log2(2 * sum(comb(n, k) for k in range(1, K + 1)))
    rb = (n - 2) / n
    box = np.log2(4 * C * C / (2 * np.pi) / np.sqrt(1 - rb * rb))
    return (pairs + box - 2 * n * eps) / n


def certified_rho(n, eps, margin=0.1, step=0.01, form="exact"):
    """Smallest grid rho with exponent <= -margin, or None."""
    hi = (n - 2) / n
    for rho in np.round(np.arange(step, hi + 1e-12, step), 10):
        if npp_first_moment_exponent(n, eps, rho, form) <= -margin:
            return float(rho)
    return None


@dataclass
class GibbsRatios:
    pi1: float
    pi2: float
    pi3: float
    log_ratio: float            # log(min(pi1, pi3) / pi2)
    fitted_constant: float      # log_ratio / (beta 2^{-n eps})
    size2: int


def npp_gibbs_partition_ratio(X, beta, eps, rho):
    """pi_beta of I1 = {|<s,s*>|/n <= rho}, I2 = {rho <= <s,s*>/n <= (n-2)/n}, I3 = {s*}.

    Enumerates all 2^n sign vectors through their sign classes.
    """
    n = len(X)
    sums = sign_class_sums(X)
    H = np.abs(sums) / np.sqrt(n)
    star = int(np.argmin(H))
    idx = np.arange(len(H), dtype=np.int64)
    ham = np.bitwise_count(idx ^ star).astype(np.int64)
    m = (n - 2 * ham) / n                      # overlap of sigma with sigma*; -m for -sigma
    lw = -beta * H
    hi = (n - 2) / n
    tol = 1e-12
    in1 = np.abs(m) <= rho + tol
    # sigma in I2 when m in band, -sigma in I2 when -m in band
    in2_pos = (m >= rho - tol) & (m <= hi + tol)
    in2_neg = (-m >= rho - tol) & (-m <= hi + tol)
    logZ = logsumexp(np.concatenate([lw, lw]))
    lp1 = logsumexp(np.concatenate([lw[in1], lw[in1]])) - logZ if in1.any() else -np.inf
    parts2 = np.concatenate([lw[in2_pos], lw[in2_neg]])
    if len(parts2) == 0:
        raise ValueError("I2 is empty; the inequality is vacuous")
    lp2 = logsumexp(parts2) - logZ
    lp3 = lw[star] - logZ
    lr = min(lp1, lp3) - lp2
    scale = beta * 2.0 ** (-n * eps)
    return GibbsRatios(float(np.exp(lp1)), float(np.exp(lp2)), float(np.exp(lp3)), float(lr),
                       float(lr / scale) if scale > 0 else np.nan, len(parts2))


# ---------------------------------------------------------------------------
# interpolation paths

def interpolate(Y, Yp, tau):
    """Y_tau = cos(tau) Y + sin(tau) Y'; the endpoints are returned exactly."""
    Y, Yp = np.asarray(Y), np.asarray(Yp)
    if Y.shape != Yp.shape:
        raise ValueError("shape mismatch")
    if tau == 0:
        return Y.copy()
    if tau == np.pi / 2:
        return Yp.copy()
    return np.cos(tau) * Y + np.sin(tau) * Yp


def tensor_energy(x, Y):
    """<Y, x^{tensor p}> / n^{(p+1)/2} (no norm check)."""
    n, p = Y.shape[0], Y.ndim
    return contract_full(Y, np.asarray(x, dtype=float)) / n ** ((p + 1) / 2)


def path_energies(x, Y, Yp, taus):
    return np.array([tensor_energy(x, interpolate(Y, Yp, t)) for t in taus])


def moment_check(values):
    """(mean, variance, excess kurtosis) z-scores against N(0,1) for pooled entries."""
    v = np.asarray(values, dtype=float).ravel()
    m = len(v)
    z_mean = v.mean() / np.sqrt(1 / m)
    z_var = (v.var() - 1) / np.sqrt(2 / m)
    z_kurt = (np.mean(v ** 4) - 3) / np.sqrt(96 / m)
    return z_mean, z_var, z_kurt


# ---------------------------------------------------------------------------
# polynomial maps in the orthonormal Hermite basis

def hermite_normalized(x, k):
    """He_k(x) / sqrt(k!)."""
    c = np.zeros(k + 1)
    c[k] = 1.0
    return hermeval(x, c) / np.sqrt(factorial(k))


@dataclass
class HermitePolynomial:
    """f: R^d -> R^k, f(x) = sum_alpha c_alpha prod_j He_{alpha_j}(x_j)/sqrt(alpha_j!).

    Basis functions are orthonormal under N(0, I_d), so E|f(X)|^2 = sum |c_alpha|^2
    and E|f(X) - f(Y)|^2 = 2 sum |c_alpha|^2 (1 - rho^{|alpha|}) for Cov(X, Y) = rho I.
    """
    d: int
    multi_indices: np.ndarray   # (terms, d) nonnegative ints
    coefs: np.ndarray           # (terms, k)

    @property
    def degree(self):
        return int(self.multi_indices.sum(axis=1).max())

    def __call__(self, X):
        X = np.atleast_2d(X)
        out = np.zeros((X.shape[0], self.coefs.shape[1]))
        cache = {}
        for a, c in zip(self.multi_indices, self.coefs):
            basis = np.ones(X.shape[0])
            for j in np.nonzero(a)[0]:
                key = (j, a[j])
                if key not in cache:
                    cache[key] = hermite_normalized(X[:, j], a[j])
                basis = basis * cache[key]
            out += basis[:, None] * c
        return out

    def norm2(self):
        return float(np.sum(self.coefs ** 2))

    def normalized(self):
        s = self.norm2()
        if s == 0:
            raise ValueError("zero polynomial cannot be normalized")
        return HermitePolynomial(self.d, self.multi_indices, self.coefs / np.sqrt(s))

    def exact_discrepancy(self, rho):
        deg = self.multi_indices.sum(axis=1)
        return float(2 * np.sum(np.sum(self.coefs ** 2, axis=1) * (1 - rho ** deg)))


def random_polynomial(g, d, D, k=1, terms=12, exact_degree=True):
    """Random coefficients on random Hermite multi-indices of total degree <= D."""
    idx = set()
    if exact_degree:
        a = np.zeros(d, dtype=int)
        for j in g.integers(0, d, size=D):
            a[j] += 1
        idx.add(tuple(a))
    while len(idx) < terms:
        deg = int(g.integers(0, D + 1))
        a = np.zeros(d, dtype=int)
        for j in g.integers(0, d, size=deg):
            a[j] += 1
        idx.add(tuple(a))
        if len(idx) >= comb(d + D, D):
            break
    M = np.array(sorted(idx), dtype=int)
    return HermitePolynomial(d, M, g.standard_normal((len(M), k))).normalized()


def polynomial_corpus(seed, size=200, max_degree=4):
    """Deterministic corpus: dimension 3..10, output dimension 1..3, degree 1..max_degree."""
    g = as_generator(seed)
    out = []
    for _ in range(size):
        d = int(g.integers(3, 11))
        D = int(g.integers(1, max_degree + 1))
        k = int(g.integers(1, 4))
        out.append(random_polynomial(g, d, D, k, terms=int(g.integers(3, 16))))
    return out


def linear_isometry(d):
    """f(x) = x / sqrt(d)."""
    return HermitePolynomial(d, np.eye(d, dtype=int), np.eye(d) / np.sqrt(d))


def correlated_pair(g, m, d, rho):
    X = g.standard_normal((m, d))
    Y = rho * X + np.sqrt(1 - rho * rho) * g.standard_normal((m, d))
    return X, Y


@dataclass
class StabilityReport:
    degree: int
    rho: float
    mean: float
    mean_stderr: float
    mean_bound: float
    exact_mean: float
    t: float
    tail: float
    tail_stderr: float
    tail_bound: float

    @property
    def mean_ok(self):
        return self.mean <= self.mean_bound + 3 * self.mean_stderr

    @property
    def tail_ok(self):
        return self.tail <= self.tail_bound + 3 * self.tail_stderr


def stability_tail_bound(D, t):
    """exp(-(D / 3e) t^{1/D}), valid for t >= (6e)^D."""
    if t < (6 * np.e) ** D:
        raise ValueError("tail bound needs t >= (6e)^D")
    return float(np.exp(-(D / (3 * np.e)) * t ** (1 / D)))


def poly_stability_check(f, D, rho, mc_budget, rng=0, t=None):
    """Mean and tail of |f(X) - f(Y)|^2 for Y = rho X + sqrt(1 - rho^2) X'."""
    if f.norm2() == 0:
        raise ValueError("normalization failure (zero polynomial)")
    f = f.normalized()
    g = as_generator(rng)
    X, Y = correlated_pair(g, mc_budget, f.d, rho)
    diff = np.sum((f(X) - f(Y)) ** 2, axis=1)
    t = (6 * np.e) ** D if t is None else t
    thr = 2 * t * (1 - rho ** D)
    p = float(np.mean(diff >= thr)) if thr > 0 else float(np.mean(diff > 0))
    return StabilityReport(
        D, rho, float(diff.mean()), float(diff.std(ddof=1) / np.sqrt(mc_budget)),
        2 * (1 - rho ** D), f.exact_discrepancy(rho), t, p,
        float(np.sqrt(max(p * (1 - p), 1 / mc_budget) / mc_budget)), stability_tail_bound(D, t))


def hypercontractive_tail_check(f, D, q_grid, mc_budget, rng=0):
    """Rows (q, E|f|^{2q}, stderr, [3(q-1)]^{qD} (E|f|^2)^q, ok within 3 stderr)."""
    g = as_generator(rng)
    X = g.standard_normal((mc_budget, f.d))
    sq = np.sum(f(X) ** 2, axis=1)
    m2 = f.norm2()
    rows = []
    for q in q_grid:
        if not 2 <= q <= 6:
            raise ValueError("q must lie in [2, 6]")
        v = sq ** q
        est, se = float(v.mean()), float(v.std(ddof=1) / np.sqrt(mc_budget))
        rhs = (3 * (q - 1)) ** (q * D) * m2 ** q
        rows.append((q, est, se, rhs, est <= rhs + 3 * se))
    return rows


# ---------------------------------------------------------------------------
# rounding, optimization harness and the ensemble-OGP contradiction

def round_to_sphere(f_value):
    """sqrt(n) f / |f|, or inf when f = 0."""
    f_value = np.asarray(f_value, dtype=float)
    nrm = np.linalg.norm(f_value)
    if nrm == 0:
        return np.inf
    return np.sqrt(len(f_value)) * f_value / nrm


@dataclass
class OptimizationReport:
    normalization: float        # E|f|^2 / n
    failure_rate: float         # P(H(g_f(Y); Y) < mu or |f| < gamma sqrt(n))
    stderr: float


def optimization_check(f_map, sample_y, n, mu, gamma, mc_budget, rng=0):
    """Empirical (mu, delta, gamma)-optimization profile of a map Y -> R^n."""
    g = as_generator(rng)
    norms = np.empty(mc_budget)
    fail = np.empty(mc_budget, dtype=bool)
    for t in range(mc_budget):
        Y = sample_y(g)
        fv = f_map(Y)
        norms[t] = fv @ fv
        x = round_to_sphere(fv)
        bad = np.isscalar(x) or tensor_energy(x, Y) < mu or np.sqrt(norms[t]) < gamma * np.sqrt(n)
        fail[t] = bad
    p = float(fail.mean())
    return OptimizationReport(float(norms.mean() / n), p, float(np.sqrt(max(p * (1 - p), 1 / mc_budget) / mc_budget)))


@dataclass
class EventReport:
    eogp: bool          # (i) on the computed outputs
    success: bool       # (ii)
    stable: bool        # (iii)
    jump_index: int     # an l with nu2 - nu1 <= |x_l - x_{l+1}| / sqrt(n), or -1
    max_jump: float
    taus: np.ndarray = field(repr=False)

    @property
    def contradiction(self):
        return self.eogp and self.success and self.stable


def eogp_events(f_map, Y, Yp, L, mu, nu1, nu2, gamma, c):
    """Evaluate events (i)-(iii) along tau_l = l pi / (2L).

    (i) is checked on the algorithm's own outputs: overlaps (1/n)<x_0, x_l> of
    successful points avoid (nu1, nu2) and the endpoints are nu1-separated.
    """
    if c > (nu2 - nu1) ** 2:
        raise ValueError("need c <= (nu2 - nu1)^2")
    taus = np.array([l * np.pi / (2 * L) for l in range(L + 1)])
    taus[-1] = np.pi / 2
    Ys = [interpolate(Y, Yp, t) for t in taus]
    F = [np.asarray(f_map(y), dtype=float) for y in Ys]
    n = len(F[0])
    xs = [round_to_sphere(fv) for fv in F]
    if any(np.isscalar(x) for x in xs):
        return EventReport(False, False, False, -1, np.nan, taus)
    H = np.array([tensor_energy(x, y) for x, y in zip(xs, Ys)])
    norms = np.array([np.linalg.norm(fv) for fv in F])
    success = bool(np.all(H >= mu) and np.all(norms >= gamma * np.sqrt(n)))
    R = np.array([xs[0] @ x / n for x in xs])
    in_gap = (R > nu1) & (R < nu2)
    eogp = bool(not in_gap[H >= mu].any() and R[-1] <= nu1)
    steps = np.array([np.linalg.norm(xs[l] - xs[l + 1]) / np.sqrt(n) for l in range(L)])
    fsteps = np.array([np.sum((F[l] - F[l + 1]) ** 2) for l in range(L)])
    stable = bool(np.all(fsteps < gamma ** 2 * c * n))
    jumps = np.nonzero(steps >= nu2 - nu1)[0]
    return EventReport(eogp, success, stable, int(jumps[0]) if len(jumps) else -1,
                       float(steps.max()), taus)


def rescaling_inequality(x, y, a, b, gamma):
    """|x - y| <= |a x - b y| / gamma for unit x, y and a, b >= gamma; returns (lhs, rhs)."""
    return float(np.linalg.norm(x - y)), float(np.linalg.norm(a * x - b * y) / gamma)


def interpolation_window(D_tilde, gamma, c, delta):
    """(lower, upper) on the number of interpolation steps L.

    lower = (pi / (2 gamma)) sqrt(3 D~ / c) (sqrt(6e))^{D~},
    upper = min(1/(9 delta) - 1, e^{2 D~} / 3).
    """
    lo = np.pi / (2 * gamma) * np.sqrt(3 * D_tilde / c) * np.sqrt(6 * np.e) ** D_tilde
    hi = min(1 / (9 * delta) - 1, np.exp(2 * D_tilde) / 3)
    return float(lo), float(hi)


def feasible_windows(D, gamma, c, delta, extra=50):
    """Integer (D~, L_min, L_max) for D <= D~ <= D + extra where the window is non-empty."""
    out = []
    for Dt in range(D, D + extra + 1):
        lo, hi = interpolation_window(Dt, gamma, c, delta)
        Lmin, Lmax = int(np.ceil(lo)), int(np.floor(hi))
        if Lmin <= Lmax:
            out.append((Dt, Lmin, Lmax))
    return out
