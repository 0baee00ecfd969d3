"""Multigraph-indexed cumulant recursions (kappa for estimation, r for testing).

A multi-index alpha over vertex pairs i <= j is stored as a ``Multigraph``.
Moment oracles return exact E[X^alpha] (and E[x X^alpha] for a scalar target
x) for small declared models.
"""
import csv
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement, product
from math import comb, factorial, prod

import numpy as np
from scipy.special import logsumexp


class OracleDomainError(ValueError):
    pass


SUBGRAPH_CAP = 10 ** 6


@dataclass(frozen=True)
class Multigraph:
    """Sorted tuple of ((i, j), multiplicity) with i <= j and multiplicity >= 1."""
    edges: tuple = ()

    @classmethod
    def from_pairs(cls, pairs):
        counts = {}
        for i, j in pairs:
            e = (min(i, j), max(i, j))
            counts[e] = counts.get(e, 0) + 1
        return cls(tuple(sorted(counts.items())))

    @classmethod
    def from_dict(cls, d):
        for e, m in d.items():
            if m < 1 or e[0] > e[1]:
                raise ValueError(f"bad edge entry {e}: {m}")
        return cls(tuple(sorted(d.items())))

    def as_dict(self):
        return dict(self.edges)

    @property
    def size(self):
        return sum(m for _, m in self.edges)

    @cached_property
    def vertices(self):
        return frozenset(v for e, _ in self.edges for v in e)

    def factorial(self):
        return prod(factorial(m) for _, m in self.edges)

    def components(self):
        """Vertex sets of the connected components (self-loops count as edges)."""
        parent = {v: v for v in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for (i, j), _ in self.edges:
            parent[find(i)] = find(j)
        groups = {}
        for v in self.vertices:
            groups.setdefault(find(v), set()).add(v)
        return [frozenset(g) for g in groups.values()]

    def has_component_avoiding(self, root):
        return any(root not in c for c in self.components())

    def sub_multigraphs(self, strict=True):
        """All beta <= alpha edgewise, with the binomial weight C(alpha, beta)."""
        keys = [e for e, _ in self.edges]
        mults = [m for _, m in self.edges]
        if prod(m + 1 for m in mults) > SUBGRAPH_CAP:
            raise OracleDomainError("sub-multigraph lattice too large")
        for choice in product(*(range(m + 1) for m in mults)):
            if strict and list(choice) == mults:
                continue
            beta = Multigraph(tuple((e, c) for e, c in zip(keys, choice) if c))
            weight = prod(comb(m, c) for m, c in zip(mults, choice))
            yield beta, weight

    def minus(self, beta):
        d = self.as_dict()
        for e, m in beta.edges:
            d[e] -= m
        return Multigraph(tuple((e, m) for e, m in sorted(d.items()) if m))

    def label(self):
        """Edge-list string, e.g. '0-1x2;1-2'."""
        if not self.edges:
            return "empty"
        return ";".join(f"{i}-{j}" + (f"x{m}" if m > 1 else "") for (i, j), m in self.edges)


def all_pairs(n, loops=True):
    return [(i, j) for i in range(n) for j in range(i if loops else i + 1, n)]


def enumerate_multigraphs(coords, D):
    """Every multi-index of total size <= D over the given coordinate pairs."""
    out = [Multigraph()]
    for d in range(1, D + 1):
        for combo in combinations_with_replacement(coords, d):
            out.append(Multigraph.from_pairs(combo))
    return out


def enumerate_simple(coords, D):
    """Multi-indices in {0,1}^N with |alpha| <= D."""
    from itertools import combinations
    out = [Multigraph()]
    for d in range(1, D + 1):
        for combo in combinations(coords, d):
            out.append(Multigraph.from_pairs(combo))
    return out


# ---------------------------------------------------------------------------
# moment oracles

class AtomOracle:
    """Exact moments of a signal drawn from a finite list of atoms.

    ``atoms`` maps each coordinate pair to an (A,) array of values; ``target``
    is an optional (A,) array for the estimated scalar.
    """

    def __init__(self, coords, atoms, probs, target=None, max_vertices=6, max_degree=6):
        self.coords = list(coords)
        self.index = {c: i for i, c in enumerate(self.coords)}
        self.atoms = np.asarray(atoms, dtype=float)          # (A, N)
        self.probs = np.asarray(probs, dtype=float)
        self.target = None if target is None else np.asarray(target, dtype=float)
        self.max_vertices = max_vertices
        self.max_degree = max_degree

    def _check(self, alpha):
        if alpha.size > self.max_degree:
            raise OracleDomainError(f"|alpha| = {alpha.size} exceeds {self.max_degree}")

    def _monomial(self, alpha):
        self._check(alpha)
        col = np.ones(len(self.probs))
        for e, m in alpha.edges:
            col = col * self.atoms[:, self.index[e]] ** m
        return col

    def moment(self, alpha):
        return float(self.probs @ self._monomial(alpha))

    def target_moment(self, alpha):
        if self.target is None:
            raise OracleDomainError("oracle has no estimation target")
        return float(self.probs @ (self.target * self._monomial(alpha)))

    def scaled(self, c):
        return AtomOracle(self.coords, c * self.atoms, self.probs, self.target,
                          self.max_vertices, self.max_degree)


def submatrix_enumeration_oracle(n, lam, rho, root=0, loops=True):
    """Planted submatrix signal X_ij = lam v_i v_j, v_i ~ Bernoulli(rho), target x = v_root."""
    if n > 6:
        raise OracleDomainError("enumeration oracle limited to n <= 6")
    V = np.array(list(product([0.0, 1.0], repeat=n)))
    k = V.sum(axis=1)
    probs = rho ** k * (1 - rho) ** (n - k)
    coords = all_pairs(n, loops)
    atoms = np.column_stack([lam * V[:, i] * V[:, j] for i, j in coords])
    return AtomOracle(coords, atoms, probs, target=V[:, root])


class SubmatrixOracle:
    """Closed-form moments: E X^a = lam^|a| rho^|V(a)|, E x X^a = lam^|a| rho^|V(a) + root|."""

    def __init__(self, lam, rho, root=0):
        self.lam, self.rho, self.root = lam, rho, root

    def moment(self, alpha):
        return self.lam ** alpha.size * self.rho ** len(alpha.vertices)

    def target_moment(self, alpha):
        return self.lam ** alpha.size * self.rho ** len(alpha.vertices | {self.root})


def community_oracle(n, k, M, lam, loops=True):
    """Gaussian community model signal X_ij = lam M 1[sigma_i = sigma_j != star].

    Labels are i.i.d.: star with probability 1 - k/n, each of 1..M with k/(nM).
    """
    if n > 6:
        raise OracleDomainError("enumeration oracle limited to n <= 6")
    p_lab = np.concatenate([[1 - k / n], np.full(M, k / (n * M))])
    labs = np.array(list(product(range(M + 1), repeat=n)))
    probs = np.prod(p_lab[labs], axis=1)
    coords = all_pairs(n, loops)
    atoms = np.column_stack([lam * M * ((labs[:, i] == labs[:, j]) & (labs[:, i] != 0))
                             for i, j in coords]).astype(float)
    keep = probs > 0
    return AtomOracle(coords, atoms[keep], probs[keep])


def binary_community_oracle(n, k, q, s, M):
    """Binary community model: X_ij = q + sM when both share a label in 1..M, else q (i < j)."""
    base = community_oracle(n, k, M, 1.0, loops=False)
    atoms = q + s * base.atoms   # base atoms are M * indicator
    return AtomOracle(base.coords, atoms, base.probs)


def gaussianize(oracle, tau0, tau1):
    """X -> (X - tau0) / sqrt(tau0 (tau1 - tau0))."""
    return AtomOracle(oracle.coords, (oracle.atoms - tau0) / np.sqrt(tau0 * (tau1 - tau0)),
                      oracle.probs, oracle.target)


# ---------------------------------------------------------------------------
# recursions

def kappa_cumulants(oracle, D, coords=None, alphas=None):
    """kappa_alpha = E[x X^alpha] - sum_{beta < alpha} kappa_beta C(alpha, beta) E[X^{alpha - beta}]."""
    if alphas is None:
        alphas = enumerate_multigraphs(coords, D)
    memo = {}

    def kappa(alpha):
        if alpha in memo:
            return memo[alpha]
        val = oracle.target_moment(alpha)
        for beta, w in alpha.sub_multigraphs():
            val -= kappa(beta) * w * oracle.moment(alpha.minus(beta))
        memo[alpha] = val
        return val

    return {a: kappa(a) for a in sorted(alphas, key=lambda a: a.size)}


def r_alpha_recursion(oracle_p, oracle_q, D, coords=None, alphas=None, binomial=True):
    """r_alpha = E_P X^alpha - sum_{beta < alpha} r_beta C(alpha, beta) E_Q X^{alpha - beta}.

    ``binomial=False`` drops the C(alpha, beta) factor; on {0,1}-valued alpha
    the two agree.
    """
    if alphas is None:
        alphas = enumerate_multigraphs(coords, D)
    memo = {}

    def r(alpha):
        if alpha in memo:
            return memo[alpha]
        val = oracle_p.moment(alpha)
        for beta, w in alpha.sub_multigraphs():
            val -= r(beta) * (w if binomial else 1) * oracle_q.moment(alpha.minus(beta))
        memo[alpha] = val
        return val

    return {a: r(a) for a in sorted(alphas, key=lambda a: a.size)}


def kappa_bound_sum(table):
    """sum_alpha kappa_alpha^2 / alpha!, the degree-D correlation bound."""
    return float(sum(v * v / a.factorial() for a, v in table.items()))


def kappa_magnitude_bound(alpha, lam, rho):
    """(|alpha| + 1)^{|alpha|} lam^{|alpha|} rho^{|V(alpha)|}."""
    s = alpha.size
    return (s + 1) ** s * lam ** s * rho ** len(alpha.vertices)


def adv_bound_binary(table, tau0, tau1):
    """sqrt(sum over alpha in {0,1}^N of r_alpha^2 / (tau0 (1 - tau1))^{|alpha|})."""
    if not 0 < tau0 <= tau1 < 1:
        raise ValueError("need 0 < tau0 <= tau1 < 1")
    total = 0.0
    for a, v in table.items():
        if any(m > 1 for _, m in a.edges):
            continue
        total += v * v / (tau0 * (1 - tau1)) ** a.size
    return float(np.sqrt(total))


def adv_bound_gaussian(table):
    """sqrt(sum_alpha r_alpha^2 / alpha!)."""
    return float(np.sqrt(sum(v * v / a.factorial() for a, v in table.items())))


def export_table(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "size", "value"])
        for a in sorted(table, key=lambda a: (a.size, a.edges)):
            w.writerow([a.label(), a.size, repr(float(table[a]))])


# ---------------------------------------------------------------------------
# closed-form correlation bound for the planted submatrix

@dataclass
class CorrBound:
    value: float
    log_value: float
    excess: float           # bound / rho^2 - 1
    terms: list             # (h, d, log term)
    mmse: float


def corr_ld_bound(lam, rho, n, D, cutoff=1e-30):
    """rho^2 sum_{h<=D} [D^2 (D+1)^2 lam^2]^h sum_{d=h}^{D} [D (D+1)^2 lam^2 rho^2 n]^{d-h}.

    Evaluated in log space; terms smaller than ``cutoff`` times the largest are
    dropped.  ``mmse`` is rho - bound (E x^2 = rho).
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    if lam == 0:
        return CorrBound(rho ** 2, 2 * np.log(rho), 0.0, [(0, 0, 0.0)], rho - rho ** 2)
    la = np.log(D ** 2 * (D + 1) ** 2) + 2 * np.log(lam)
    lb = np.log(D * (D + 1) ** 2) + 2 * np.log(lam) + 2 * np.log(rho) + np.log(n)
    terms = [(h, d, h * la + (d - h) * lb) for h in range(D + 1) for d in range(h, D + 1)]
    logs = np.array([t[2] for t in terms])
    keep = logs >= logs.max() + np.log(cutoff)
    log_sum = float(logsumexp(logs[keep]))
    log_value = 2 * np.log(rho) + log_sum
    value = float(np.exp(log_value))
    return CorrBound(value, log_value, float(np.expm1(log_sum)),
                     [t for t, k in zip(terms, keep) if k], rho - value)


# ---------------------------------------------------------------------------
# exact degree-D correlation for a tiny planted submatrix instance

def gaussian_raw_moment(mu, k):
    """E (mu + Z)^k, Z ~ N(0, 1)."""
    total = 0.0
    for j in range(0, k // 2 + 1):
        dfact = prod(range(2 * j - 1, 0, -2)) if j else 1
        total += comb(k, 2 * j) * mu ** (k - 2 * j) * dfact
    return total


def exact_corr_submatrix(n, lam, rho, D, root=0):
    """sup over degree-<=D polynomials f of E[f x]^2 / E[f^2], x = v_root.

    Observation Y_ij = lam v_i v_j + Z_ij (i <= j, unit noise).  Moments of
    monomials are exact: enumerate v and use Gaussian raw moments per entry.
    Returns (corr2, condition number of the Gram matrix).
    """
    coords = all_pairs(n, True)
    monos = enumerate_multigraphs(coords, D)
    V = np.array(list(product([0.0, 1.0], repeat=n)))
    kk = V.sum(axis=1)
    probs = rho ** kk * (1 - rho) ** (n - kk)

    def expect(alpha, with_target):
        tot = 0.0
        for v, p in zip(V, probs):
            val = p * (v[root] if with_target else 1.0)
            for (i, j), m in alpha.edges:
                val *= gaussian_raw_moment(lam * v[i] * v[j], m)
            tot += val
        return tot

    G = np.empty((len(monos), len(monos)))
    for a in range(len(monos)):
        for b in range(a, len(monos)):
            prod_ab = Multigraph.from_dict(_merge(monos[a], monos[b]))
            G[a, b] = G[b, a] = expect(prod_ab, False)
    c = np.array([expect(m, True) for m in monos])
    cond = float(np.linalg.cond(G))
    return float(c @ np.linalg.solve(G, c)), cond


def _merge(a, b):
    d = a.as_dict()
    for e, m in b.edges:
        d[e] = d.get(e, 0) + m
    return d
