"""Seeded generators for the random models used throughout the package.

Conventions
-----------
Two GOE scalings appear:

* ``"unit"``: off-diagonal N(0, 1), diagonal N(0, 2).
* ``"normalized"``: off-diagonal N(0, 1/n), diagonal N(0, 2/n).

Both come from the same draw: normalized = unit / sqrt(n).  Model generators
state which one they use.
"""
from dataclasses import dataclass, field

import numpy as np

from .rng import RngStream, as_generator, stream_of

GOE_SCALES = ("unit", "normalized")


# ---------------------------------------------------------------------------
# containers

@dataclass(frozen=True)
class PriorSpec:
    """Spike prior.

    kind is one of ``rademacher`` (x_i = +-1/sqrt(n)), ``gaussian``
    (x_i ~ N(0, 1/n)), ``sparse-bernoulli`` (x_i = b_i / sqrt(rho n)),
    ``bounded-row`` (rows of U drawn from a finite law ``atoms``/``weights``
    on R^k, observation uses U U^T / n) and ``community-labels`` (rows
    sqrt(k) e_j - 1/sqrt(k), j uniform in [k]).
    """
    kind: str = "rademacher"
    rho: float = None
    atoms: tuple = None
    weights: tuple = None
    k: int = None

    def __post_init__(self):
        kinds = ("rademacher", "gaussian", "sparse-bernoulli", "bounded-row", "community-labels")
        if self.kind not in kinds:
            raise ValueError(f"unsupported prior kind {self.kind!r}")
        if self.kind == "sparse-bernoulli":
            if self.rho is None or not 0 < self.rho < 1:
                raise ValueError("sparse-bernoulli prior needs rho in (0, 1)")
        if self.kind == "community-labels" and (self.k is None or self.k < 2):
            raise ValueError("community-labels prior needs k >= 2")
        if self.kind == "bounded-row":
            atoms, w = self.row_law()
            mean = w @ atoms
            cov = (atoms * w[:, None]).T @ atoms - np.outer(mean, mean)
            if np.max(np.abs(mean)) > 1e-10:
                raise ValueError("bounded-row prior must have mean zero")
            if abs(np.linalg.norm(cov, 2) - 1.0) > 1e-10:
                raise ValueError("bounded-row prior must have unit covariance norm")

    def row_law(self):
        if self.kind == "community-labels":
            k = self.k
            atoms = np.sqrt(k) * np.eye(k) - 1.0 / np.sqrt(k)
            return atoms, np.full(k, 1.0 / k)
        atoms = np.asarray(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        w = np.asarray(self.weights if self.weights is not None
                       else np.full(len(atoms), 1.0 / len(atoms)), dtype=float)
        if abs(w.sum() - 1) > 1e-12 or np.any(w < 0):
            raise ValueError("row-law weights must be a probability vector")
        return atoms, w

    @property
    def is_rank_one(self):
        return self.kind in ("rademacher", "gaussian", "sparse-bernoulli")


@dataclass
class Graph:
    """Undirected graph stored as an edge list (i < j, or i == j for loops)."""
    n: int
    edges: np.ndarray
    labels: np.ndarray = None
    self_loops: bool = False

    def dense(self, dtype=np.int8):
        A = np.zeros((self.n, self.n), dtype=dtype)
        if len(self.edges):
            i, j = self.edges[:, 0], self.edges[:, 1]
            A[i, j] = 1
            A[j, i] = 1
        return A

    @property
    def num_edges(self):
        return len(self.edges)

    def degrees(self):
        deg = np.bincount(self.edges[:, 0], minlength=self.n)
        deg = deg + np.bincount(self.edges[:, 1], minlength=self.n)
        return deg


@dataclass
class ModelInstance:
    kind: str
    observation: object
    signal: object
    params: dict
    seed: int = None
    stream_id: int = None
    extra: dict = field(default_factory=dict)

    def record(self):
        """Self-describing record; the observation is regenerated, never stored."""
        return {"model_kind": self.kind, "params": _plain(self.params),
                "seed": self.seed, "stream": self.stream_id}


def _plain(params):
    out = {}
    for key, v in params.items():
        if isinstance(v, PriorSpec):
            v = {"kind": v.kind, "rho": v.rho, "k": v.k,
                 "atoms": None if v.atoms is None else np.asarray(v.atoms).tolist(),
                 "weights": None if v.weights is None else list(v.weights)}
        elif isinstance(v, np.generic):
            v = v.item()
        out[key] = v
    return out


def _instance(kind, obs, signal, params, rng, **extra):
    seed, sid = stream_of(rng)
    return ModelInstance(kind, obs, signal, params, seed, sid, extra)


# ---------------------------------------------------------------------------
# GOE

def sample_goe(n, scale="normalized", rng=0):
    if n < 1:
        raise ValueError("n must be >= 1")
    if scale not in GOE_SCALES:
        raise ValueError(f"scale must be one of {GOE_SCALES}")
    g = as_generator(rng)
    A = g.standard_normal((n, n))
    # (A + A^T)/sqrt(2): off-diagonal variance 1, diagonal variance 2, exactly symmetric
    W = (A + A.T) / np.sqrt(2.0)
    if scale == "normalized":
        W /= np.sqrt(n)
    return W


def goe_unit_to_normalized(W):
    return W / np.sqrt(W.shape[0])


# ---------------------------------------------------------------------------
# priors

def sample_spike(prior, n, g):
    """Draw the hidden signal for ``prior``: a vector (rank one) or an n x k matrix."""
    if prior.kind == "rademacher":
        return g.choice([-1.0, 1.0], size=n) / np.sqrt(n)
    if prior.kind == "gaussian":
        return g.standard_normal(n) / np.sqrt(n)
    if prior.kind == "sparse-bernoulli":
        return (g.random(n) < prior.rho).astype(float) / np.sqrt(prior.rho * n)
    atoms, w = prior.row_law()
    idx = g.choice(len(w), size=n, p=w)
    return atoms[idx]


def sample_scalar_prior(kind, size, g, p=None):
    """Scalar priors P0 used by the rank-one channel and the scalar Gaussian channel."""
    if kind == "rademacher":
        return g.choice([-1.0, 1.0], size=size)
    if kind == "gaussian":
        return g.standard_normal(size)
    if kind == "two-point":
        hi, lo = two_point_atoms(p)
        return np.where(g.random(size) < p, hi, lo)
    raise ValueError(f"unknown scalar prior {kind!r}")


def two_point_atoms(p):
    """Atoms of the mean-zero, unit-variance two-point law with P(high) = p."""
    if not 0 < p < 1:
        raise ValueError("two-point prior needs p in (0, 1)")
    return np.sqrt((1 - p) / p), -np.sqrt(p / (1 - p))


# ---------------------------------------------------------------------------
# spiked matrix models

def sample_spiked_wigner(n, lam, prior=PriorSpec(), symmetric=True, rng=0):
    """Y = lam x x^T + W / sqrt(n) with W unit-entry GOE.

    For a bounded-row prior the spike is lam U U^T / n.  The asymmetric variant
    uses i.i.d. N(0,1) noise and signal strength lam / sqrt(2); symmetrizing it
    with ``symmetrize_asym`` recovers the symmetric model in law.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if not isinstance(prior, PriorSpec):
        raise ValueError("prior must be a PriorSpec")
    g = as_generator(rng)
    sig = sample_spike(prior, n, g)
    S = np.outer(sig, sig) if sig.ndim == 1 else sig @ sig.T / n
    if symmetric:
        noise = sample_goe(n, "normalized", g)
        Y = lam * S + noise
    else:
        Y = (lam / np.sqrt(2.0)) * S + g.standard_normal((n, n)) / np.sqrt(n)
    return _instance("spiked_wigner", Y, sig,
                     {"n": n, "lam": lam, "prior": prior, "symmetric": symmetric}, rng)


def symmetrize_asym(Y):
    return (Y + Y.T) / np.sqrt(2.0)


def sample_rank_one_channel(n, lam, prior="rademacher", rng=0, p=None):
    """Y = sqrt(lam/(2n)) X X^T + Z with X_i ~ P0 and Z i.i.d. N(0,1), not symmetric.

    In this parametrization the eigenvector overlap of Y + Y^T jumps at lam = 1.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    g = as_generator(rng)
    X = sample_scalar_prior(prior, n, g, p)
    Y = np.sqrt(lam / (2.0 * n)) * np.outer(X, X) + g.standard_normal((n, n))
    return _instance("rank_one_channel", Y, X, {"n": n, "lam": lam, "prior": prior, "p": p}, rng)


def sample_planted_submatrix(n, lam, rho, rng=0, reduced_diagonal=False):
    """Y = lam v v^T + W, v_i ~ Bernoulli(rho), W unit-entry GOE.

    ``reduced_diagonal`` swaps the N(0,2) diagonal for N(0,1).
    """
    if not 0 < rho < 1:
        raise ValueError("rho must be in (0, 1)")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    g = as_generator(rng)
    v = (g.random(n) < rho).astype(float)
    W = sample_goe(n, "unit", g)
    if reduced_diagonal:
        W[np.diag_indices(n)] = g.standard_normal(n)
    Y = lam * np.outer(v, v) + W
    return _instance("planted_submatrix", Y, v,
                     {"n": n, "lam": lam, "rho": rho, "reduced_diagonal": reduced_diagonal}, rng)


def sample_sparse_pca(n, k, lam, rng=0):
    """Y = (lam/k) x x^T + W with x uniform over k-sparse 0/1 vectors, W ~ GOE(n)."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if lam <= 0:
        raise ValueError("lam must be > 0")
    g = as_generator(rng)
    support = np.sort(g.choice(n, size=k, replace=False))
    x = np.zeros(n)
    x[support] = 1.0
    Y = (lam / k) * np.outer(x, x) + sample_goe(n, "normalized", g)
    return _instance("sparse_pca", Y, x, {"n": n, "k": k, "lam": lam}, rng, support=support)


def sample_quiet_planted_sk(n, c, rng=0):
    """W' = (c/n) x x^T + W with x uniform on the hypercube, W ~ GOE(n)."""
    if c < 0:
        raise ValueError("c must be >= 0")
    g = as_generator(rng)
    x = g.choice([-1.0, 1.0], size=n)
    W = (c / n) * np.outer(x, x) + sample_goe(n, "normalized", g)
    return _instance("quiet_planted_sk", W, x, {"n": n, "c": c}, rng)


# ---------------------------------------------------------------------------
# graphs

def _bernoulli_edges(n, prob_row, g, self_loops=False):
    """Sample an undirected graph row by row; ``prob_row(i, j)`` gives P(edge) for j >= i."""
    edges = []
    for i in range(n):
        j0 = i if self_loops else i + 1
        if j0 >= n:
            continue
        js = np.arange(j0, n)
        hit = g.random(len(js)) < prob_row(i, js)
        if hit.any():
            jj = js[hit]
            edges.append(np.column_stack([np.full(len(jj), i), jj]))
    if not edges:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(edges).astype(np.int64)


def sbm_probabilities(n, k, d, eta):
    p_in = (1 + (k - 1) * eta) * d / n
    p_out = (1 - eta) * d / n
    return p_in, p_out


def sample_sbm(n, k, d, eta, planted=True, rng=0, self_loops=False):
    """Sparse SBM: within-community probability (1+(k-1)eta)d/n, across (1-eta)d/n.

    The null (``planted=False``) is Erdos-Renyi(d/n).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if d <= 0:
        raise ValueError("d must be > 0")
    if not -1.0 / (k - 1) - 1e-15 <= eta <= 1:
        raise ValueError("eta must lie in [-1/(k-1), 1]")
    p_in, p_out = sbm_probabilities(n, k, d, eta)
    if p_in > 1 or p_out > 1:
        raise ValueError("edge probability exceeds 1")
    g = as_generator(rng)
    if planted:
        labels = g.integers(0, k, size=n)
        edges = _bernoulli_edges(
            n, lambda i, js: np.where(labels[js] == labels[i], p_in, p_out), g, self_loops)
    else:
        labels = None
        edges = _bernoulli_edges(n, lambda i, js: np.full(len(js), d / n), g, self_loops)
    G = Graph(n, edges, labels, self_loops)
    return _instance("sbm", G, labels,
                     {"n": n, "k": k, "d": d, "eta": eta, "planted": planted}, rng)


STAR = 0  # label of vertices outside every community


def sample_binary_community(n, k, q, s, M, rng=0):
    """Community-counting model.

    Each vertex gets label l in 1..M with probability k/(nM), otherwise the
    outside label STAR (=0).  Two vertices sharing a label in 1..M are joined
    with probability q + sM, every other pair with probability q.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if M < 1:
        raise ValueError("M must be >= 1")
    if not (0 <= q <= 1 and q + s * M <= 1 and s >= 0):
        raise ValueError("invalid edge probabilities")
    g = as_generator(rng)
    slot = k / (n * M)
    probs = np.concatenate([[1 - k / n], np.full(M, slot)])
    probs = np.clip(probs, 0, None)
    probs /= probs.sum()
    labels = g.choice(M + 1, size=n, p=probs)
    same = (labels[:, None] == labels[None, :]) & (labels[:, None] != STAR)
    P = np.where(same, q + s * M, q)
    U = g.random((n, n))
    A = np.triu(U < P, 1)
    i, j = np.nonzero(A)
    G = Graph(n, np.column_stack([i, j]).astype(np.int64), labels)
    return _instance("binary_community", G, labels,
                     {"n": n, "k": k, "q": q, "s": s, "M": M}, rng)


# ---------------------------------------------------------------------------
# tensors, number partitioning

def sample_pspin(n, p, rng=0):
    if p < 2:
        raise ValueError("p must be >= 2")
    g = as_generator(rng)
    Y = g.standard_normal((n,) * p)
    return _instance("pspin", Y, None, {"n": n, "p": p}, rng)


def contract_full(Y, x):
    """<Y, x^{tensor p}> by successive contraction of the last axis."""
    T = Y
    while T.ndim > 1:
        T = T @ x
    return float(T @ x)


def pspin_energy(x, Y):
    """H(x; Y) = <Y, x^{tensor p}> / n^{(p+1)/2} for x on the sphere of radius sqrt(n)."""
    x = np.asarray(x, dtype=float)
    n, p = Y.shape[0], Y.ndim
    if abs(np.linalg.norm(x) - np.sqrt(n)) > 1e-8:
        raise ValueError("x must have norm sqrt(n)")
    return contract_full(Y, x) / n ** ((p + 1) / 2)


def sample_npp(n, rng=0):
    return as_generator(rng).standard_normal(n)


def npp_energy(sigma, X):
    sigma = np.asarray(sigma)
    if sigma.shape[-1] != len(X):
        raise ValueError("length mismatch between sigma and X")
    return np.abs(sigma @ X) / np.sqrt(len(X))


def spin_overlap(sigma, tau):
    sigma, tau = np.asarray(sigma), np.asarray(tau)
    if sigma.shape != tau.shape:
        raise ValueError("length mismatch")
    return abs(float(sigma @ tau)) / len(sigma)


# ---------------------------------------------------------------------------
# regeneration from records

GENERATORS = {
    "spiked_wigner": sample_spiked_wigner,
    "rank_one_channel": sample_rank_one_channel,
    "planted_submatrix": sample_planted_submatrix,
    "sparse_pca": sample_sparse_pca,
    "quiet_planted_sk": sample_quiet_planted_sk,
    "sbm": sample_sbm,
    "binary_community": sample_binary_community,
    "pspin": sample_pspin,
}


def regenerate(record):
    """Rebuild a ModelInstance from ``ModelInstance.record()`` output."""
    kind = record["model_kind"]
    params = dict(record["params"])
    if isinstance(params.get("prior"), dict):
        pr = params["prior"]
        params["prior"] = PriorSpec(pr["kind"], rho=pr.get("rho"), k=pr.get("k"),
                                    atoms=None if pr.get("atoms") is None else tuple(map(tuple, pr["atoms"])),
                                    weights=None if pr.get("weights") is None else tuple(pr["weights"]))
    rng = RngStream(record["seed"], record["stream"] or 0)
    return GENERATORS[kind](**params, rng=rng)
