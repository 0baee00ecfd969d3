"""Certificates, rounding and brute force for SK(W) = (1/n) max_{x in {+-1}^n} x^T W x,
plus quiet-planting detectability."""
from dataclasses import dataclass

import numpy as np

from .detect import lambda_max, top_eigenpair
from .models import sample_goe, sample_quiet_planted_sk
from .rng import as_generator, split

MAX_BRUTE_N = 22
PARISI_CONSTANT = 1.5264


def half_cube(m):
    """All sign vectors of length m as rows (2^m, m), built by doubling."""
    S = np.ones((1, 0))
    for _ in range(m):
        S = np.vstack([np.hstack([S, np.ones((len(S), 1))]), np.hstack([S, -np.ones((len(S), 1))])])
    return S


@dataclass
class BruteForce:
    value: float
    argmax: np.ndarray


def sk_bruteforce(W):
    """Exact SK(W) with x_0 = +1 fixed (x and -x give the same value).

    Splits x = (a, b); x^T W x = a^T A a + 2 a^T C b + b^T B b is evaluated for
    all (a, b) blocks at once.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if n > MAX_BRUTE_N:
        raise ValueError(f"n = {n} exceeds the brute-force cap {MAX_BRUTE_N}")
    if n == 1:
        return BruteForce(float(W[0, 0]), np.ones(1))
    n1 = n // 2
    Sa = np.hstack([np.ones((1 << (n1 - 1), 1)), half_cube(n1 - 1)])
    Sb = half_cube(n - n1)
    A, B, C = W[:n1, :n1], W[n1:, n1:], W[:n1, n1:]
    qa = np.einsum("ij,jk,ik->i", Sa, A, Sa)
    qb = np.einsum("ij,jk,ik->i", Sb, B, Sb)
    tot = qa[:, None] + qb[None, :] + 2 * (Sa @ C) @ Sb.T
    i, j = np.unravel_index(np.argmax(tot), tot.shape)
    x = np.concatenate([Sa[i], Sb[j]])
    # report the value recomputed from the argmax so the objective is consistent
    return BruteForce(float(x @ W @ x / n), x)


@dataclass
class CertificateReport:
    method: str
    value: float
    note: str = ""


def abssum_cert(W):
    return CertificateReport("abssum", float(np.abs(W).sum()))


def spectral_cert(W):
    W = np.asarray(W, dtype=float)
    if not np.allclose(W, W.T):
        raise ValueError("W must be symmetric")
    return CertificateReport("spectral", lambda_max(W))


def sdp_cert(W):
    """sup over X psd with unit diagonal of Tr(W X) / n; needs a semidefinite solver."""
    raise NotImplementedError("semidefinite certificate needs an SDP solver, which is not bundled")


def sign_rounding_search(W):
    """x = sign(v_max) (zeros mapped to +1) and (1/n) x^T W x."""
    W = np.asarray(W, dtype=float)
    _, v = top_eigenpair(W)
    x = np.where(v >= 0, 1.0, -1.0)
    return x, float(x @ W @ x / len(x))


def slepian_bound_constant():
    return 2 * np.sqrt(2 / np.pi)


def slepian_mc_check(n, draws, rng=0):
    """Mean and stderr of max_v 2<v, g> = 2 sum |g_i| / sqrt(n), g ~ N(0, I/n)."""
    g = as_generator(rng)
    G = g.standard_normal((draws, n)) / np.sqrt(n)
    vals = 2 * np.abs(G).sum(axis=1) / np.sqrt(n)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(draws))


@dataclass
class SandwichDraw:
    search: float
    brute: float
    abssum: float
    spectral: float

    @property
    def ordered(self):
        return self.search <= self.brute <= self.spectral and self.brute <= self.abssum


def sk_sandwich(n, draws, rng=0):
    rows = []
    for gi in split(rng, draws):
        W = sample_goe(n, "normalized", gi)
        rows.append(SandwichDraw(sign_rounding_search(W)[1], sk_bruteforce(W).value,
                                 abssum_cert(W).value, spectral_cert(W).value))
    return rows


def auc(neg, pos):
    """P(pos > neg) + P(pos = neg)/2 via the rank-sum identity."""
    from scipy.stats import rankdata
    neg, pos = np.asarray(neg), np.asarray(pos)
    r = rankdata(np.concatenate([neg, pos]))
    m, k = len(neg), len(pos)
    return float((r[m:].sum() - k * (k + 1) / 2) / (m * k))


@dataclass
class PlantingRow:
    c: float
    planted_value: float    # mean (1/n) x^T W' x over planted draws
    planted_stderr: float
    auc: float


def quiet_planting_experiment(n, c_grid, draws, rng=0):
    """Planted value and lambda_max AUC between GOE and W' = (c/n) x x^T + W."""
    rows = []
    streams = split(rng, len(c_grid) * 2)
    for j, c in enumerate(c_grid):
        if not 0 <= c <= 3:
            raise ValueError("c must lie in [0, 3]")
        null = [lambda_max(sample_goe(n, "normalized", gi)) for gi in split(streams[2 * j], draws)]
        planted, vals = [], []
        for gi in split(streams[2 * j + 1], draws):
            inst = sample_quiet_planted_sk(n, c, gi)
            x = inst.signal
            planted.append(lambda_max(inst.observation))
            vals.append(x @ inst.observation @ x / n)
        vals = np.array(vals)
        rows.append(PlantingRow(c, float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(draws)),
                                auc(null, planted)))
    return rows
