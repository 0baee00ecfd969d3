"""Overlap laws <u, v> between two independent prior draws.

Every low-degree quantity for a Gaussian additive model is an expectation over
this scalar, so the sampler is the shared input of ``detect`` and ``lowdeg``.
When the law is discrete with a known pmf the sampler also carries it, and
estimators can then compute expectations exactly.
"""
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .models import PriorSpec, sample_spike
from .rng import as_generator


@dataclass
class OverlapSampler:
    draw: object                # callable (generator, m) -> array of m overlaps
    support: np.ndarray = None  # exact discrete law, if known
    pmf: np.ndarray = None
    scale: str = "normalized"
    max_sq_norm: float = None   # sup over the prior support of |u|^2
    name: str = ""

    def sample(self, rng, m):
        return np.asarray(self.draw(as_generator(rng), int(m)), dtype=float)

    @property
    def exact(self):
        return self.support is not None

    def expect(self, f):
        if not self.exact:
            raise ValueError(f"overlap law {self.name!r} has no exact pmf")
        return float(np.sum(self.pmf * f(self.support)))

    def tail(self, a):
        """P(|s| >= a) under the exact law."""
        return float(self.pmf[np.abs(self.support) >= a].sum())


def rademacher_overlaps(n):
    """u, v uniform on {+-1/sqrt(n)}^n, so <u, v> = (2B - n)/n with B ~ Bin(n, 1/2)."""
    b = np.arange(n + 1)
    return OverlapSampler(
        draw=lambda g, m: (2.0 * g.binomial(n, 0.5, size=m) - n) / n,
        support=(2.0 * b - n) / n, pmf=stats.binom.pmf(b, n, 0.5),
        max_sq_norm=1.0, name=f"rademacher(n={n})")


def gaussian_overlaps(n):
    """u, v with i.i.d. N(0, 1/n) entries."""
    def draw(g, m):
        out = np.empty(m)
        for lo in range(0, m, 4096):
            hi = min(m, lo + 4096)
            u = g.standard_normal((hi - lo, n))
            v = g.standard_normal((hi - lo, n))
            out[lo:hi] = np.einsum("ij,ij->i", u, v) / n
        return out
    return OverlapSampler(draw=draw, name=f"gaussian(n={n})")


def sparse_overlaps(n, rho):
    """u_i = b_i / sqrt(rho n) with b_i ~ Bernoulli(rho): <u, v> = Bin(n, rho^2) / (rho n)."""
    b = np.arange(n + 1)
    return OverlapSampler(
        draw=lambda g, m: g.binomial(n, rho * rho, size=m) / (rho * n),
        support=b / (rho * n), pmf=stats.binom.pmf(b, n, rho * rho),
        max_sq_norm=1.0 / rho, name=f"sparse(n={n}, rho={rho})")


def matrix_overlaps(prior, n):
    """<X, X'> for X = U U^T / n with rows of U from a bounded-row law."""
    def draw(g, m):
        out = np.empty(m)
        for t in range(m):
            U = sample_spike(prior, n, g)
            V = sample_spike(prior, n, g)
            out[t] = np.sum((U.T @ V) ** 2) / n ** 2
        return out
    atoms, _ = prior.row_law()
    return OverlapSampler(draw=draw, name=f"{prior.kind}(n={n})",
                          max_sq_norm=float(np.max(np.sum(atoms ** 2, axis=1)) ** 2))


def overlaps_for(prior, n):
    if isinstance(prior, str):
        prior = PriorSpec(prior)
    if prior.kind == "rademacher":
        return rademacher_overlaps(n)
    if prior.kind == "gaussian":
        return gaussian_overlaps(n)
    if prior.kind == "sparse-bernoulli":
        return sparse_overlaps(n, prior.rho)
    return matrix_overlaps(prior, n)


def discrete_overlaps(values, probs, name="discrete"):
    """Overlap law given directly by its atoms."""
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    return OverlapSampler(draw=lambda g, m: g.choice(values, size=m, p=probs),
                          support=values, pmf=probs, name=name)


def uniform_overlaps(lo=0.0, hi=1.0):
    return OverlapSampler(draw=lambda g, m: g.uniform(lo, hi, size=m), name=f"uniform[{lo},{hi}]")
