"""Registry of experiment kinds: parameter schemas plus runners.

A runner takes (params, stream, workers) and returns a Result whose rows feed
the CSV output and whose summary feeds the JSON output.  Every random draw
comes from a substream of ``stream`` indexed by its position in the sweep, so
outputs do not depend on the worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import cumulants, detect, freeenergy, lowdeg, mcmc, models, ogp, skcert
from .overlaps import rademacher_overlaps


@dataclass
class Result:
    rows: list
    summary: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Kind:
    name: str
    family: str
    runner: object
    defaults: dict
    doc: str


REGISTRY = {}


def register(name, family, **defaults):
    def wrap(fn):
        REGISTRY[name] = Kind(name, family, fn, defaults, (fn.__doc__ or "").strip())
        return fn
    return wrap


def pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def gen(stream, *path):
    """Generator for the substream at ``path`` (nested replica indices)."""
    s = stream
    for i in path:
        s = s.substream(i)
    return s.generator()


def mean_se(v):
    v = np.asarray(v, dtype=float)
    se = float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


# ---------------------------------------------------------------------------
# distinguishability and spectra

@register("lr_second_moment", "contiguity", n_grid=[50, 100, 200], lam_grid=[0.5, 0.9], prior="rademacher")
def run_lr_second_moment(p, stream, workers):
    """Exact ||L_n||^2 for the spiked Wigner model against its large-n limit."""
    rows = []
    for n in p["n_grid"]:
        for lam in p["lam_grid"]:
            est = detect.lr_second_moment(models.PriorSpec(p["prior"]), lam, n)
            rows.append({"n": n, "lam": lam, "value": est.value,
                         "limit": detect.rademacher_lr_limit(lam) if p["prior"] == "rademacher" else np.nan})
    return Result(rows)


@register("separation", "contiguity", n=200, lam_grid=[0.5, 2.0], mc_budget=100)
def run_separation(p, stream, workers):
    """Separation ratio of lambda_max between spiked Wigner and GOE."""
    rows = []
    for j, lam in enumerate(p["lam_grid"]):
        n = p["n"]
        ps = lambda g, m: [models.sample_spiked_wigner(n, lam, rng=gi).observation for gi in _spawn(g, m)]
        qs = lambda g, m: [models.sample_goe(n, "normalized", gi) for gi in _spawn(g, m)]
        rep = detect.separation_ratio(detect.lambda_max, ps, qs, p["mc_budget"], stream.substream(j))
        rows.append({"n": n, "lam": lam, "mean_p": rep.mean_p, "mean_q": rep.mean_q,
                     "ratio": rep.ratio, "classification": rep.classification})
    return Result(rows)


def _spawn(g, m):
    keys = g.integers(0, 2 ** 63, size=(m, 2), dtype=np.uint64)
    return [np.random.Generator(np.random.Philox(key=k)) for k in keys]


@register("goe_edge", "spiked-wigner", n=2000, draws=20)
def run_goe_edge(p, stream, workers):
    """Top eigenvalue of the normalized GOE over independent draws."""
    vals = pmap(lambda i: detect.lambda_max(models.sample_goe(p["n"], "normalized", gen(stream, i))),
                range(p["draws"]), workers)
    rows = [{"draw": i, "lambda_max": v} for i, v in enumerate(vals)]
    m, se = mean_se(vals)
    return Result(rows, {"mean": m, "stderr": se})


@register("bbp_overlap", "spiked-wigner", n=2000, lam_grid=[0.5, 2.0], draws=3, prior="rademacher")
def run_bbp_overlap(p, stream, workers):
    """Squared cosine between the spike and the top eigenvector of Y + Y^T."""
    cells = [(j, lam, i) for j, lam in enumerate(p["lam_grid"]) for i in range(p["draws"])]
    vals = pmap(lambda c: detect.bbp_overlap(models.sample_rank_one_channel(
        p["n"], c[1], p["prior"], gen(stream, c[0], c[2]))), cells, workers)
    rows = [{"lam": lam, "draw": i, "overlap": v, "limit": detect.bbp_overlap_limit(lam)}
            for (j, lam, i), v in zip(cells, vals)]
    summary = {}
    for lam in p["lam_grid"]:
        m, se = mean_se([r["overlap"] for r in rows if r["lam"] == lam])
        summary[f"lam={lam}"] = {"mean": m, "stderr": se, "limit": detect.bbp_overlap_limit(lam)}
    return Result(rows, summary)


# ---------------------------------------------------------------------------
# low-degree machinery

@register("ld_spike", "low-degree-spike", n=50, D_grid=[1, 2, 4, 8], lam_grid=[0.5, 1.0, 1.5])
def run_ld_spike(p, stream, workers):
    """Exact LD(D, lam) under the Rademacher overlap law."""
    ov = rademacher_overlaps(p["n"])
    rows = [{"n": p["n"], "D": D, "lam": lam, "ld": lowdeg.ld_value(ov, lam, D, exact=True).value}
            for D in p["D_grid"] for lam in p["lam_grid"]]
    return Result(rows)


@register("sbm_ldlr", "sbm", n_grid=[200, 400, 800], k=2, d=5.0, d_eta2_grid=[0.8, 1.3], D=8,
          mc_budget=100000)
def run_sbm_ldlr(p, stream, workers):
    """Degree-D norm bound for community detection in the block model."""
    rows = []
    for j, de in enumerate(p["d_eta2_grid"]):
        eta = float(np.sqrt(de / p["d"]))
        for i, n in enumerate(p["n_grid"]):
            est = lowdeg.sbm_ldlr_bound(n, p["k"], p["d"], eta, p["D"], p["mc_budget"], gen(stream, j, i))
            rows.append({"n": n, "D": p["D"], "d": p["d"], "eta": eta, "d_eta2": de,
                         "bound": est.value, "stderr": est.stderr})
    summary = {f"d_eta2={de}": {"limit": lowdeg.sbm_gaussian_limit(de, p["k"], p["D"])}
               for de in p["d_eta2_grid"]}
    return Result(rows, summary)


@register("cumulants", "planted-submatrix", n=5, D=4, lam=0.7, rho=0.3, root=0)
def run_cumulants(p, stream, workers):
    """Cumulants from closed-form moments against enumeration, with the magnitude bound."""
    coords = cumulants.all_pairs(p["n"], True)
    alphas = cumulants.enumerate_multigraphs(coords, p["D"])
    closed = cumulants.kappa_cumulants(cumulants.SubmatrixOracle(p["lam"], p["rho"], p["root"]),
                                       p["D"], alphas=alphas)
    enum = cumulants.kappa_cumulants(
        cumulants.submatrix_enumeration_oracle(p["n"], p["lam"], p["rho"], p["root"]), p["D"], alphas=alphas)
    rows = []
    for a in sorted(alphas, key=lambda a: (a.size, a.edges)):
        rows.append({"alpha": a.label(), "size": a.size, "vertices": len(a.vertices),
                     "disconnected": int(a.has_component_avoiding(p["root"])),
                     "kappa": closed[a], "kappa_enum": enum[a],
                     "bound": cumulants.kappa_magnitude_bound(a, p["lam"], p["rho"])})
    diff = max(abs(r["kappa"] - r["kappa_enum"]) for r in rows)
    disc = max((abs(r["kappa"]) for r in rows if r["disconnected"]), default=0.0)
    viol = sum(abs(r["kappa"]) > r["bound"] * (1 + 1e-12) + 1e-15 for r in rows)
    return Result(rows, {"count": len(rows), "max_diff": diff, "kappa_empty": rows[0]["kappa"],
                         "max_abs_disconnected": disc, "bound_violations": int(viol),
                         "corr_sum": cumulants.kappa_bound_sum(closed)})


@register("corr_bound", "planted-submatrix", lam_grid=[1e-12, 1e-3], rho=1e-6, n_grid=[1e6, 1e30], D_grid=[2, 5])
def run_corr_bound(p, stream, workers):
    """Closed-form degree-D correlation bound (relative excess over rho^2)."""
    rows = []
    for lam in p["lam_grid"]:
        for n in p["n_grid"]:
            for D in p["D_grid"]:
                b = cumulants.corr_ld_bound(lam, p["rho"], n, D)
                rows.append({"lam": lam, "rho": p["rho"], "n": n, "D": D, "bound": b.value,
                             "log_bound": b.log_value, "excess": b.excess})
    return Result(rows)


@register("adv_bound", "planted-vs-planted", n=4, k=2, M_p=2, M_q=1, lam_grid=[0.3, 0.1, 0.03], D=3)
def run_adv_bound(p, stream, workers):
    """Degree-D advantage bound between two community models with different M."""
    rows = []
    for lam in p["lam_grid"]:
        P = cumulants.community_oracle(p["n"], p["k"], p["M_p"], lam)
        Q = cumulants.community_oracle(p["n"], p["k"], p["M_q"], lam)
        tab = cumulants.r_alpha_recursion(P, Q, p["D"], coords=P.coords)
        rows.append({"lam": lam, "D": p["D"], "adv": cumulants.adv_bound_gaussian(tab),
                     "terms": len(tab)})
    return Result(rows)


@register("triangle", "counting-communities", n=300, k=300, q=0.05, s=0.2, M=2, draws=200, batches=10)
def run_triangle(p, stream, workers):
    """Signed triangle count under the community model, against its moment formulas."""
    def one(i):
        inst = models.sample_binary_community(p["n"], p["k"], p["q"], p["s"], p["M"], gen(stream, i))
        return detect.signed_triangle_stat_trace(inst.observation.dense(np.float64), p["q"])
    vals = np.array(pmap(one, range(p["draws"]), workers))
    mean, var_bound = detect.triangle_moment_formulas(p["n"], p["k"], p["q"], p["s"], p["M"])
    rows = [{"draw": i, "stat": v} for i, v in enumerate(vals)]
    batch_vars = [float(b.var(ddof=1)) for b in np.array_split(vals, p["batches"])]
    m, se = mean_se(vals)
    return Result(rows, {"mean": m, "stderr": se, "formula_mean": mean,
                         "finite_n_mean": detect.triangle_exact_mean(p["n"], p["k"], p["s"], p["M"]),
                         "var": float(vals.var(ddof=1)), "var_bound": var_bound,
                         "batch_vars": batch_vars,
                         "batch_fraction_below": float(np.mean(np.array(batch_vars) <= var_bound))})


@register("fp_ld_sandwich", "franz-parisi", n=50, D_grid=[3, 5], lam_grid=[0.25, 0.5, 1.0, 1.5, 2.0, 3.0],
          boolean_n=10, boolean_sum=6, boolean_D=1)
def run_fp_ld_sandwich(p, stream, workers):
    """LD(D) <= FP(D~) + e^{-D} on the Rademacher spike; boolean example where LO vanishes."""
    ov = rademacher_overlaps(p["n"])
    rows = []
    for D in p["D_grid"]:
        for lam in p["lam_grid"]:
            r = lowdeg.fp_ld_sandwich(ov, lam, D, exact=True)
            rows.append({"n": p["n"], "D": D, "lam": lam, "D_tilde": r.D_tilde, "ld": r.ld,
                         "fp": r.fp, "slack": r.slack, "holds": int(r.holds)})
    U = lowdeg.boolean_prior(p["boolean_n"], p["boolean_sum"])
    lo, delta = lowdeg.boolean_fp(U, p["boolean_D"])
    return Result(rows, {"boolean_lo": lo, "boolean_delta": delta,
                         "boolean_ld": lowdeg.boolean_ld(U, p["boolean_D"])})


# ---------------------------------------------------------------------------
# free energy

@register("scalar_channel", "scalar-channel", priors=["gaussian", "rademacher"], lam_grid=[0.5, 1.0, 2.0, 5.0],
          h=1e-3)
def run_scalar_channel(p, stream, workers):
    """Quadrature MMSE, free energy and I-MMSE residual of the scalar channel."""
    rows = []
    for prior in p["priors"]:
        ch = freeenergy.ScalarChannel(prior)
        for lam in p["lam_grid"]:
            rows.append({"prior": prior, "lam": lam, "psi": freeenergy.scalar_psi(ch, lam),
                         "mmse": freeenergy.scalar_mmse(ch, lam), "gaussian_mmse": 1 / (1 + lam),
                         "immse_residual": freeenergy.immse_check(ch, lam, p["h"])})
    return Result(rows)


@register("needle", "needle", n=20, lam_grid=[0.7, 2.0], draws=2000, chunks=8)
def run_needle(p, stream, workers):
    """Finite-n free energy of the needle model by exact enumeration of the 2^n states."""
    def one(c):
        j, lam, i = c
        return freeenergy.needle_free_energy(p["n"], lam, chunk_sizes[i], gen(stream, j, i))
    chunks = max(1, min(p["chunks"], p["draws"]))
    chunk_sizes = [len(a) for a in np.array_split(np.arange(p["draws"]), chunks)]
    rows = []
    for j, lam in enumerate(p["lam_grid"]):
        parts = pmap(one, [(j, lam, i) for i in range(chunks)], workers)
        w = np.array(chunk_sizes, dtype=float)
        F = float(np.dot(w, [e.free_energy for e in parts]) / w.sum())
        mm = float(np.dot(w, [e.mmse for e in parts]) / w.sum())
        se = float(np.sqrt(np.dot(w ** 2, [e.stderr ** 2 for e in parts])) / w.sum())
        rows.append({"n": p["n"], "lam": lam, "free_energy": F, "stderr": se, "mmse": mm,
                     "limit": freeenergy.needle_limit(lam)})
    return Result(rows)


@register("nishimori", "needle", n=6, lam_grid=[0.5, 2.0], draws=200)
def run_nishimori(p, stream, workers):
    """Planted versus replica squared overlap under the exact posterior."""
    rows = []
    for j, lam in enumerate(p["lam_grid"]):
        r = freeenergy.nishimori_check(p["n"], lam, p["draws"], gen(stream, j))
        rows.append({"n": p["n"], "lam": lam, "planted": r.planted, "replica": r.replica,
                     "discrepancy": r.discrepancy, "stderr": r.stderr})
    return Result(rows)


@register("rs_fixed_point", "rank-one-estimation", prior="gaussian", p=None,
          lam_grid=[0.25, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0, 5.0])
def run_rs_fixed_point(p, stream, workers):
    """Replica-symmetric fixed point, limiting MMSE and the spectral estimator's MSE."""
    ch = freeenergy.ScalarChannel(p["prior"], p["p"])
    curve = freeenergy.mmse_limit_curve(ch, p["lam_grid"])
    rows = [{"lam": float(l), "q_star": float(q), "mmse_limit": float(m),
             "gaussian_q": max(0.0, 1 - 1 / l) if l > 0 else 0.0,
             "pca_mse": freeenergy.pca_mse_limit(l)}
            for l, q, m in zip(curve.lams, curve.q_star, curve.mmse)]
    return Result(rows, {"dmse": curve.dmse, "lam_c": float(curve.lam_c)})


# ---------------------------------------------------------------------------
# Markov chains

def _slice_instance(n, k, kp, lam, g):
    inst = models.sample_sparse_pca(n, k, lam, g)
    space = mcmc.SparseSlice(n, kp)
    return inst, space, space.energies(inst.observation), space.overlaps(inst.signal)


@register("mcmc_stationarity", "mcmc", n=10, k=2, kp=2, lam=2.0, beta=2.0, steps=1000000)
def run_mcmc_stationarity(p, stream, workers):
    """Metropolis occupation against the exact Gibbs table, and detailed balance."""
    inst, space, E, _ = _slice_instance(p["n"], p["k"], p["kp"], p["lam"], gen(stream, 0))
    nbr = space.neighbors()
    counts = mcmc.run_chain(E, nbr, p["beta"], p["steps"], 0, gen(stream, 1))
    pi = mcmc.gibbs_exact(E, p["beta"]).probs()
    P = mcmc.metropolis_matrix(E, nbr, p["beta"])
    rows = [{"state": i, "occupation": int(c), "gibbs": float(q)} for i, (c, q) in enumerate(zip(counts, pi))]
    return Result(rows, {"tv": mcmc.tv_distance(counts / counts.sum(), pi),
                         "detailed_balance": mcmc.detailed_balance_check(P, pi),
                         "states": len(space)})


@register("hitting_time", "mcmc", n=16, k=4, kp=4, lam_grid=[0.5, 1.0], beta_grid=[0.0, 8.0, 32.0],
          ell_grid=[1, 2], replicas=200, t_max=100000)
def run_hitting_time(p, stream, workers):
    """Hitting times of B from mu(.|A) against t exp(-D) for every (lam, beta, ell) cell."""
    cells = [(a, lam, b, beta, c, ell) for a, lam in enumerate(p["lam_grid"])
             for b, beta in enumerate(p["beta_grid"]) for c, ell in enumerate(p["ell_grid"])]

    def one(cell):
        a, lam, b, beta, c, ell = cell
        inst, space, E, ov = _slice_instance(p["n"], p["k"], p["kp"], lam, gen(stream, a))
        try:
            r = mcmc.hitting_time_experiment(E, space.neighbors(), ov, beta, ell, p["t_max"],
                                             p["replicas"], gen(stream, a, b, c))
        except ValueError as exc:
            return [{"lam": lam, "beta": beta, "ell": ell, "t": -1, "empirical": np.nan,
                     "bound": np.nan, "sigma": np.nan, "depth": np.nan, "violation": 0,
                     "status": f"skipped: {exc}"}]
        return [{"lam": lam, "beta": beta, "ell": ell, "t": int(t), "empirical": float(e),
                 "bound": float(bd), "sigma": float(s), "depth": r.depth,
                 "violation": int(e > bd + 3 * s), "status": "ok"}
                for t, e, bd, s in zip(r.t_grid, r.empirical, r.bound, r.sigma)]
    rows = [row for part in pmap(one, cells, workers) for row in part]
    ran = {(r["lam"], r["beta"], r["ell"]) for r in rows if r["status"] == "ok"}
    return Result(rows, {"cells": len(cells), "cells_run": len(ran),
                         "violations": int(sum(r["violation"] for r in rows))})


@register("fp_barrier", "franz-parisi-mcmc", N=16, lam_grid=[0.5, 1.0, 2.0, 3.0], eps=0.25, D=4, draws=200)
def run_fp_barrier(p, stream, workers):
    """Gibbs mass ratio nu(B)/nu(A) against the Franz-Parisi barrier bound at beta = lam."""
    rows = []
    for j, lam in enumerate(p["lam_grid"]):
        r = mcmc.fp_barrier_pipeline(p["N"], lam, lam, p["eps"], p["D"], p["draws"], gen(stream, j))
        rows.append({"N": p["N"], "lam": lam, "beta": lam, "delta": r.delta, "bound": r.bound,
                     "median_ratio": float(np.median(r.ratios)), "violation_rate": r.violation_rate,
                     "allowed_rate": r.allowed_rate, "ok": int(r.ok)})
    return Result(rows)


# ---------------------------------------------------------------------------
# overlap gaps and polynomial stability

@register("npp_ogp", "ogp", n=20, eps=0.75, draws=100, margin=0.1, rho_step=0.01,
          exponent_points=[[1.0, 0.99], [0.51, 0.01]])
def run_npp_ogp(p, stream, workers):
    """Exhaustive number-partitioning landscapes versus the first-moment certificate."""
    n, eps = p["n"], p["eps"]
    rho_c = ogp.certified_rho(n, eps, p["margin"], p["rho_step"])
    rho_neg = ogp.certified_rho(n, eps, 0.0, p["rho_step"])

    def one(i):
        scan = ogp.npp_exhaustive_scan(models.sample_npp(n, gen(stream, i)), eps)
        return (len(scan.indices), scan.forbidden_pairs(rho_c) if rho_c else 0,
                scan.forbidden_pairs(rho_neg) if rho_neg else 0, scan.min_energy)
    res = pmap(one, range(p["draws"]), workers)
    rows = [{"draw": i, "solutions": s, "pairs_certified": a, "pairs_negative": b, "min_energy": e}
            for i, (s, a, b, e) in enumerate(res)]
    expo = [{"eps": e, "rho": r, "entropy_limit": ogp.npp_first_moment_exponent(np.inf, e, r, "entropy")}
            for e, r in p["exponent_points"]]
    return Result(rows, {"certified_rho": rho_c, "negative_rho": rho_neg,
                         "exponent_at_certified": ogp.npp_first_moment_exponent(n, eps, rho_c) if rho_c else None,
                         "freq_certified": float(np.mean([r["pairs_certified"] > 0 for r in rows])),
                         "freq_negative": float(np.mean([r["pairs_negative"] > 0 for r in rows])),
                         "exponents": expo})


@register("npp_gibbs", "ogp", n=20, eps=0.75, rho=0.9, draws=50)
def run_npp_gibbs(p, stream, workers):
    """Gibbs masses of the three overlap regions at beta = n 2^{n eps}."""
    n, eps = p["n"], p["eps"]
    beta = n * 2.0 ** (n * eps)

    def one(i):
        return ogp.npp_gibbs_partition_ratio(models.sample_npp(n, gen(stream, i)), beta, eps, p["rho"])
    res = pmap(one, range(p["draws"]), workers)
    rows = [{"draw": i, "pi1": r.pi1, "pi2": r.pi2, "pi3": r.pi3, "log_ratio": r.log_ratio,
             "fitted_constant": r.fitted_constant} for i, r in enumerate(res)]
    return Result(rows, {"beta": beta, "fraction_holding": float(np.mean([r.log_ratio >= 0 for r in res])),
                         "median_constant": float(np.median([r.fitted_constant for r in res]))})


@register("poly_stability", "eogp", corpus_size=200, max_degree=4, rho=0.9, mc_budget=20000, q_grid=[2, 3])
def run_poly_stability(p, stream, workers):
    """Mean and tail stability of a random Hermite polynomial corpus, plus hypercontractivity."""
    corpus = ogp.polynomial_corpus(gen(stream, 0), p["corpus_size"], p["max_degree"])

    def one(i):
        f = corpus[i]
        r = ogp.poly_stability_check(f, f.degree, p["rho"], p["mc_budget"], gen(stream, 1, i))
        h = ogp.hypercontractive_tail_check(f, f.degree, p["q_grid"], p["mc_budget"], gen(stream, 2, i))
        return {"poly": i, "d": f.d, "k": f.coefs.shape[1], "D": f.degree, "mean": r.mean,
                "mean_stderr": r.mean_stderr, "mean_bound": r.mean_bound, "exact_mean": r.exact_mean,
                "t": r.t, "tail": r.tail, "tail_bound": r.tail_bound,
                "mean_ok": int(r.mean_ok), "tail_ok": int(r.tail_ok),
                "hypercontractive_ok": int(all(row[4] for row in h))}
    rows = pmap(one, range(len(corpus)), workers)
    return Result(rows, {"mean_failures": int(sum(1 - r["mean_ok"] for r in rows)),
                         "tail_failures": int(sum(1 - r["tail_ok"] for r in rows)),
                         "hypercontractive_failures": int(sum(1 - r["hypercontractive_ok"] for r in rows))})


# ---------------------------------------------------------------------------
# SK certificates

@register("sk_sandwich", "sk", small_n=[16, 18], small_draws=30, large_n=2000, large_draws=20, slepian_draws=200)
def run_sk_sandwich(p, stream, workers):
    """Brute force, certificates and sign rounding on small instances; scaling at large n."""
    rows = []
    for a, n in enumerate(p["small_n"]):
        for i, d in enumerate(skcert.sk_sandwich(n, p["small_draws"], stream.substream(a))):
            rows.append({"n": n, "draw": i, "search": d.search, "brute": d.brute,
                         "spectral": d.spectral, "abssum": d.abssum, "ordered": int(d.ordered)})

    def big(i):
        W = models.sample_goe(p["large_n"], "normalized", gen(stream, 100, i))
        x, val = skcert.sign_rounding_search(W)
        return val, skcert.spectral_cert(W).value, skcert.abssum_cert(W).value
    res = pmap(big, range(p["large_draws"]), workers)
    n = p["large_n"]
    for i, (v, s, a) in enumerate(res):
        rows.append({"n": n, "draw": i, "search": v, "brute": np.nan, "spectral": s, "abssum": a,
                     "ordered": -1})
    sm, sse = mean_se([r[0] for r in res])
    slep, slep_se = skcert.slepian_mc_check(n, p["slepian_draws"], gen(stream, 200))
    summary = {"all_ordered": bool(all(r["ordered"] == 1 for r in rows if r["ordered"] >= 0)),
               "large_search_mean": sm, "large_search_stderr": sse,
               "large_spectral_mean": mean_se([r[1] for r in res])[0],
               "abssum_over_n32": mean_se([r[2] / n ** 1.5 for r in res])[0],
               "slepian_constant": skcert.slepian_bound_constant(), "slepian_mc": slep,
               "slepian_mc_stderr": slep_se, "parisi": skcert.PARISI_CONSTANT}
    for n in p["small_n"]:
        summary[f"brute_mean_n={n}"] = mean_se([r["brute"] for r in rows if r["n"] == n])[0]
    return Result(rows, summary)


@register("quiet_planting", "sk", n=1000, c_grid=[0.0, 0.5, 1.5], draws=200)
def run_quiet_planting(p, stream, workers):
    """lambda_max AUC between GOE and the planted ensemble for each c."""
    rows = []
    for j, c in enumerate(p["c_grid"]):
        null = pmap(lambda i: detect.lambda_max(models.sample_goe(p["n"], "normalized", gen(stream, j, 0, i))),
                    range(p["draws"]), workers)

        def planted(i):
            inst = models.sample_quiet_planted_sk(p["n"], c, gen(stream, j, 1, i))
            x = inst.signal
            return detect.lambda_max(inst.observation), float(x @ inst.observation @ x / p["n"])
        pl = pmap(planted, range(p["draws"]), workers)
        vals = [v for _, v in pl]
        m, se = mean_se(vals)
        rows.append({"n": p["n"], "c": c, "auc": skcert.auc(null, [s for s, _ in pl]),
                     "planted_value": m, "planted_stderr": se})
    return Result(rows)


def validate(kind, params):
    """Fill defaults; raise KeyError/TypeError naming the offending parameter."""
    if kind not in REGISTRY:
        raise KeyError(f"unknown experiment kind {kind!r}")
    spec = REGISTRY[kind].defaults
    unknown = sorted(set(params) - set(spec))
    if unknown:
        raise KeyError(f"unknown parameter(s) for {kind}: {', '.join(unknown)}")
    out = dict(spec)
    for k, v in params.items():
        d = spec[k]
        if d is not None and v is not None and not _compatible(d, v):
            raise TypeError(f"parameter {k!r} expects {type(d).__name__}, got {type(v).__name__}")
        out[k] = v
    return out


def _compatible(default, value):
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, (int, float)):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, list):
        return isinstance(value, list)
    return isinstance(value, type(default))
