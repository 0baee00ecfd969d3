"""Acceptance suite: one check per criterion, each driven by its checked-in config.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.  ``python tests/test_acceptance.py`` does the same.
"""
import csv
import time
from pathlib import Path

import numpy as np
import pytest

from thresholds import cli

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
RESULTS = {}
CRITERIA = {
    1: "goe_edge", 2: "bbp_overlap", 3: "scalar_channel", 4: "needle", 5: "rs_fixed_point",
    6: "sbm_ldlr", 7: "cumulants", 8: "triangle", 9: "mcmc_stationarity", 10: "hitting_time",
    11: "fp_ld_sandwich", 12: "npp_ogp", 13: "poly_stability", 14: "sk_sandwich", 15: "quiet_planting",
}


class Run:
    def __init__(self, kind, out):
        cfg = cli.load_config(CONFIGS / f"{kind}.yaml")
        t0 = time.perf_counter()
        csv_path, json_path, res = cli.run_experiment(cfg, out, cli.default_threads())
        self.seconds = time.perf_counter() - t0
        self.summary = res.summary
        self.bytes = (csv_path.read_bytes(), json_path.read_bytes())
        with open(csv_path) as fh:
            self.rows = [{k: _num(v) for k, v in r.items()} for r in csv.DictReader(fh)]

    def where(self, **kw):
        return [r for r in self.rows if all(np.isclose(r[k], v) if isinstance(v, float) else r[k] == v
                                            for k, v in kw.items())]


def _num(v):
    try:
        return float(v)
    except ValueError:
        return v


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    cache = {}
    root = tmp_path_factory.mktemp("acceptance")

    def get(kind, rerun=False):
        key = (kind, rerun)
        if key not in cache:
            cache[key] = Run(kind, root / ("rerun" if rerun else "first") / kind)
        return cache[key]
    return get


def record(k, ok, detail):
    RESULTS[k] = (bool(ok), detail)
    print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_c01_goe_edge(runs):
    r = runs("goe_edge")
    m = r.summary["mean"]
    record(1, 1.85 <= m <= 2.05 and r.seconds < 120, f"mean lambda_max {m:.4f} in [1.85, 2.05], {r.seconds:.0f}s < 120s")


def test_c02_bbp_overlap(runs):
    r = runs("bbp_overlap")
    hi, lo = r.summary["lam=2.0"]["mean"], r.summary["lam=0.5"]["mean"]
    ok = abs(hi - 0.5) <= 0.05 and lo < 0.05 and r.seconds < 300
    record(2, ok, f"overlap {hi:.4f} at lam=2 (limit 0.5 +- 0.05), {lo:.4f} at lam=0.5 (< 0.05), {r.seconds:.0f}s < 300s")


def test_c03_scalar_channel(runs):
    r = runs("scalar_channel")
    gauss = r.where(prior="gaussian")
    rad = r.where(prior="rademacher")
    exact = max(abs(x["mmse"] - 1 / (1 + x["lam"])) for x in gauss)
    worst = all(x["mmse"] <= 1 / (1 + x["lam"]) for x in rad)
    lams = sorted(x["lam"] for x in rad)
    resid = max(x["immse_residual"] for x in r.rows)
    ok = exact == 0 and worst and lams == [0.5, 1, 2, 5] and resid < 1e-4
    record(3, ok, f"gaussian mmse error {exact:.1e}, rademacher <= 1/(1+lam) on {lams}: {worst}, "
                  f"max I-MMSE residual {resid:.1e} < 1e-4")


def test_c04_needle(runs):
    r = runs("needle")
    lo = r.where(lam=0.7)[0]["free_energy"]
    hi = r.where(lam=2.0)[0]["free_energy"]
    gap = abs(hi - (1 - np.log(2)))
    ok = lo < 0.05 and gap < 0.08 and r.seconds < 600
    record(4, ok, f"F_n(0.7) = {lo:.4f} < 0.05, |F_n(2) - (1 - log 2)| = {gap:.4f} < 0.08, {r.seconds:.0f}s < 600s")


def test_c05_rs_fixed_point(runs):
    r = runs("rs_fixed_point")
    err = max(abs(x["q_star"] - max(0.0, 1 - 1 / x["lam"])) for x in r.rows)
    m2 = r.where(lam=2.0)[0]["mmse_limit"]
    ok = err < 1e-6 and abs(m2 - 0.75) < 1e-6
    record(5, ok, f"max |q* - max(0, 1 - 1/lam)| = {err:.1e} < 1e-6, MMSE limit at lam=2 = {m2:.8f}")


def test_c06_sbm_ldlr(runs):
    r = runs("sbm_ldlr")
    below = [x["bound"] for x in sorted(r.where(d_eta2=0.8), key=lambda x: x["n"])]
    above = [x["bound"] for x in sorted(r.where(d_eta2=1.3), key=lambda x: x["n"])]
    ok_below = max(below) < 10 and all(np.diff(below) <= 0)
    ok_above = all(np.diff(above) > 0)
    ok = ok_below and ok_above and r.seconds < 600
    record(6, ok, f"d eta^2=0.8: {np.round(below, 3).tolist()} bounded/non-increasing {ok_below}; "
                  f"d eta^2=1.3: {np.round(above, 3).tolist()} increasing {ok_above}")


def test_c07_cumulants(runs):
    r = runs("cumulants")
    s = r.summary
    ok = (s["max_diff"] <= 1e-12 and abs(s["kappa_empty"] - 0.3) <= 1e-12
          and s["max_abs_disconnected"] <= 1e-12 and s["bound_violations"] == 0)
    record(7, ok, f"{s['count']} multigraphs: recursion vs enumeration {s['max_diff']:.1e}, "
                  f"kappa_0 = {s['kappa_empty']}, disconnected max {s['max_abs_disconnected']:.1e}, "
                  f"bound violations {s['bound_violations']}")


def test_c08_triangle(runs):
    r = runs("triangle")
    s = r.summary
    rel = abs(s["mean"] - s["formula_mean"]) / s["formula_mean"]
    ok = len(r.rows) == 200 and rel <= 0.05 and s["batch_fraction_below"] >= 0.95
    record(8, ok, f"mean {s['mean']:.0f} vs (1/6)Ms^3k^3 = {s['formula_mean']:.0f} ({100 * rel:.2f}% <= 5%), "
                  f"variance below bound in {100 * s['batch_fraction_below']:.0f}% of replications")


def test_c09_mcmc_stationarity(runs):
    s = runs("mcmc_stationarity").summary
    ok = s["tv"] < 0.02 and s["detailed_balance"] < 1e-12
    record(9, ok, f"TV {s['tv']:.4f} < 0.02, detailed-balance residual {s['detailed_balance']:.1e} < 1e-12")


def test_c10_hitting_time(runs):
    r = runs("hitting_time")
    s = r.summary
    viol = int(sum(x["violation"] for x in r.rows if x["status"] == "ok"))
    skipped = sorted({(x["lam"], x["beta"], x["ell"]) for x in r.rows if x["status"] != "ok"})
    ok = viol == 0 and s["cells_run"] > 0
    record(10, ok, f"{viol} violations over {s['cells_run']}/{s['cells']} cells; "
                   f"{len(skipped)} cells skipped with start-set mass < 1e-6")


def test_c11_fp_ld_sandwich(runs):
    r = runs("fp_ld_sandwich")
    spike = r.rows
    ok = all(x["holds"] == 1 for x in spike) and r.summary["boolean_lo"] == 0
    record(11, ok, f"LD <= FP + e^-D + 3 sigma on {len(spike)} (D, lam) cells, "
                   f"boolean LO(delta) = {r.summary['boolean_lo']}")


def test_c12_npp_ogp(runs):
    r = runs("npp_ogp")
    s = r.summary
    e = [x for x in s["exponents"] if x["eps"] == 1.0][0]["entropy_limit"]
    ok = e < 0 and s["freq_certified"] <= 0.05 and r.seconds < 1200
    record(12, ok, f"exponent at (1, 0.99) = {e:.4f} < 0, forbidden pairs at certified rho {s['certified_rho']} "
                   f"in {100 * s['freq_certified']:.0f}% of draws (<= 5%), {r.seconds:.0f}s")


def test_c13_poly_stability(runs):
    r = runs("poly_stability")
    s = r.summary
    ok = len(r.rows) == 200 and s["mean_failures"] == 0 and s["tail_failures"] == 0
    record(13, ok, f"{len(r.rows)} polynomials: mean-bound failures {s['mean_failures']}, "
                   f"tail-bound failures {s['tail_failures']} (3 sigma)")


def test_c14_sk_sandwich(runs):
    s = runs("sk_sandwich").summary
    gap = abs(s["large_search_mean"] - 4 / np.pi)
    order = s["parisi"] < s["slepian_constant"] < s["large_spectral_mean"]
    ok = s["all_ordered"] and gap < 0.05 and order and abs(s["large_spectral_mean"] - 2) < 0.1
    record(14, ok, f"search <= brute <= spectral on every small draw: {s['all_ordered']}; "
                   f"n=2000 search {s['large_search_mean']:.4f} (|. - 4/pi| = {gap:.4f}); "
                   f"{s['parisi']} < {s['slepian_constant']:.4f} < {s['large_spectral_mean']:.4f}")


def test_c15_quiet_planting(runs):
    r = runs("quiet_planting")
    a = {x["c"]: x["auc"] for x in r.rows}
    ok = abs(a[0.0] - 0.5) <= 0.05 and a[1.5] > 0.95 and a[0.5] < 0.6
    record(15, ok, f"AUC {a[0.0]:.3f} at c=0 (0.5 +- 0.05), {a[0.5]:.3f} at c=0.5 (< 0.6), "
                   f"{a[1.5]:.3f} at c=1.5 (> 0.95)")


def test_c16_reproducibility(runs):
    diff = [k for k in CRITERIA.values() if runs(k).bytes != runs(k, rerun=True).bytes]
    record(16, not diff, f"{len(CRITERIA) - len(diff)}/{len(CRITERIA)} configs byte-identical on rerun"
                         + (f"; differing: {diff}" if diff else ""))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
