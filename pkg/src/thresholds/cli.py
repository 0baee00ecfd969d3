"""Config-driven experiment runner.

    thresholds list
    thresholds validate CONFIG
    thresholds run CONFIG [--seed-override S] [--threads T] [--out DIR]

Exit status: 0 ok, 2 config error, 3 numeric failure.
"""
import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from .experiments import REGISTRY, validate
from .rng import RngStream

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "THRESHOLDS_THREADS"
TOP_KEYS = {"schema_version", "kind", "seed", "params", "output"}


class ConfigError(ValueError):
    pass


def load_config(path, seed_override=None):
    """Parse and validate a YAML config; returns a dict with defaults filled."""
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return check_config(raw, seed_override)


def check_config(raw, seed_override=None):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    extra = sorted(set(raw) - TOP_KEYS)
    if extra:
        raise ConfigError(f"unknown top-level key(s): {', '.join(extra)}")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    kind = raw.get("kind")
    if kind not in REGISTRY:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    seed = raw.get("seed") if seed_override is None else seed_override
    if seed is None:
        raise ConfigError("missing required key 'seed'")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed must be a non-negative 64-bit integer, got {seed!r}")
    params = raw.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("params must be a mapping")
    try:
        params = validate(kind, params)
    except (KeyError, TypeError) as exc:
        raise ConfigError(str(exc.args[0]) if exc.args else str(exc)) from exc
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "seed": seed, "params": params,
            "output": raw.get("output") or f"results/{kind}"}


def config_hash(cfg):
    """Hash of everything that determines the numbers (the output path is excluded)."""
    key = {k: cfg[k] for k in ("schema_version", "kind", "seed", "params")}
    return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]


def _plain(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _cell(v):
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def render_csv(rows, h, seed):
    cols = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["config_hash", "seed"] + cols)
    for r in rows:
        w.writerow([h, seed] + [_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def render_json(cfg, h, summary, n_rows):
    doc = {"config_hash": h, "seed": cfg["seed"], "kind": cfg["kind"],
           "schema_version": cfg["schema_version"], "params": cfg["params"],
           "rows": n_rows, "summary": summary}
    return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"


def run_experiment(cfg, out_dir=None, workers=1):
    """Run a validated config; writes <kind>.csv and <kind>.json and returns their paths."""
    kind = REGISTRY[cfg["kind"]]
    h = config_hash(cfg)
    res = kind.runner(cfg["params"], RngStream(cfg["seed"]), max(1, int(workers)))
    out = Path(out_dir or cfg["output"])
    out.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out / f"{cfg['kind']}.csv", out / f"{cfg['kind']}.json"
    csv_path.write_text(render_csv(res.rows, h, cfg["seed"]))
    json_path.write_text(render_json(cfg, h, res.summary, len(res.rows)))
    return csv_path, json_path, res


def list_experiments():
    return {name: {"family": k.family, "doc": k.doc, "params": k.defaults} for name, k in REGISTRY.items()}


def default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def build_parser():
    ap = argparse.ArgumentParser(prog="thresholds", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="show experiment kinds and their parameters")
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    r = sub.add_parser("run", help="run a config and write CSV/JSON")
    r.add_argument("config")
    r.add_argument("--seed-override", type=int, default=None)
    r.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1)")
    r.add_argument("--out", default=None, help="output directory (default: the config's output)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, k in REGISTRY.items():
            print(f"{name}  [{k.family}]  {k.doc}")
            for p, d in k.defaults.items():
                print(f"    {p} = {d!r}")
        return EXIT_OK
    try:
        cfg = load_config(args.config, getattr(args, "seed_override", None))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"ok {cfg['kind']} {config_hash(cfg)}")
        return EXIT_OK
    threads = args.threads if args.threads is not None else default_threads()
    t0 = time.perf_counter()
    try:
        csv_path, json_path, _ = run_experiment(cfg, args.out, threads)
    except (ValueError, ArithmeticError, RuntimeError, MemoryError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure in {cfg['kind']}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    # wall-clock goes to stderr only so the result files stay byte-identical across reruns
    print(f"wrote {csv_path} and {json_path} in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
