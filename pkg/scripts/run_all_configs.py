"""Run every checked-in config and write results under results/<kind>/.

    python scripts/run_all_configs.py [--only KIND ...] [--threads T] [--out DIR]
"""
import argparse
import sys
import time
from pathlib import Path

from thresholds import cli

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--only", nargs="*", default=None)
    ap.add_argument("--threads", type=int, default=cli.default_threads())
    ap.add_argument("--out", default=None, help="root directory (default: each config's output)")
    args = ap.parse_args()
    paths = sorted((ROOT / "configs").glob("*.yaml"))
    if args.only:
        paths = [p for p in paths if p.stem in args.only]
    for p in paths:
        cfg = cli.load_config(p)
        out = Path(args.out) / cfg["kind"] if args.out else ROOT / cfg["output"]
        t0 = time.perf_counter()
        cli.run_experiment(cfg, out, args.threads)
        print(f"{cfg['kind']:<20} {time.perf_counter() - t0:7.1f}s  -> {out}", file=sys.stderr)


if __name__ == "__main__":
    main()
