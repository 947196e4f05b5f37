"""Run every scenario with one configuration and print a verdict table.

Usage: python3 scripts/run_all.py [--config configs/default.conf] [--out results] [--seeds 0-99]
"""

import argparse
import sys
import time

from hybridsim.config import SCENARIOS, load_config
from hybridsim.runner import run_scenario


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="configs/default.conf")
    ap.add_argument("--out", default="results")
    ap.add_argument("--seeds", default="0-99")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    failed = 0
    for name in SCENARIOS[:-1]:
        cfg = load_config(args.config, name, seeds=args.seeds, output_dir=args.out, workers=args.workers)
        t0 = time.perf_counter()
        _, out = run_scenario(cfg)
        print(f"== {name} ({time.perf_counter() - t0:.2f} s)")
        for c in out.checks:
            print(f"   [{'pass' if c.passed else 'FAIL'}] {c.name}: {c.value:.6g}")
            failed += not c.passed
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
