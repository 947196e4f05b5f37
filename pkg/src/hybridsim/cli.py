"""Command-line entry point: ``hybridsim <scenario> --config <path> ...``.

Exit codes: 0 when every check passes, 1 on a tolerance failure, 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import OUTPUT_ENV, SCENARIOS, ConfigError, load_config
from .runner import run_scenario

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse already exits with 2; keep the message short
        self.print_usage(sys.stderr)
        print(f"hybridsim: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hybridsim", description="Run a reproduction scenario and write CSV/JSON results.")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", default=None, help="flat 'key = value unit' file; omitted means all defaults")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one key, e.g. --set 'C_m=2e-16 F' (repeatable)")
    p.add_argument("--seeds", default=None, help="comma list with ranges, e.g. 0,1,5-9 (default 0,1)")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or ./hybridsim_out)")
    p.add_argument("--format", default="both", choices=("csv", "json", "both"))
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.scenario, args.set, args.seeds, args.out, args.format, args.workers)
    except ConfigError as exc:
        print(f"hybridsim: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        manifest, out = run_scenario(cfg)
    except RuntimeError as exc:
        print(f"hybridsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for c in out.checks:
        verdict = "pass" if c.passed else "FAIL"
        print(f"[{verdict}] {c.name}: {c.value:.6g} (target {c.target:.6g}, {c.kind} {c.tolerance:g})")
    for name, seconds in manifest.wall_clock.items():
        print(f"{name}: {seconds:.2f} s", file=sys.stderr)
    return EXIT_OK if manifest.passed else EXIT_TOLERANCE


if __name__ == "__main__":
    raise SystemExit(main())
