#!/usr/bin/env python3
"""Regenerate every figure dataset (CSV + metadata + gnuplot script).

    python3 scripts/reproduce_figures.py [--out results] [--only thermal_scan ...]

Scenario files live in ``scenarios/``; each produces ``<name>.csv``,
``<name>.meta.json`` and ``<name>.gp`` in the output directory.
"""

import argparse
import sys
import time
from pathlib import Path

from harmchain.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--scenarios", default=str(ROOT / "scenarios"))
    ap.add_argument("--only", nargs="*", default=None, help="scenario stems to run")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    files = sorted(Path(args.scenarios).glob("*.json"))
    if args.only:
        files = [f for f in files if f.stem in set(args.only)]
    if not files:
        print("no scenarios selected", file=sys.stderr)
        return 1
    status = 0
    for f in files:
        t0 = time.perf_counter()
        code = cli_main(["scenario", "run", str(f), "--out", args.out, "--plot",
                         "--workers", str(args.workers)])
        print(f"  {f.stem}: exit {code} in {time.perf_counter() - t0:.1f}s", flush=True)
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
