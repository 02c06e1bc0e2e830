#!/usr/bin/env python3
"""Run every built-in scenario and show where the reports landed."""

import argparse
import os
import sys

from opdyn.cli import main as cli_main
from opdyn.scenario import list_builtin


def run(out_root: str) -> int:
    worst = 0
    for name in list_builtin():
        outdir = os.path.join(out_root, name)
        code = cli_main(["run", name, "--out", outdir])
        print(f"{name}: exit {code}, report {os.path.join(outdir, 'report.csv')}")
        with open(os.path.join(outdir, "summary.txt")) as fh:
            for line in fh:
                if line.startswith("all-decays"):
                    print(f"  {line.strip()}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs", help="output root directory")
    args = ap.parse_args()
    sys.exit(run(args.out))
