#!/usr/bin/env python3
"""Run every bundled scenario and print a one-line verdict per scenario.

Usage:  python3 scripts/run_all_scenarios.py [--out DIR] [--threads N]
"""
import argparse
import sys
import time
from pathlib import Path

from sparsedom.cli import main as cli_main

SCENARIOS = [
    "whitney_1d", "whitney_2d", "ladder_1d",
    "sparse_linear_hilbert", "sparse_maximal_circle",
    "parabola_decay", "decay_point_mass",
    "improving_parabola", "converse_dini_cz",
    "sharpness_parabola", "weights_power",
]


def run(out_root: Path, threads: int) -> int:
    worst = 0
    for name in SCENARIOS:
        t0 = time.time()
        rc = cli_main(["run", name, "--threads", str(threads),
                       "--out", str(out_root / name)])
        status = {0: "ok", 1: "config error", 2: "check failed"}[rc]
        print(f"{name:28s} exit {rc} ({status})  {time.time() - t0:6.1f}s")
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="scenario_runs")
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()
    sys.exit(run(Path(args.out), args.threads))
