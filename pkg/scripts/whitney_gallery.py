#!/usr/bin/env python3
"""Measure Whitney-cover constants over random open sets.

Builds covers of seeded random open subsets of 1D and 2D grids and prints
the measured overlap / comparability constants per instance.

Usage:  python3 scripts/whitney_gallery.py [--seeds N]
"""
import argparse

import numpy as np

from sparsedom import ball_r, build_grid_space, whitney_cover


def random_open_set(space, rng, n_holes=3):
    mask = np.ones(space.npts, dtype=bool)
    for _ in range(n_holes):
        c = int(rng.integers(0, space.npts))
        r = float(2.0 ** rng.integers(-3, 0))
        mask[ball_r(space, c, r).members] = False
    if not mask.any():
        mask[space.npts // 2] = True
    if mask.all():
        mask[0] = False
    return np.flatnonzero(mask)


def main(seeds: int) -> None:
    spaces = [("1d", build_grid_space((1.0,), 2.0 ** -10, extent=1.0)),
              ("2d", build_grid_space((1.0, 1.0), 2.0 ** -5, extent=1.0))]
    print(f"{'space':5s} {'seed':>4s} {'balls':>6s} {'overlap':>8s} "
          f"{'lambda':>8s} {'d2':>6s} {'d3':>6s} ok")
    for label, sp in spaces:
        for seed in range(seeds):
            omega = random_open_set(sp, np.random.default_rng(seed))
            cov = whitney_cover(sp, omega, 16.0)
            r = cov.report
            print(f"{label:5s} {seed:4d} {len(cov.balls):6d} "
                  f"{r.overlap_M:8d} {r.lambda_touch:8.2f} "
                  f"{r.d2:6.2f} {r.d3:6.2f} {r.ok}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=8)
    main(ap.parse_args().seeds)
