#!/usr/bin/env python3
"""Fourier-decay exponents for the bundled measures.

Fits |mhat(xi)| ~ |xi|^{-beta} on dyadic shells over |xi| in [2^3, 2^10];
beta = 1/2 is the expected exponent for non-degenerate curve measures,
0 for a point mass.

Usage:  python3 scripts/decay_table.py
"""
from sparsedom import (
    circle_measure,
    fourier_decay_fit,
    point_mass_measure,
    radon_curve_measure,
)

MEASURES = [
    ("circle (arc length, r=1/2)", circle_measure()),
    ("parabola arc, omega=1", radon_curve_measure(2, omega="one")),
    ("parabola arc, omega=sign", radon_curve_measure(2, omega="sign")),
    ("cubic curve arc, omega=1", radon_curve_measure(3, omega="one")),
    ("point mass", point_mass_measure(2)),
]

if __name__ == "__main__":
    print(f"{'measure':30s} {'beta':>7s} {'r^2':>7s}  flagged")
    for name, m in MEASURES:
        fit = fourier_decay_fit(m)
        print(f"{name:30s} {fit.beta:7.3f} {fit.r_squared:7.3f}  "
              f"{fit.flagged}")
