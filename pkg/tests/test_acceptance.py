"""Acceptance suite: one test (and one printed PASS/FAIL line) per criterion.

Run with  pytest -v tests/test_acceptance.py  — each test prints
"PASS acceptance-NN <name>: <measured constants>" on success; a failed
assertion prints the FAIL line first.
"""
import filecmp
import math
import time

import numpy as np
import pytest

from sparsedom.cli import main
from sparsedom.space import build_grid_space, ball_r
from sparsedom.covering import whitney_cover
from sparsedom.functions import pairing
from sparsedom.stopping import StoppingConfig, build_stopping_ladder, certify_sparse
from sparsedom.operators import (
    circle_measure,
    cz_family,
    hilbert_kernel,
    measure_family,
    point_mass_measure,
    radon_curve_measure,
)
from sparsedom.improving import (
    check_improving_a,
    converse_extract,
    converse_record,
    fourier_decay_fit,
)
from sparsedom.verify import (
    SparseScenario,
    cz_decompose,
    telescoping_check,
    verify_sparse_linear,
)

from test_covering import random_open_set
from test_stopping import make_pair
from test_verify import cz_instance


def report(num, name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} acceptance-{num:02d} {name}: {detail}")
    assert ok, f"acceptance-{num:02d} {name}: {detail}"


def test_01_whitney_suite():
    t0 = time.time()
    spaces = [build_grid_space((1.0,), 2.0 ** -12, extent=1.0),
              build_grid_space((1.0, 1.0), 2.0 ** -5, extent=1.0)]
    bad = 0
    for i, sp in enumerate(spaces):
        for seed in range(25):
            omega = random_open_set(sp, np.random.default_rng(1000 * i + seed))
            cov = whitney_cover(sp, omega, 16.0)
            if not cov.report.ok:
                bad += 1
    elapsed = time.time() - t0
    report(1, "whitney-suite", bad == 0 and elapsed < 60.0,
           f"50 covers, {bad} failures, {elapsed:.1f}s (< 60s)")


def test_02_stopping_ladders():
    sp = build_grid_space((1.0,), 2.0 ** -9, extent=1.0)
    kinds = ["spike", "indicator", "random"]
    worst_zeta = math.inf
    for seed in range(25):
        rng = np.random.default_rng(seed)
        f1, f2, B0 = make_pair(sp, rng, kinds[seed % 3])
        lad = build_stopping_ladder(sp, f1, f2, B0,
                                    StoppingConfig(p1=1.0, p2=1.0, c_o=4.0))
        for k in range(len(lad.levels) - 1):
            assert np.isin(lad.levels[k + 1], lad.levels[k]).all()
            assert lad.levels[k + 1].size <= lad.levels[k].size / 2.0
        col = certify_sparse(lad)
        worst_zeta = min(worst_zeta, col.zeta)
    report(2, "stopping-ladders", worst_zeta >= 0.01,
           f"25 ladders, min zeta = {worst_zeta:.4f} (>= 0.01)")


def test_03_cz_identities():
    sp = build_grid_space((1.0,), 2.0 ** -7, extent=1.0)
    worst_recon, worst_mean = 0.0, 0.0
    for seed in range(100):
        h, L, balls, part = cz_instance(sp, seed)
        dec = cz_decompose(h, L, balls, part, p=2.0)
        worst_recon = max(worst_recon, dec.recon_error)
        worst_mean = max(worst_mean, dec.mean_zero_max)
    report(3, "cz-identities", worst_recon <= 1e-12 and worst_mean <= 1e-12,
           f"100 instances, recon <= {worst_recon:.2e}, "
           f"mean-zero <= {worst_mean:.2e} (both <= 1e-12)")


def test_04_telescoping_depth2():
    sp = build_grid_space((1.0,), 2.0 ** -14, extent=2.0)
    fam = cz_family(sp, hilbert_kernel())  # 1/(x-y): Dini modulus omega(t)=t
    center = sp.npts // 2
    B0 = ball_r(sp, center, 2.0 ** -2)
    E0 = ball_r(sp, center, 1.0)
    mask = np.zeros(sp.npts, dtype=bool)
    mask[E0.members] = True
    steps = np.arange(sp.npts) - center
    f1 = np.where(np.abs(steps - 6000) <= 1024, 1.0, 0.0)
    f1 += np.where((steps > 7024) & (steps <= 7536), 0.25, 0.0)
    f1[center + 6037] = 40.0
    f1[~mask] = 0.0
    rng = np.random.default_rng(7)
    f2 = np.where(mask, 0.5 + rng.random(sp.npts), 0.0)
    lad = build_stopping_ladder(sp, f1, f2, B0,
                                StoppingConfig(p1=1.0, p2=1.0, c_o=4.0,
                                               theta_init=2))
    rep = telescoping_check(fam, lad, -11, f1, f2)
    report(4, "telescoping-depth2",
           lad.depth >= 2 and rep.rel_error <= 1e-10 and rep.terms > 100,
           f"depth = {lad.depth} (>= 2), rel err = {rep.rel_error:.2e} "
           f"(<= 1e-10), {rep.terms} stopping-form terms")


def test_05_sparse_linear(tmp_path, capsys):
    rc = main(["run", "sparse_linear_hilbert", "--threads", "4",
               "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    with capsys.disabled():
        report(5, "sparse-linear", rc == 0,
               "scenario sparse_linear_hilbert exit 0; " +
               "; ".join(l for l in out.splitlines() if ":" in l))


def test_06_sparse_maximal(tmp_path, capsys):
    rc = main(["run", "sparse_maximal_circle", "--threads", "4",
               "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    with capsys.disabled():
        report(6, "sparse-maximal", rc == 0,
               "scenario sparse_maximal_circle exit 0; " +
               "; ".join(l for l in out.splitlines() if ":" in l))


def test_07_fourier_decay():
    parab = fourier_decay_fit(radon_curve_measure(2, omega="one"))
    circ = fourier_decay_fit(circle_measure())
    point = fourier_decay_fit(point_mass_measure(2))
    ok = parab.beta >= 0.45 and circ.beta >= 0.45 and abs(point.beta) <= 0.05
    report(7, "fourier-decay", ok,
           f"parabola beta = {parab.beta:.3f} (>= 0.45), "
           f"circle beta = {circ.beta:.3f} (>= 0.45), "
           f"point mass beta = {point.beta:.3f} (|.| <= 0.05)")


def test_08_improving_refinement():
    p = 5.0 / 3.0  # 1/p1 + 1/p2 = 1.2 < 1 + 1/(N d) = 1.25
    vals = {}
    for step in (2.0 ** -6, 2.0 ** -7):
        sp = build_grid_space((1.0, 2.0), step, extent=1.0)
        fam = measure_family(sp, radon_curve_measure(2))
        vals[step] = check_improving_a(fam, -3, p, p, trials=8)
    ratio = vals[2.0 ** -7] / vals[2.0 ** -6]
    ratio = max(ratio, 1.0 / ratio)
    report(8, "improving-refinement", ratio < 2.0,
           f"I_emp full step = {vals[2.0 ** -6]:.4f}, half step = "
           f"{vals[2.0 ** -7]:.4f}, drift = {ratio:.3f} (< 2)")


def test_09_converse_band():
    sp = build_grid_space((1.0,), 2.0 ** -9, extent=1.0)  # 1025 sites
    ratios = {}
    for label, fam in (
            ("identity", measure_family(sp, point_mass_measure(1))),
            ("dini-cz", cz_family(sp, hilbert_kernel()))):
        f1, f2, B0 = make_pair(sp, np.random.default_rng(3), "random")
        sc = SparseScenario(label, fam, f1, f2, B0, 2.0, 2.0, -8, -2)
        verdict = verify_sparse_linear(sc)
        rec = converse_record(sc, verdict)
        rep = converse_extract([rec], fam, -4, 2.0, 2.0)
        ratios[label] = rep.ratio
    ok = all(1.0 / 50.0 <= r <= 50.0 for r in ratios.values())
    report(9, "converse-band", ok,
           f"I_conv/I_emp identity = {ratios['identity']:.3f}, "
           f"dini-cz = {ratios['dini-cz']:.3f} (both in [1/50, 50])")


def test_10_sharpness_oracle(tmp_path, capsys):
    t0 = time.time()
    rc = main(["run", "sharpness_parabola", "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    elapsed = time.time() - t0
    with capsys.disabled():
        report(10, "sharpness-oracle", rc == 0 and elapsed < 300.0,
               f"scenario sharpness_parabola exit 0, {elapsed:.1f}s (< 5min); "
               + "; ".join(l for l in out.splitlines() if ":" in l))


def test_11_determinism(tmp_path):
    mismatched = []
    for name in ("weights_power", "decay_point_mass", "improving_parabola"):
        a, b = tmp_path / f"{name}_a", tmp_path / f"{name}_b"
        main(["run", name, "--out", str(a)])
        main(["run", name, "--out", str(b)])
        for f in sorted(p.name for p in a.iterdir()):
            if not filecmp.cmp(a / f, b / f, shallow=False):
                mismatched.append(f"{name}/{f}")
    report(11, "determinism", not mismatched,
           "3 scenarios rerun byte-identical"
           + (f"; mismatches: {mismatched}" if mismatched else ""))
