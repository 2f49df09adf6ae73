import math

import numpy as np
import pytest

from sparsedom.space import build_grid_space, ball_r
from sparsedom.functions import pairing
from sparsedom.covering import whitney_cover, whitney_partition
from sparsedom.stopping import StoppingConfig, build_stopping_ladder
from sparsedom.operators import cz_family, hilbert_kernel, truncate
from sparsedom.verify import (
    SparseScenario,
    cz_decompose,
    ratio_trend,
    sharpness_sweep,
    stopping_form,
    stopping_form_max,
    stopping_norm,
    telescoping_check,
    verify_sparse_linear,
    verify_sparse_maximal,
    weight_constants,
)

from test_stopping import make_pair


def ladder_fixture(space, seed=0, kind="spike"):
    rng = np.random.default_rng(seed)
    f1, f2, B0 = make_pair(space, rng, kind)
    cfg = StoppingConfig(p1=1.0, p2=1.0, c_o=4.0)
    return f1, f2, B0, build_stopping_ladder(space, f1, f2, B0, cfg)


# ---------------------------------------------------------------------------
# CZ decomposition
# ---------------------------------------------------------------------------

def cz_instance(space, seed):
    rng = np.random.default_rng(seed)
    c = space.npts // 2 + int(rng.integers(-20, 20))
    L = ball_r(space, c, 2.0 ** -2)
    inner = rng.choice(L.members, size=L.members.size // 4, replace=False)
    cov = whitney_cover(space, np.unique(inner), 16.0)
    part = whitney_partition(space, cov.balls)
    h = np.zeros(space.npts)
    h[L.members] = rng.standard_normal(L.members.size)
    return h, L, cov.balls, part


@pytest.mark.parametrize("seed", range(8))
def test_cz_identities(line_space, seed):
    h, L, balls, part = cz_instance(line_space, seed)
    dec = cz_decompose(h, L, balls, part, p=2.0)
    assert dec.recon_error <= 1e-12
    assert dec.mean_zero_max <= 1e-12


def test_cz_good_function_bounded(line_space):
    h, L, balls, part = cz_instance(line_space, 99)
    dec = cz_decompose(h, L, balls, part, p=2.0)
    assert math.isfinite(dec.good_inf)
    assert dec.good_constant > 0


# ---------------------------------------------------------------------------
# stopping norm and stopping forms
# ---------------------------------------------------------------------------

def test_stopping_norm_parts(line_space):
    h, L, balls, _ = cz_instance(line_space, 5)
    sn = stopping_norm(h, L, balls, p=2.0)
    assert float(sn) == sn.inf_part + sn.sup_part
    assert sn.inf_part >= 0 and sn.sup_part >= 0


def test_stopping_form_oracle(line_space):
    """Per-scale regrouping agrees with the direct ball-by-ball evaluation."""
    sp = line_space
    fam = cz_family(sp, hilbert_kernel())
    f1, f2, B0, lad = ladder_fixture(sp, seed=3)
    L = lad.E0_ball
    cov = lad.covers[1]
    balls = cov.balls if cov is not None else []
    part = whitney_partition(sp, balls) if balls else None
    sigma = -9
    got = stopping_form(fam, L, balls, part, sigma, f1, f2, check=False)

    s_L = int(round(math.log2(L.radius)))
    lmask = np.zeros(sp.npts, dtype=bool)
    lmask[L.members] = True
    emask = np.zeros(sp.npts, dtype=bool)
    for B in balls:
        emask[B.members] = True
    h1L = np.where(lmask, f1, 0.0)
    want = pairing(sp, truncate(fam, sigma, s_L).apply(
        np.where(lmask & ~emask, f1, 0.0)), f2)
    for i, B in enumerate(balls):
        s_B = int(round(math.log2(B.radius)))
        piece = part.apply_to(i, h1L)
        want += pairing(sp, truncate(fam, max(s_B, sigma), s_L).apply(piece),
                        f2)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-13)


def test_stopping_form_requires_partition(line_space):
    sp = line_space
    fam = cz_family(sp, hilbert_kernel())
    L = ball_r(sp, sp.npts // 2, 2.0 ** -2)
    B = ball_r(sp, sp.npts // 2, 2.0 ** -5)
    f = np.ones(sp.npts)
    with pytest.raises(ValueError):
        stopping_form(fam, L, [B], None, -9, f, f, check=False)


def test_stopping_form_max_nonnegative(line_space):
    sp = line_space
    fam = cz_family(sp, hilbert_kernel())
    f1, f2, B0, lad = ladder_fixture(sp, seed=4)
    L = lad.E0_ball
    cov = lad.covers[1]
    balls = cov.balls if cov is not None else []
    part = whitney_partition(sp, balls) if balls else None
    val = stopping_form_max(fam, L, balls, part, -9, -1, f1, f2, check=False)
    assert val >= 0


# ---------------------------------------------------------------------------
# telescoping
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("seed,kind", [(0, "spike"), (1, "random"),
                                       (2, "indicator")])
def test_telescoping_depth1(line_space, seed, kind):
    sp = line_space
    fam = cz_family(sp, hilbert_kernel())
    f1, f2, B0, lad = ladder_fixture(sp, seed=seed, kind=kind)
    for sigma in (-9, -6):
        rep = telescoping_check(fam, lad, sigma, f1, f2)
        assert rep.abs_error <= 1e-10 * max(abs(rep.lhs), 1.0)


# ---------------------------------------------------------------------------
# sparse harness
# ---------------------------------------------------------------------------

def test_sparse_verdict_zero_function(line_space, hilbert_line):
    sp = line_space
    B0 = ball_r(sp, sp.npts // 2, 2.0 ** -4)
    z = np.zeros(sp.npts)
    sc = SparseScenario("zero", hilbert_line, z, z, B0, 1.0, 1.0, -7, -2)
    v = verify_sparse_linear(sc)
    assert v.ratio == 0.0


def test_sparse_verdict_finite(line_space, hilbert_line):
    sp = line_space
    f1, f2, B0 = make_pair(sp, np.random.default_rng(6), "random")
    sc = SparseScenario("rand", hilbert_line, f1, f2, B0, 1.0, 1.0, -7, -2)
    v = verify_sparse_linear(sc)
    assert math.isfinite(v.ratio) and v.sparse_form > 0
    vm = verify_sparse_maximal(sc)
    assert math.isfinite(vm.ratio) and vm.maximal


def test_ratio_trend():
    up = ratio_trend([4] * 30 + [8] * 30,
                     list(np.linspace(1, 1.1, 30)) + list(np.linspace(2, 2.2, 30)))
    assert not up.no_growth
    rng = np.random.default_rng(7)
    flat = ratio_trend([4] * 30 + [8] * 30, list(rng.random(60) + 1.0))
    assert flat.no_growth


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

def test_weight_constants(line_space):
    sp = line_space
    rec = weight_constants(sp, np.ones(sp.npts), 2.0, 2.0)
    assert rec.a_p == pytest.approx(1.0, abs=1e-9)
    x = np.abs(sp.coords[:, 0]) + sp.step
    a_prev = 1.0
    for power in (0.25, 0.5):
        rec = weight_constants(sp, x ** power, 2.0, 2.0)
        assert rec.a_p >= a_prev - 1e-9
        a_prev = rec.a_p
    with pytest.raises(ValueError):
        weight_constants(sp, np.zeros(sp.npts), 2.0, 2.0)
    with pytest.raises(ValueError):
        weight_constants(sp, np.ones(sp.npts), 1.0, 2.0)


# ---------------------------------------------------------------------------
# sharpness (smoke; the oracle comparison runs in the acceptance suite)
# ---------------------------------------------------------------------------

def test_sharpness_smoke():
    rep, _ = sharpness_sweep([2.0 ** -2, 2.0 ** -3, 2.0 ** -4],
                             step=2.0 ** -6, extent=1.0, with_oracle=False)
    assert len(rep.values) == 3
    assert all(v > 0 for v in rep.values)
    assert math.isfinite(rep.value_slope)
