import math

import numpy as np
import pytest

from sparsedom.space import build_grid_space, ball_r
from sparsedom.functions import GridFunction
from sparsedom.stopping import (
    StoppingConfig,
    build_stopping_ladder,
    certify_sparse,
    local_maximal_fn,
    maximal_fn,
    sparse_form,
)


def brute_maximal(space, vals, p, s_cap=None):
    """Direct loop over every center and dyadic scale (oracle)."""
    s_lo = int(math.floor(math.log2(space.step)))
    s_hi = int(math.ceil(math.log2(2.0 * space.extent)))
    out = np.zeros(space.npts)
    for s in range(s_lo, s_hi + 1):
        if s_cap is not None and s > s_cap:
            break
        for c in range(space.npts):
            mem = space.ball_members(c, 2.0 ** s)
            if mem.size == 0:
                continue
            w = space.weights[mem]
            a = (np.sum(np.abs(vals[mem]) ** p * w) / w.sum()) ** (1.0 / p)
            out[mem] = np.maximum(out[mem], a)
    return out


def test_maximal_fn_oracle(tiny_space):
    sp = tiny_space
    rng = np.random.default_rng(0)
    vals = np.abs(rng.standard_normal(sp.npts))
    for p in (1.0, 2.0):
        got = maximal_fn(sp, vals, p).values
        want = brute_maximal(sp, vals, p)
        assert np.allclose(got, want, rtol=1e-10, atol=1e-12)


def test_maximal_fn_scale_cap(tiny_space):
    sp = tiny_space
    rng = np.random.default_rng(1)
    vals = np.abs(rng.standard_normal(sp.npts))
    got = maximal_fn(sp, vals, 1.0, s_cap=-3).values
    want = brute_maximal(sp, vals, 1.0, s_cap=-3)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-12)


def test_local_maximal_oracle(tiny_space):
    sp = tiny_space
    rng = np.random.default_rng(2)
    vals = np.abs(rng.standard_normal(sp.npts))
    omega = np.arange(10, 50)
    mask = np.zeros(sp.npts, dtype=bool)
    mask[omega] = True
    dist = sp.dist_to_complement(mask)
    delta = 4.0
    got = local_maximal_fn(sp, vals, 1.0, omega, delta, dist).values

    s_lo = int(math.floor(math.log2(sp.step)))
    s_hi = int(math.ceil(math.log2(2.0 * sp.extent)))
    want = np.zeros(sp.npts)
    for s in range(s_lo, s_hi + 1):
        r = 2.0 ** s
        for c in omega:
            mem = sp.ball_members(int(c), r)
            if mem.size == 0:
                continue
            # the whole ball must sit deep inside Omega
            if dist[mem].min() < delta * r:
                continue
            w = sp.weights[mem]
            a = np.sum(np.abs(vals[mem]) * w) / w.sum()
            want[mem] = np.maximum(want[mem], a)
    want[~mask] = 0.0
    assert np.allclose(got, want, rtol=1e-10, atol=1e-12)


def make_pair(space, rng, kind, c_o=4.0, r0=2.0 ** -4):
    lo = int(math.ceil(c_o * r0 / space.step)) + 1
    center = int(rng.integers(lo, space.npts - lo))
    B0 = ball_r(space, center, r0)
    E0 = ball_r(space, center, c_o * r0)
    f1 = np.zeros(space.npts)
    f2 = np.zeros(space.npts)
    sup = E0.members
    if kind == "indicator":
        f1[B0.members] = 1.0
        f2[sup] = 1.0
    elif kind == "spike":
        f1[sup] = 1.0
        f1[rng.choice(sup, size=3)] = 50.0
        f2[sup] = 1.0
    else:
        f1[sup] = np.abs(rng.standard_normal(sup.size)) + 0.1
        f2[sup] = np.abs(rng.standard_normal(sup.size)) + 0.1
    return f1, f2, B0


@pytest.mark.parametrize("kind", ["indicator", "spike", "random"])
def test_ladder_structure(line_space, kind):
    sp = line_space
    rng = np.random.default_rng(hash(kind) % 2 ** 31)
    f1, f2, B0 = make_pair(sp, rng, kind)
    cfg = StoppingConfig(p1=1.0, p2=1.0, c_o=4.0)
    lad = build_stopping_ladder(sp, GridFunction(sp, f1),
                                GridFunction(sp, f2), B0, cfg)
    # exact nesting and halving at every level
    for k in range(len(lad.levels) - 1):
        prev, nxt = lad.levels[k], lad.levels[k + 1]
        assert np.isin(nxt, prev).all()
        assert nxt.size <= prev.size / 2.0
    assert np.array_equal(np.sort(lad.levels[0]), np.sort(lad.E0_ball.members))


def test_certify_sparse(line_space):
    sp = line_space
    rng = np.random.default_rng(11)
    f1, f2, B0 = make_pair(sp, rng, "spike")
    cfg = StoppingConfig(p1=1.0, p2=1.0, c_o=4.0)
    lad = build_stopping_ladder(sp, f1, f2, B0, cfg)
    col = certify_sparse(lad)
    assert col.zeta >= cfg.zeta_min
    seen = np.zeros(sp.npts, dtype=bool)
    for B, E in zip(col.balls, col.major_subsets):
        assert E.size > 0
        assert np.isin(E, B.members).all()
        assert not seen[E].any()
        seen[E] = True
        assert sp.weights[E].sum() >= col.zeta * B.measure - 1e-15


def test_sparse_form_basic(line_space):
    sp = line_space
    rng = np.random.default_rng(12)
    f1, f2, B0 = make_pair(sp, rng, "random")
    cfg = StoppingConfig(p1=1.0, p2=1.0, c_o=4.0)
    lad = build_stopping_ladder(sp, f1, f2, B0, cfg)
    col = certify_sparse(lad)
    val = sparse_form(col, f1, f2, 1.0, 1.0)
    assert val > 0
    assert sparse_form(col, 2.0 * f1, f2, 1.0, 1.0) == pytest.approx(2 * val)
    assert sparse_form(col, np.zeros(sp.npts), f2, 1.0, 1.0) == 0.0


def test_config_q_validation(line_space):
    with pytest.raises(ValueError):
        StoppingConfig(q=5.0).resolve(line_space)


def test_support_validation(line_space):
    sp = line_space
    B0 = ball_r(sp, sp.npts // 2, 2.0 ** -4)
    bad = np.ones(sp.npts)  # supported everywhere, not inside c_o B0
    with pytest.raises(ValueError):
        build_stopping_ladder(sp, bad, bad, B0, StoppingConfig())


def test_depth_two_plateau_spike():
    """Engineered scale separation produces a second exceptional level."""
    sp = build_grid_space((1.0,), 2.0 ** -14, extent=2.0)
    center = sp.npts // 2
    B0 = ball_r(sp, center, 2.0 ** -2)
    E0 = ball_r(sp, center, 1.0)
    mask = np.zeros(sp.npts, dtype=bool)
    mask[E0.members] = True
    # plateau off-center so the top ball's inner fifth is not swallowed
    # by the first exceptional set
    steps = np.arange(sp.npts) - center
    vals = np.where(np.abs(steps - 6000) <= 1024, 1.0, 0.0)
    vals[center + 6037] = 40.0
    vals[~mask] = 0.0
    f2 = np.where(mask, 1.0, 0.0)
    cfg = StoppingConfig(p1=1.0, p2=1.0, c_o=4.0, theta_init=2)
    lad = build_stopping_ladder(sp, vals, f2, B0, cfg)
    assert lad.depth >= 2
    col = certify_sparse(lad)
    assert col.zeta >= cfg.zeta_min
