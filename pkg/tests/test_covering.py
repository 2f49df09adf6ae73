import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsedom.space import build_grid_space, ball_r
from sparsedom.covering import (
    dist_constants,
    five_r_cover,
    fixed_scale_cover,
    whitney_cover,
    whitney_partition,
)


def random_open_set(space, rng, n_holes=3):
    """Complement of a few random balls; nonempty, not the whole grid."""
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


@pytest.mark.parametrize("seed", range(5))
def test_whitney_properties_1d(line_space, seed):
    rng = np.random.default_rng(seed)
    omega = random_open_set(line_space, rng)
    cov = whitney_cover(line_space, omega, 16.0)
    rep = cov.report
    assert rep.ok, rep.witness
    assert rep.union_equals_omega
    assert rep.shrunk_disjoint
    assert rep.dyadic
    assert rep.eta_inside


@pytest.mark.parametrize("seed", range(3))
def test_whitney_properties_2d(plane_space, seed):
    rng = np.random.default_rng(100 + seed)
    omega = random_open_set(plane_space, rng)
    cov = whitney_cover(plane_space, omega, 16.0)
    assert cov.report.ok, cov.report.witness


def test_whitney_union_exact(line_space):
    omega = random_open_set(line_space, np.random.default_rng(42))
    cov = whitney_cover(line_space, omega, 16.0)
    union = np.unique(np.concatenate([B.members for B in cov.balls]))
    assert np.array_equal(union, np.sort(omega))


def test_whitney_partition_exact(line_space):
    sp = line_space
    omega = random_open_set(sp, np.random.default_rng(8))
    cov = whitney_cover(sp, omega, 16.0)
    part = whitney_partition(sp, cov.balls)
    total = np.zeros(sp.npts)
    ones = np.ones(sp.npts)
    for i, B in enumerate(cov.balls):
        phi = part.apply_to(i, ones)
        # supported in its ball
        outside = np.ones(sp.npts, dtype=bool)
        outside[B.members] = False
        assert np.all(phi[outside] == 0)
        assert np.all(phi >= 0)
        total += phi
    mask = np.zeros(sp.npts, dtype=bool)
    mask[omega] = True
    assert np.allclose(total[mask], 1.0, atol=1e-14)
    assert np.all(total[~mask] == 0)


def test_dist_constants_finite(line_space):
    omega = random_open_set(line_space, np.random.default_rng(9))
    cov = whitney_cover(line_space, omega, 16.0)
    b, d1, d2, d3 = dist_constants(cov)
    assert all(np.isfinite(v) and v > 0 for v in (b, d1, d2, d3))
    assert d2 <= d3 + 1e-12


def test_five_r_cover(tiny_space):
    sp = tiny_space
    rng = np.random.default_rng(10)
    balls = [ball_r(sp, int(rng.integers(0, sp.npts)),
                    float(2.0 ** rng.integers(-4, -1))) for _ in range(12)]
    selected = five_r_cover(sp, balls)
    # selected balls are pairwise disjoint
    seen = np.zeros(sp.npts, dtype=bool)
    for B in selected:
        assert not seen[B.members].any()
        seen[B.members] = True
    # 5-dilates of the selected balls cover the original union
    union = np.unique(np.concatenate([B.members for B in balls]))
    cover = np.zeros(sp.npts, dtype=bool)
    for B in selected:
        cover[ball_r(sp, B.center, 5.0 * B.radius).members] = True
    assert cover[union].all()


def test_fixed_scale_cover(tiny_space):
    sp = tiny_space
    host = ball_r(sp, sp.npts // 2, 0.5)
    pieces, rep = fixed_scale_cover(sp, host, -3)
    assert rep.covers
    covered = np.zeros(sp.npts, dtype=bool)
    for B in pieces:
        covered[B.members] = True
    assert covered[host.members].all()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_whitney_property_random(seed):
    sp = build_grid_space((1.0,), 2.0 ** -5, extent=1.0)
    omega = random_open_set(sp, np.random.default_rng(seed))
    cov = whitney_cover(sp, omega, 16.0)
    assert cov.report.ok, cov.report.witness
