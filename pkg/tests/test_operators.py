import numpy as np
import pytest

from sparsedom.space import build_grid_space, ball_r
from sparsedom.functions import pairing
from sparsedom.operators import (
    DiscreteMeasure,
    adjoint,
    check_localization,
    circle_measure,
    cz_family,
    fourier_transform,
    geometric_smoothing_family,
    hilbert_kernel,
    maximal,
    measure_family,
    point_mass_measure,
    radon_curve_measure,
    truncate,
)


def test_localization_cz(hilbert_line):
    ok, err = check_localization(hilbert_line, -3,
                                 rng=np.random.default_rng(0))
    assert ok, f"localization violated by {err}"


def test_localization_measure(plane_space):
    fam = measure_family(plane_space, circle_measure(256))
    ok, err = check_localization(fam, -2, rng=np.random.default_rng(1))
    assert ok, f"localization violated by {err}"


def test_hilbert_antisymmetry(hilbert_line):
    """T(s) annihilates constants away from the boundary (odd kernel)."""
    sp = hilbert_line.space
    f = np.ones(sp.npts)
    for s in (-6, -4):
        out = hilbert_line.apply(s, f)
        interior = slice(sp.npts // 4, 3 * sp.npts // 4)
        assert np.max(np.abs(out[interior])) < 1e-12


def test_point_mass_identity(line_space):
    """Unit mass at the origin acts as the identity at every scale."""
    fam = measure_family(line_space, point_mass_measure(1))
    rng = np.random.default_rng(2)
    f = rng.standard_normal(line_space.npts)
    for s in (-5, -2, 0):
        assert np.allclose(fam.apply(s, f), f)


def test_measure_tv_validation(line_space):
    m = DiscreteMeasure(points=np.zeros((1, 1)), masses=np.array([2.0]),
                        exponents=(1.0,))
    with pytest.raises(ValueError):
        measure_family(line_space, m)


def test_maximal_linf_bound(plane_space):
    """sup-truncation of a TV<=1 convolution family is an L^inf contraction."""
    fam = measure_family(plane_space, circle_measure(256))
    op = maximal(fam, fam.s_min, fam.s_max)
    rng = np.random.default_rng(3)
    f = rng.standard_normal(plane_space.npts)
    out = op.apply(f)
    assert np.max(np.abs(out)) <= np.max(np.abs(f)) + 1e-12
    assert np.all(out >= -1e-15)


def test_adjoint_pairing(hilbert_line):
    sp = hilbert_line.space
    adj = adjoint(hilbert_line)
    rng = np.random.default_rng(4)
    f = rng.standard_normal(sp.npts)
    g = rng.standard_normal(sp.npts)
    for s in (-5, -3):
        lhs = pairing(sp, hilbert_line.apply(s, f), g)
        rhs = pairing(sp, f, adj.apply(s, g))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_truncation_additivity(hilbert_line):
    """T_sigma^tau = T_sigma^mid + T_mid^tau (disjoint scale windows)."""
    sp = hilbert_line.space
    rng = np.random.default_rng(5)
    f = rng.standard_normal(sp.npts)
    full = truncate(hilbert_line, -6, -2).apply(f)
    split = (truncate(hilbert_line, -6, -4).apply(f)
             + truncate(hilbert_line, -4, -2).apply(f))
    assert np.allclose(full, split, atol=1e-12)


def test_fourier_transform_point_mass():
    m = point_mass_measure(2)
    xi = np.random.default_rng(6).standard_normal((32, 2)) * 10
    vals = fourier_transform(m, xi)
    assert np.allclose(vals, 1.0)


def test_circle_measure_properties():
    m = circle_measure(512)
    assert m.total_variation == pytest.approx(1.0)
    assert np.allclose(np.linalg.norm(m.points, axis=1), 0.5)


def test_radon_measure_two_resolution():
    """Quadrature pushforward stable: doubling n_quad moves the Fourier
    transform by < 1% on the tested range."""
    xi = np.stack([np.linspace(1.0, 64.0, 40), np.zeros(40)], axis=-1)
    lo = fourier_transform(radon_curve_measure(2, n_quad=2048), xi)
    hi = fourier_transform(radon_curve_measure(2, n_quad=4096), xi)
    assert np.max(np.abs(lo - hi)) < 0.01
    m = radon_curve_measure(2)
    dil = m.exponents
    assert dil == (1.0, 2.0)
    # support inside the open unit rho-ball
    rho = (np.abs(m.points[:, 0]) ** 2 + np.abs(m.points[:, 1])) ** 0.5
    assert np.max(rho) < 1.0


def test_radon_cancellative_mass():
    m = radon_curve_measure(2, omega="sign")
    assert abs(np.sum(m.masses)) < 1e-12
    assert m.total_variation == pytest.approx(1.0)


def test_smoothing_family_positive(line_space):
    fam = geometric_smoothing_family(line_space)
    rng = np.random.default_rng(7)
    f = np.abs(rng.standard_normal(line_space.npts))
    out = fam.apply(-3, f)
    assert np.all(out >= -1e-15)
    ones = fam.apply(-3, np.ones(line_space.npts))
    assert np.max(ones) < 10.0


def test_scale_window_clipping(hilbert_line):
    op = truncate(hilbert_line, hilbert_line.s_min - 10,
                  hilbert_line.s_max + 10)
    f = np.random.default_rng(8).standard_normal(hilbert_line.space.npts)
    ref = truncate(hilbert_line, hilbert_line.s_min, hilbert_line.s_max + 1)
    assert np.allclose(op.apply(f), ref.apply(f))
