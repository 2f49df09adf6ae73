import math

import numpy as np
import pytest

from sparsedom.space import build_grid_space, ball_r
from sparsedom.operators import (
    cz_family,
    hilbert_kernel,
    measure_family,
    point_mass_measure,
    radon_curve_measure,
)
from sparsedom.improving import (
    ConverseRecord,
    Modulus,
    check_improving_a,
    check_improving_b,
    continuity_fit,
    converse_extract,
    dini_norm,
    fourier_decay_fit,
    make_atom,
)


# ---------------------------------------------------------------------------
# Dini moduli
# ---------------------------------------------------------------------------

def test_dini_linear_modulus():
    dn = dini_norm(Modulus.from_callable(lambda t: t))
    assert not dn.divergent
    # integral of t dt/t over (0,1] is 1; the dyadic trapezoid converges
    # to a constant near it
    assert float(dn) == pytest.approx(1.04, abs=0.05)


def test_dini_sqrt_modulus():
    dn = dini_norm(Modulus.from_callable(lambda t: np.sqrt(t)))
    assert not dn.divergent
    assert float(dn) == pytest.approx(2.0, abs=0.1)


def test_dini_log_divergent():
    dn = dini_norm(Modulus.from_callable(lambda t: 1.0 / np.log(math.e / t)))
    assert dn.divergent


def test_modulus_monotone_validation():
    with pytest.raises(ValueError):
        Modulus.from_callable(lambda t: 1.0 - t)


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------

def test_make_atom(line_space):
    sp = line_space
    B = ball_r(sp, sp.npts // 2, 2.0 ** -3)
    atom = make_atom(sp, B, 2.0, seed=1)
    w = sp.weights[B.members]
    mean = np.sum(atom.values[B.members] * w)
    assert abs(mean) <= 1e-10
    outside = np.ones(sp.npts, dtype=bool)
    outside[B.members] = False
    assert np.all(atom.values[outside] == 0)


# ---------------------------------------------------------------------------
# Fourier decay
# ---------------------------------------------------------------------------

def test_decay_point_mass_flat():
    fit = fourier_decay_fit(point_mass_measure(2))
    assert abs(fit.beta) <= 1e-9
    assert not fit.flagged


def test_decay_parabola():
    fit = fourier_decay_fit(radon_curve_measure(2, omega="one"))
    assert fit.beta >= 0.4
    assert not fit.flagged


# ---------------------------------------------------------------------------
# improving constants
# ---------------------------------------------------------------------------

def test_improving_identity_family(line_space):
    fam = measure_family(line_space, point_mass_measure(1))
    i_emp = check_improving_a(fam, -3, 2.0, 2.0, trials=8)
    # identity: output averages equal input averages up to the dilate factor
    assert 0 < i_emp < 10.0


def test_improving_table_monotone(line_space):
    fam = cz_family(line_space, hilbert_kernel())
    tab = check_improving_b(fam, -3, 2.0, 2.0,
                            atom_radii=[2.0 ** -5, 2.0 ** -4], trials=4)
    assert len(tab.omega_emp) == 2
    assert tab.omega_emp[0] <= tab.omega_emp[1] + 1e-12


def test_continuity_fit(line_space):
    fam = cz_family(line_space, hilbert_kernel())
    fit = continuity_fit(fam, -3, 2.0, 2.0, n_sizes=3, trials=3)
    assert len(fit.envelope) == len(fit.ts)
    assert all(v >= 0 for v in fit.envelope)


# ---------------------------------------------------------------------------
# converse extraction
# ---------------------------------------------------------------------------

def test_converse_zero_family(line_space):
    sp = line_space
    fam = cz_family(sp, hilbert_kernel())
    host = ball_r(sp, sp.npts // 2, 2.0 ** -3)
    f = np.zeros(sp.npts)
    recs = [ConverseRecord(host, f, f, 0.0, 0.0)]
    rep = converse_extract(recs, fam, -3, 2.0, 2.0)
    assert rep.i_conv == 0.0


def test_converse_identity_band(line_space):
    sp = line_space
    fam = measure_family(sp, point_mass_measure(1))
    host = ball_r(sp, sp.npts // 2, 2.0 ** -3)
    f = np.zeros(sp.npts)
    f[host.members] = 1.0
    pr = float(np.sum(f * f * sp.weights))
    recs = [ConverseRecord(host, f, f, pr, pr)]
    rep = converse_extract(recs, fam, -3, 2.0, 2.0)
    assert rep.i_conv > 0
    assert 0.1 <= rep.ratio <= 10.0
