"""Quantitative checks of the analytic hypotheses behind sparse domination:
mean-zero atoms, the two-part L^p-improving property of single-scale
operators, Dini norms of moduli of continuity, Fourier-decay exponents of
measures, the translation-continuity estimate, and the converse extraction
of the improving constant from sparse-verification records.

All constants here are empirical suprema over sampled balls and test
functions; they understate the true operator constants by construction and
are reported with residuals where a fit is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import stats

from .functions import GridFunction, avg, dual_exponent, pairing
from .operators import DiscreteMeasure, SingleScaleFamily, fourier_transform
from .space import Ball, HomogeneousSpace, ball_r

__all__ = [
    "Atom",
    "Modulus",
    "DiniNorm",
    "ImprovingTable",
    "ImprovingReport",
    "DecayFit",
    "ContinuityFit",
    "ConverseRecord",
    "ConverseReport",
    "make_atom",
    "dini_norm",
    "check_improving_a",
    "check_improving_b",
    "fourier_decay_fit",
    "continuity_fit",
    "converse_record",
    "converse_extract",
]


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Atom:
    """Mean-zero function supported in a ball, normalized to <b>_{p,B} = 1."""

    ball: Ball
    values: np.ndarray         # dense, supported exactly on ball.members
    p: float

    @property
    def mean_defect(self) -> float:
        space = self.ball.space
        total = abs(float(np.sum(self.values * space.weights)))
        l1 = float(np.sum(np.abs(self.values) * space.weights))
        return total / l1 if l1 > 0 else 0.0


def make_atom(space: HomogeneousSpace, B: Ball, p: float, seed: int = 0) -> Atom:
    """Random mean-zero function on B with unit L^p ball average."""
    if B.members.size < 2:
        raise ValueError(
            "atoms need a host ball with at least 2 points (a singleton "
            "cannot carry a nonzero mean-zero function)"
        )
    rng = np.random.default_rng(seed)
    w = space.weights[B.members]
    vals = rng.standard_normal(B.members.size)
    vals -= np.sum(vals * w) / np.sum(w)
    if not np.any(vals):
        vals = np.zeros(B.members.size)
        vals[0], vals[1] = 1.0, -w[0] / w[1]
    dense = np.zeros(space.npts)
    dense[B.members] = vals
    norm = avg(dense, B, p)
    dense /= norm
    return Atom(ball=B, values=dense, p=p)


# ---------------------------------------------------------------------------
# moduli of continuity and Dini norms
# ---------------------------------------------------------------------------

@dataclass
class Modulus:
    """Samples of a modulus of continuity on the dyadic grid t_k = 2^-k."""

    ts: np.ndarray             # descending dyadic points in (0, 1]
    omegas: np.ndarray
    form: str = "custom"       # "power" | "log" | "custom"

    def __post_init__(self) -> None:
        self.ts = np.asarray(self.ts, dtype=float)
        self.omegas = np.asarray(self.omegas, dtype=float)
        if self.ts.shape != self.omegas.shape or self.ts.size < 2:
            raise ValueError("modulus needs matching sample arrays, >= 2 points")
        if np.any(np.diff(self.ts) >= 0):
            raise ValueError("modulus samples must be on descending t")
        if np.any(np.diff(self.omegas) > 1e-12 * max(1.0, self.omegas.max())):
            raise ValueError("modulus samples must be nonincreasing with t")

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray],
                      k_max: int = 30, form: str = "custom") -> "Modulus":
        ts = 2.0 ** -np.arange(0, k_max + 1)
        return cls(ts=ts, omegas=np.asarray(fn(ts), dtype=float), form=form)


@dataclass
class DiniNorm:
    value: float
    divergent: bool
    tail_fraction: float       # last dyadic increment / total

    def __float__(self) -> float:
        return self.value


def dini_norm(modulus: Modulus, tail_tol: float = 0.005) -> DiniNorm:
    """Dyadic trapezoid approximation of the integral of omega(t)/t dt.

    Flagged divergent when the final-octave increment still contributes
    more than ``tail_tol`` of the running total, meaning the partial sums
    have not settled at the sample floor.
    """
    om = modulus.omegas
    increments = math.log(2.0) * (om[1:] + om[:-1]) / 2.0
    total = float(np.sum(increments))
    tail = float(increments[-1]) / total if total > 0 else 0.0
    return DiniNorm(value=total, divergent=tail > tail_tol, tail_fraction=tail)


# ---------------------------------------------------------------------------
# improving constants
# ---------------------------------------------------------------------------

def _random_hosts(space: HomogeneousSpace, s: int, gamma1: float,
                  gamma2: float, trials: int,
                  rng: np.random.Generator) -> list[Ball]:
    hosts = []
    for _ in range(trials * 6):
        if len(hosts) >= trials:
            break
        c = int(rng.integers(0, space.npts))
        r = 2.0 ** s * float(np.exp(rng.uniform(0.0, math.log(gamma1))))
        if space.mode == "grid" and space.ball_escapes(c, gamma2 * r):
            continue
        L = ball_r(space, c, r)
        if L.members.size:
            hosts.append(L)
    if not hosts:
        raise ValueError(
            f"no host ball of radius ~2^{s} with its {gamma2}-dilate inside "
            "the grid; enlarge the extent or lower the scale"
        )
    return hosts


def _test_functions(space: HomogeneousSpace, L: Ball, kind: int,
                    rng: np.random.Generator) -> np.ndarray:
    f = np.zeros(space.npts)
    if kind == 0:
        f[L.members] = 1.0
    elif kind == 1:
        f[L.members] = rng.choice([-1.0, 1.0], size=L.members.size)
    elif kind == 2:
        sub_c = int(rng.choice(L.members))
        sub = space.ball_members(sub_c, L.radius / 2.0 ** rng.integers(1, 4))
        f[np.intersect1d(sub, L.members)] = 1.0
        if not f.any():
            f[L.members] = 1.0
    else:
        f[L.members] = rng.uniform(-1.0, 1.0, size=L.members.size)
    return f


def check_improving_a(family: SingleScaleFamily, s: int, p1: float, p2: float,
                      trials: int = 16, seed: int = 0,
                      gamma1: float = 2.0,
                      gamma2: Optional[float] = None) -> float:
    """Empirical single-scale improving constant

        I_emp = max  <T(s)(f 1_L)>_{p2', gamma2 L} / <f>_{p1, L}

    over random hosts L with 2^s <= r_L <= gamma1 2^s and adversarial f
    (indicators, Rademacher signs, sub-ball indicators, uniform noise).
    """
    space = family.space
    if not (family.s_min <= s <= family.s_max):
        raise ValueError(f"scale {s} outside the family range")
    if gamma2 is None:
        gamma2 = max(family.c_o, 2.0)
    rng = np.random.default_rng(seed)
    p2d = dual_exponent(p2)
    worst = 0.0
    for i, L in enumerate(_random_hosts(space, s, gamma1, gamma2, trials, rng)):
        f = _test_functions(space, L, i % 4, rng)
        den = avg(f, L, p1)
        if den == 0:
            continue
        out = family.apply(s, f)
        num = avg(out, ball_r(space, L.center, gamma2 * L.radius), p2d)
        worst = max(worst, num / den)
    return worst


@dataclass
class ImprovingTable:
    ratios: list[float]        # r / 2^s, ascending
    omega_emp: list[float]     # monotone (nondecreasing) envelope
    epsilon_fit: float
    r_squared: float
    flagged: bool              # fit inconclusive (R^2 < 0.8)


def check_improving_b(family: SingleScaleFamily, s: int, p1: float, p2: float,
                      atom_radii: Sequence[float], trials: int = 8,
                      seed: int = 0, gamma2: Optional[float] = None
                      ) -> ImprovingTable:
    """Empirical smallness modulus against atoms:

        omega_emp(r/2^s) = max |<T(s)(f 1_L), b>|
                             / (|L| <f>_{p1,L} <b>_{p2, gamma2 L})

    over random hosts, test functions f and mean-zero atoms b of radius r,
    followed by a monotone envelope and a log-log power fit of the exponent.
    """
    space = family.space
    if gamma2 is None:
        gamma2 = max(family.c_o, 2.0)
    radii = sorted(float(r) for r in atom_radii)
    if any(r > 2.0 ** s + 1e-12 for r in radii):
        raise ValueError("atom radii must not exceed the operator scale 2^s")
    rng = np.random.default_rng(seed)
    ratios, raw = [], []
    for r in radii:
        worst = 0.0
        hosts = _random_hosts(space, s, 2.0, gamma2, trials, rng)
        for i, L in enumerate(hosts):
            f = _test_functions(space, L, i % 4, rng)
            den1 = avg(f, L, p1)
            if den1 == 0:
                continue
            out = family.apply(s, f)
            a_c = int(rng.choice(space.ball_members(L.center,
                                                    gamma2 * L.radius)))
            host_b = ball_r(space, a_c, r)
            if host_b.members.size < 2:
                continue
            b = make_atom(space, host_b, p2,
                          seed=int(rng.integers(0, 2 ** 31)))
            den2 = avg(b.values, ball_r(space, L.center, gamma2 * L.radius),
                       p2)
            if den2 == 0:
                continue
            num = abs(complex(pairing(space, out, b.values)))
            worst = max(worst, num / (L.measure * den1 * den2))
        ratios.append(r / 2.0 ** s)
        raw.append(worst)
    env = list(np.maximum.accumulate(raw))
    pos = [(x, y) for x, y in zip(ratios, env) if y > 0]
    if len(pos) >= 3 and len({x for x, _ in pos}) >= 3:
        lx = np.log2([x for x, _ in pos])
        ly = np.log2([y for _, y in pos])
        if np.ptp(ly) == 0:
            eps, r2 = 0.0, 1.0
        else:
            res = stats.linregress(lx, ly)
            eps, r2 = float(res.slope), float(res.rvalue ** 2)
    else:
        eps, r2 = float("nan"), 0.0
    return ImprovingTable(ratios=ratios, omega_emp=env, epsilon_fit=eps,
                          r_squared=r2, flagged=r2 < 0.8)


@dataclass
class ImprovingReport:
    p1: float
    p2: float
    gamma1: float
    gamma2: float
    i_emp: dict[int, float] = field(default_factory=dict)   # per scale
    table: Optional[ImprovingTable] = None


# ---------------------------------------------------------------------------
# Fourier decay of measures
# ---------------------------------------------------------------------------

@dataclass
class DecayFit:
    beta: float
    r_squared: float
    flagged: bool
    shells: list[float]
    sup_values: list[float]


def _directions(ndim: int, count: int = 16) -> np.ndarray:
    if ndim == 1:
        return np.array([[1.0], [-1.0]])
    if ndim == 2:
        ang = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    rng = np.random.default_rng(0)
    v = rng.standard_normal((count, ndim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def fourier_decay_fit(measure: DiscreteMeasure,
                      xi_range: tuple[float, float] = (2.0 ** 3, 2.0 ** 10),
                      directions: int = 16) -> DecayFit:
    """Decay exponent beta of sup_{|xi|=R} |m^(xi)| over dyadic shells R.

    The transform is evaluated exactly as a finite exponential sum; the sup
    per shell is taken over the sampled directions (a lower bound on the
    true shell sup, recorded as such).
    """
    lo, hi = xi_range
    ks = np.arange(math.ceil(math.log2(lo)), math.floor(math.log2(hi)) + 1)
    if ks.size < 4:
        raise ValueError("xi range too narrow: need at least 4 dyadic shells")
    dirs = _directions(measure.points.shape[1], directions)
    # several radii per dyadic shell: radial measures have oscillating
    # transforms whose zeros would otherwise corrupt the per-shell sup
    radial = 2.0 ** np.linspace(0.0, 1.0, 9, endpoint=False)
    shells, sups = [], []
    for k in ks:
        R = 2.0 ** float(k)
        best = 0.0
        for rr in radial:
            vals = fourier_transform(measure, (R * rr) * dirs)
            best = max(best, float(np.max(np.abs(vals))))
        shells.append(R)
        sups.append(best)
    ly = np.log2(np.maximum(sups, 1e-300))
    if np.ptp(ly) < 1e-9:
        return DecayFit(beta=0.0, r_squared=1.0, flagged=False,
                        shells=shells, sup_values=sups)
    res = stats.linregress(np.asarray(ks, dtype=float), ly)
    r2 = float(res.rvalue ** 2)
    return DecayFit(beta=-float(res.slope), r_squared=r2, flagged=r2 < 0.8,
                    shells=shells, sup_values=sups)


# ---------------------------------------------------------------------------
# translation continuity
# ---------------------------------------------------------------------------

def _translate(space: HomogeneousSpace, values: np.ndarray,
               shift: Sequence[int]) -> np.ndarray:
    """(Tr_y f)(x) = f(x - y) for a lattice shift, zero beyond the extent."""
    arr = values.reshape(space.shape)
    out = np.zeros_like(arr)
    src = []
    dst = []
    for n, k in zip(space.shape, shift):
        k = int(k)
        if abs(k) >= n:
            return out.ravel()
        if k >= 0:
            dst.append(slice(k, n))
            src.append(slice(0, n - k))
        else:
            dst.append(slice(0, n + k))
            src.append(slice(-k, n))
    out[tuple(dst)] = arr[tuple(src)]
    return out.ravel()


@dataclass
class ContinuityFit:
    ts: list[float]            # rho(delta_{2^s}^{-1} y), dyadic
    envelope: list[float]      # max translation-difference ratio per t
    epsilon_fit: float
    r_squared: float
    flagged: bool


def continuity_fit(family: SingleScaleFamily, s: int, p1: float, p2: float,
                   n_sizes: int = 5, trials: int = 6, seed: int = 0,
                   gamma2: Optional[float] = None) -> ContinuityFit:
    """Envelope of <(T(s) - Tr_y T(s))(f 1_L)>_{p2', gamma2 L} / <f>_{p1, L}
    against the normalized translation size t = rho(delta_{2^s}^{-1} y),
    with a power-law fit of the exponent."""
    space = family.space
    if space.mode != "grid":
        raise ValueError("continuity estimates require a grid space")
    if gamma2 is None:
        gamma2 = max(family.c_o, 2.0)
    rng = np.random.default_rng(seed)
    p2d = dual_exponent(p2)
    exps = space.dilations.exponents
    ts, env = [], []
    hosts = _random_hosts(space, s, 2.0, gamma2, trials, rng)
    for j in range(1, n_sizes + 1):
        t = 2.0 ** -j
        worst = 0.0
        measured_t = None
        for ax in range(space.ndim):
            y_phys = (t * 2.0 ** s) ** exps[ax]
            k = int(round(y_phys / space.step))
            if k == 0:
                continue
            shift = [0] * space.ndim
            shift[ax] = k
            # actual normalized size after lattice snapping
            snapped = (k * space.step) ** (1.0 / exps[ax]) / 2.0 ** s
            measured_t = snapped if measured_t is None \
                else max(measured_t, snapped)
            for i, L in enumerate(hosts):
                f = _test_functions(space, L, i % 4, rng)
                den = avg(f, L, p1)
                if den == 0:
                    continue
                out = family.apply(s, f)
                diff = out - _translate(space, out, shift)
                num = avg(diff, ball_r(space, L.center, gamma2 * L.radius),
                          p2d)
                worst = max(worst, num / den)
        if measured_t is not None:
            ts.append(measured_t)
            env.append(worst)
    pos = [(x, y) for x, y in zip(ts, env) if y > 0 and x > 0]
    if len(pos) >= 3:
        lx = np.log2([x for x, _ in pos])
        ly = np.log2([y for _, y in pos])
        if np.ptp(ly) == 0:
            eps, r2 = 0.0, 1.0
        else:
            res = stats.linregress(lx, ly)
            eps, r2 = float(res.slope), float(res.rvalue ** 2)
    else:
        eps, r2 = float("nan"), 0.0
    return ContinuityFit(ts=ts, envelope=env, epsilon_fit=eps,
                         r_squared=r2, flagged=r2 < 0.8)


# ---------------------------------------------------------------------------
# converse extraction from sparse records
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ConverseRecord:
    host: Ball                 # ball containing the support of f1
    f1: np.ndarray
    f2: np.ndarray
    pairing: float             # |<T_sigma^tau f1, f2>| from the sparse run
    sparse_form: float


def converse_record(scenario, verdict) -> ConverseRecord:
    """Package a sparse scenario/verdict pair for the converse extraction.
    The host is the localization dilate of the scenario's base ball."""
    space = scenario.family.space
    c_o = max(scenario.family.c_o, scenario.resolve_config().c_o)
    host = ball_r(space, scenario.B0.center, c_o * scenario.B0.radius)
    return ConverseRecord(host=host, f1=np.asarray(scenario.f1),
                          f2=np.asarray(scenario.f2),
                          pairing=verdict.pairing,
                          sparse_form=verdict.sparse_form)


@dataclass
class ConverseReport:
    i_conv: float
    i_emp: float
    ratio: float               # i_conv / i_emp


def converse_extract(records: Sequence[ConverseRecord],
                     family: SingleScaleFamily, s: int,
                     p1: float, p2: float,
                     i_emp: Optional[float] = None,
                     trials: int = 16, seed: int = 0) -> ConverseReport:
    """Bound the single-scale improving constant from sparse records:

        I_conv = max over records of |<T f1, f2>| / (|L| <f1>_{p1,L} <f2>_{p2,L})

    and compare against the directly sampled I_emp.
    """
    if not records:
        raise ValueError("no sparse records supplied")
    i_conv = 0.0
    for rec in records:
        L = rec.host
        den = L.measure * avg(rec.f1, L, p1) * avg(rec.f2, L, p2)
        if den <= 0:
            continue
        i_conv = max(i_conv, rec.pairing / den)
    if i_emp is None:
        i_emp = check_improving_a(family, s, p1, p2, trials=trials, seed=seed)
    ratio = i_conv / i_emp if i_emp > 0 else float("inf") if i_conv > 0 else 1.0
    return ConverseReport(i_conv=i_conv, i_emp=i_emp, ratio=ratio)
