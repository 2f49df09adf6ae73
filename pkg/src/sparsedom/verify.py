"""End-to-end verification: Calderon-Zygmund decompositions, stopping norms
and stopping forms, the exact telescoping identity over a stopping ladder,
the sparse-domination ratio harness, weight constants, and the sharpness
sweep for curve averages.

The telescoping check is the strongest internal consistency test in the
package: it ties the ladder construction, the partition of unity, and the
operator truncations together through an identity that holds by pure
algebra, so any failure beyond round-off indicates a bug rather than an
analytic gap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .covering import PartitionOfUnity, whitney_partition
from .functions import GridFunction, avg, dual_exponent, pairing
from .operators import (SingleScaleFamily, TruncatedOperator, maximal,
                        measure_family, radon_curve_measure, truncate)
from .space import Ball, HomogeneousSpace, ball_r, build_grid_space
from .stopping import (SparseCollection, StoppingConfig, StoppingLadder,
                       build_stopping_ladder, certify_sparse, sparse_form)

__all__ = [
    "CZDecomposition",
    "StoppingNorm",
    "SparseScenario",
    "SparseVerdict",
    "TelescopingReport",
    "WeightRecord",
    "SharpnessReport",
    "cz_decompose",
    "stopping_norm",
    "stopping_form",
    "stopping_form_max",
    "telescoping_check",
    "verify_sparse_linear",
    "verify_sparse_maximal",
    "sparse_batch",
    "ratio_trend",
    "weight_constants",
    "weighted_norm_sample",
    "sharpness_sweep",
]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _values(f) -> np.ndarray:
    return f.values if isinstance(f, GridFunction) else np.asarray(f)


def _union_mask(space: HomogeneousSpace, balls: Sequence[Ball]) -> np.ndarray:
    mask = np.zeros(space.npts, dtype=bool)
    for b in balls:
        mask[b.members] = True
    return mask


def _dyadic_scale(B: Ball) -> int:
    s = round(math.log2(B.radius))
    if 2.0 ** s != B.radius:
        raise ValueError(f"ball radius {B.radius} is not a power of two")
    return int(s)


def _check_stopwhit(space: HomogeneousSpace, L: Ball, balls: Sequence[Ball],
                    c_o: float, q: Optional[float]) -> None:
    """Radius halving and q-containment for cover balls meeting c_o L."""
    coL = np.zeros(space.npts, dtype=bool)
    coL[space.ball_members(L.center, c_o * L.radius)] = True
    qL = None
    if q is not None:
        qL = np.zeros(space.npts, dtype=bool)
        qL[space.ball_members(L.center, q * L.radius)] = True
    for B in balls:
        if B.members.size == 0 or not coL[B.members].any():
            continue
        if B.radius > L.radius / 2.0 + 1e-12:
            raise ValueError(
                f"cover ball of radius {B.radius} meets the c_o-dilate of a "
                f"host of radius {L.radius}: radius halving violated"
            )
        if qL is not None and not qL[B.members].all():
            raise ValueError("cover ball meeting c_o L is not contained in qL")


# ---------------------------------------------------------------------------
# Calderon-Zygmund decomposition on a host ball
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class CZDecomposition:
    space: HomogeneousSpace
    h: np.ndarray
    L: Ball
    balls: list[Ball]
    bad: list[np.ndarray]          # dense b_B arrays, one per cover ball
    good: np.ndarray
    recon_error: float             # relative sup error of h = g + sum b_B
    mean_zero_max: float           # max |integral of b_B| / ||b_B||_1
    good_inf: float                # ||g||_inf
    bad_avg_max: float             # sup_B <b_B>_{p,B}
    good_constant: float           # ||g||_inf / stopping norm (nan if norm 0)
    bad_constant: float            # sup_B <b_B>_{p,B} / stopping norm

    @property
    def bad_total(self) -> np.ndarray:
        out = np.zeros_like(self.good)
        for b in self.bad:
            out = out + b
        return out


def cz_decompose(h, L: Ball, cover: Sequence[Ball],
                 partition: PartitionOfUnity, p: float,
                 c_o: float = 4.0, q: Optional[float] = None
                 ) -> CZDecomposition:
    """Split h into a bounded good part and mean-zero bad parts per ball:

        b_B = h phi_B - (avg_B of h phi_B) 1_B,
        g   = h 1_{E^c} + sum_B (avg_B of h phi_B) 1_B,   E = union of cover.

    The cover must satisfy radius halving against L (and q-containment when
    q is given); both are checked, not assumed.
    """
    space = L.space
    hv = _values(h).astype(np.result_type(_values(h), float))
    cover = list(cover)
    _check_stopwhit(space, L, cover, c_o, q)
    if partition is not None and len(partition.balls) != len(cover):
        raise ValueError("partition does not match the cover")
    emask = _union_mask(space, cover)
    good = np.where(emask, 0.0, hv).astype(hv.dtype)
    bad: list[np.ndarray] = []
    mean_zero = 0.0
    bad_avg = 0.0
    for i, B in enumerate(cover):
        hphi = partition.apply_to(i, hv)
        mean = float(np.real(np.sum(hphi * space.weights))) / B.measure \
            if not np.iscomplexobj(hphi) else \
            complex(np.sum(hphi * space.weights)) / B.measure
        b = hphi.copy()
        b[B.members] -= mean
        bad.append(b)
        good[B.members] += mean
        total = abs(complex(np.sum(b * space.weights)))
        l1 = float(np.sum(np.abs(b) * space.weights))
        if l1 > 0:
            mean_zero = max(mean_zero, total / l1)
        bad_avg = max(bad_avg, avg(b, B, p))
    recon = good + sum(bad) if bad else good
    scale = float(np.max(np.abs(hv))) or 1.0
    recon_error = float(np.max(np.abs(hv - recon))) / scale
    norm = stopping_norm(hv, L, cover, p, c_o=c_o).value
    g_inf = float(np.max(np.abs(good))) if good.size else 0.0
    return CZDecomposition(
        space=space, h=hv, L=L, balls=cover, bad=bad, good=good,
        recon_error=recon_error, mean_zero_max=mean_zero,
        good_inf=g_inf, bad_avg_max=bad_avg,
        good_constant=g_inf / norm if norm > 0 else float("nan"),
        bad_constant=bad_avg / norm if norm > 0 else float("nan"),
    )


# ---------------------------------------------------------------------------
# stopping norms
# ---------------------------------------------------------------------------

@dataclass
class StoppingNorm:
    value: float              # ||h 1_{c_o L \ E}||_inf + sup_B <h>_{p,B}
    inf_part: float
    sup_part: float
    e_avg_constant: float     # <h 1_E>_{p, c_o L} / value  (control check)

    def __float__(self) -> float:
        return self.value


def stopping_norm(h, L: Ball, cover: Sequence[Ball], p: float,
                  c_o: float = 4.0) -> StoppingNorm:
    """The p-stopping norm of h with data (L, cover)."""
    space = L.space
    hv = _values(h)
    emask = _union_mask(space, cover)
    coL = ball_r(space, L.center, c_o * L.radius)
    outside = coL.members[~emask[coL.members]]
    inf_part = float(np.max(np.abs(hv[outside]))) if outside.size else 0.0
    sup_part = max((avg(hv, B, p) for B in cover), default=0.0)
    value = inf_part + sup_part
    he = np.where(emask, hv, 0.0)
    e_avg = avg(he, coL, p)
    return StoppingNorm(value=value, inf_part=inf_part, sup_part=sup_part,
                        e_avg_constant=e_avg / value if value > 0 else 0.0)


# ---------------------------------------------------------------------------
# stopping forms
# ---------------------------------------------------------------------------

def _partition_steps(cover: Sequence[Ball]) -> list[tuple[int, int]]:
    """Cover indices sorted by ball scale, paired with the scale."""
    scales = [_dyadic_scale(B) for B in cover]
    return sorted(zip(scales, range(len(cover))))


def stopping_form(family: SingleScaleFamily, L: Ball, cover: Sequence[Ball],
                  partition: Optional[PartitionOfUnity], sigma: int,
                  h1, h2, c_o: Optional[float] = None,
                  q: Optional[float] = None, check: bool = True):
    """The localized bilinear stopping form

        <T_sigma^{s_L}[h1 1_{L \\ E}], h2>
            + sum_B <T_{s_B v sigma}^{s_L}[h1 1_L phi_B], h2>.

    Evaluated exactly by regrouping per scale: at scale s the input is
    h1 1_L (1_{L \\ E} + sum_{s_B <= s} phi_B), one operator apply per scale.
    """
    space = family.space
    s_L = _dyadic_scale(L)
    cover = list(cover)
    for B in cover:
        if B.members.size and np.isin(B.members, L.members).any():
            if _dyadic_scale(B) > s_L:
                raise ValueError(
                    f"cover ball scale {_dyadic_scale(B)} exceeds the host "
                    f"scale {s_L}"
                )
    if check and c_o is not None:
        _check_stopwhit(space, L, cover, c_o, q)
    if cover and partition is None:
        raise ValueError("a nonempty cover requires a partition of unity")
    v1, v2 = _values(h1), _values(h2)
    lmask = np.zeros(space.npts, dtype=bool)
    lmask[L.members] = True
    emask = _union_mask(space, cover)
    base = np.where(lmask & ~emask, v1, 0.0)    # h1 1_{L \ E}
    h1L = np.where(lmask, v1, 0.0)
    steps = _partition_steps(cover)
    lo = max(sigma, family.s_min)
    hi = min(s_L, family.s_max + 1)
    total = 0.0
    cur = base.astype(np.result_type(v1, float)).copy()
    ptr = 0
    for s in range(lo, hi):
        while ptr < len(steps) and steps[ptr][0] <= s:
            _, i = steps[ptr]
            cur = cur + partition.apply_to(i, h1L)
            ptr += 1
        total = total + pairing(space, family.apply(s, cur), v2)
    return total


def stopping_form_max(family: SingleScaleFamily, L: Ball,
                      cover: Sequence[Ball],
                      partition: Optional[PartitionOfUnity], sigma: int,
                      tau: int, h1, h2, c_o: Optional[float] = None,
                      q: Optional[float] = None, check: bool = True) -> float:
    """Maximal variant: M replaces the truncated sum, the top scale is
    min(s_L, tau), and the result is a sum of nonnegative pairings of
    |sup_s T(s) .| against h2 (no telescoping identity holds)."""
    space = family.space
    s_L = _dyadic_scale(L)
    if check and c_o is not None:
        _check_stopwhit(space, L, cover, c_o, q)
    v1, v2 = _values(h1), _values(h2)
    lmask = np.zeros(space.npts, dtype=bool)
    lmask[L.members] = True
    emask = _union_mask(space, cover)
    top = min(s_L, tau)
    base = np.where(lmask & ~emask, v1, 0.0)
    out = pairing(space, maximal(family, sigma, top).apply(base), np.abs(v2))
    h1L = np.where(lmask, v1, 0.0)
    for i, B in enumerate(cover):
        s_B = _dyadic_scale(B)
        if s_B > s_L:
            raise ValueError("cover ball scale exceeds the host scale")
        piece = partition.apply_to(i, h1L)
        op = maximal(family, max(s_B, sigma), top)
        out = out + pairing(space, op.apply(piece), np.abs(v2))
    return float(np.real(out))


# ---------------------------------------------------------------------------
# telescoping identity over a ladder
# ---------------------------------------------------------------------------

@dataclass
class TelescopingReport:
    lhs: complex
    rhs: complex
    abs_error: float
    rel_error: float
    sigma: int
    top_scale: int
    terms: int

    @property
    def ok(self) -> bool:
        return self.rel_error <= 1e-10


def telescoping_check(family: SingleScaleFamily, ladder: StoppingLadder,
                      sigma: int, f1, f2) -> TelescopingReport:
    """Exact decomposition of <T_sigma^{s_top} f1, f2> into stopping forms:

        <T_sigma^{s_top} f1, f2>
          = sum_k sum_{L in level k, s_L > sigma}
                Lambda^sigma_{(L, cover_{k+1})}(f1 phi_L, f2)
          + sum_{B in final cover, s_B > sigma} <T_sigma^{s_B}[f1 phi_B], f2>,

    with phi at level 0 the indicator of the top ball.  Pure algebra: any
    error beyond round-off is a bug.
    """
    space = ladder.space
    v1, v2 = _values(f1), _values(f2)
    top = ladder.E0_ball
    s_top = _dyadic_scale(top)
    lhs = pairing(space, truncate(family, sigma, s_top).apply(v1), v2)

    n_levels = len(ladder.covers)
    partitions: list[Optional[PartitionOfUnity]] = [None] * n_levels
    for k in range(1, n_levels):
        cov = ladder.covers[k]
        if cov is not None and cov.balls:
            partitions[k] = whitney_partition(space, cov.balls)

    rhs = 0.0
    terms = 0
    K = ladder.depth
    for k in range(K + 1):
        balls_k = ladder.level_balls(k)
        part_k = partitions[k] if k > 0 else None
        nxt = ladder.covers[k + 1] if k + 1 < n_levels else None
        nxt_balls = nxt.balls if nxt is not None else []
        nxt_part = partitions[k + 1] if k + 1 < n_levels else None
        for i, L in enumerate(balls_k):
            if _dyadic_scale(L) <= sigma:
                continue
            if k == 0:
                h1 = np.where(_union_mask(space, [top]), v1, 0.0)
            else:
                h1 = part_k.apply_to(i, v1)
            rhs = rhs + stopping_form(family, L, nxt_balls, nxt_part,
                                      sigma, h1, v2, check=False)
            terms += 1
    # remainder from the final cover (empty when the ladder closed empty)
    final = ladder.covers[K + 1] if K + 1 < n_levels else None
    if final is not None and final.balls:
        part = partitions[K + 1]
        for i, B in enumerate(final.balls):
            s_B = _dyadic_scale(B)
            if s_B <= sigma:
                continue
            piece = part.apply_to(i, v1)
            rhs = rhs + pairing(space, truncate(family, sigma, s_B).apply(piece), v2)
            terms += 1
    abs_err = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs), 1e-30)
    return TelescopingReport(lhs=lhs, rhs=rhs, abs_error=abs_err,
                             rel_error=abs_err / scale, sigma=sigma,
                             top_scale=s_top, terms=terms)


# ---------------------------------------------------------------------------
# sparse-domination harness
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SparseScenario:
    name: str
    family: SingleScaleFamily
    f1: np.ndarray
    f2: np.ndarray
    B0: Ball
    p1: float
    p2: float
    sigma: int
    tau: int
    seed: int = 0
    config: Optional[StoppingConfig] = None

    def resolve_config(self) -> StoppingConfig:
        if self.config is not None:
            return self.config
        return StoppingConfig(p1=self.p1, p2=self.p2,
                              c_o=max(self.family.c_o, 4.0))


@dataclass
class SparseVerdict:
    scenario: str
    seed: int
    sigma: int
    tau: int
    pairing: float
    sparse_form: float
    ratio: float
    depth: int
    zeta: float
    theta: int
    maximal: bool = False

    def row(self) -> dict:
        return {
            "scenario": self.scenario, "seed": self.seed,
            "sigma": self.sigma, "tau": self.tau,
            "pairing": self.pairing, "sparse_form": self.sparse_form,
            "ratio": self.ratio, "depth": self.depth,
            "zeta": self.zeta, "theta": self.theta,
        }


def _verify_sparse(scenario: SparseScenario, use_max: bool) -> SparseVerdict:
    family = scenario.family
    space = family.space
    v1, v2 = _values(scenario.f1), _values(scenario.f2)
    if scenario.sigma >= scenario.tau:
        raise ValueError("sigma must be below tau")
    op = (maximal if use_max else truncate)(family, scenario.sigma, scenario.tau)
    pair_val = pairing(space, op.apply(v1), np.abs(v2) if use_max else v2)
    pair_abs = abs(pair_val)
    if not np.any(v2) or not np.any(v1):
        return SparseVerdict(scenario.name, scenario.seed, scenario.sigma,
                             scenario.tau, pair_abs, 0.0, 0.0, 0, 0.0, 0,
                             maximal=use_max)
    ladder = build_stopping_ladder(space, np.abs(v1), np.abs(v2),
                                   scenario.B0, scenario.resolve_config())
    collection = certify_sparse(ladder)
    sp = sparse_form(collection, np.abs(v1), np.abs(v2),
                     scenario.p1, scenario.p2)
    if sp <= 0.0:
        if pair_abs > 1e-12 * float(np.max(np.abs(v1)) * np.max(np.abs(v2))):
            raise RuntimeError(
                f"scenario {scenario.name}: sparse form vanished but the "
                f"pairing is {pair_abs}; this would contradict sparse "
                "domination and must be investigated"
            )
        ratio = 0.0
    else:
        ratio = pair_abs / sp
    if not math.isfinite(ratio):
        raise RuntimeError(f"scenario {scenario.name}: non-finite ratio")
    return SparseVerdict(
        scenario=scenario.name, seed=scenario.seed, sigma=scenario.sigma,
        tau=scenario.tau, pairing=pair_abs, sparse_form=sp, ratio=ratio,
        depth=ladder.depth, zeta=collection.zeta, theta=ladder.theta,
        maximal=use_max,
    )


def verify_sparse_linear(scenario: SparseScenario) -> SparseVerdict:
    """Ratio |<T_sigma^tau f1, f2>| / sparse form over the certified ladder."""
    return _verify_sparse(scenario, use_max=False)


def verify_sparse_maximal(scenario: SparseScenario) -> SparseVerdict:
    """Same harness with the pointwise sup over scales in the window."""
    return _verify_sparse(scenario, use_max=True)


@dataclass
class BatchSummary:
    verdicts: list[SparseVerdict]
    max_ratio: float
    median_ratio: float

    @property
    def spread(self) -> float:
        return self.max_ratio / self.median_ratio if self.median_ratio > 0 \
            else float("inf")


def sparse_batch(scenarios: Sequence[SparseScenario],
                 use_max: bool = False) -> BatchSummary:
    verdicts = [_verify_sparse(sc, use_max) for sc in scenarios]
    ratios = [v.ratio for v in verdicts if v.ratio > 0]
    if not ratios:
        return BatchSummary(verdicts, 0.0, 0.0)
    return BatchSummary(verdicts, float(max(ratios)),
                        float(np.median(ratios)))


@dataclass
class TrendResult:
    slope: float
    p_value: float

    @property
    def no_growth(self) -> bool:
        """True when the ratio shows no significant upward trend."""
        return self.slope <= 0 or self.p_value > 0.05


def ratio_trend(windows: Sequence[float], ratios: Sequence[float]) -> TrendResult:
    """Least-squares trend of sparse ratios against the truncation width."""
    x = np.asarray(windows, dtype=float)
    y = np.asarray(ratios, dtype=float)
    if x.size < 3 or np.ptp(x) == 0:
        raise ValueError("need at least 3 distinct window widths")
    if np.ptp(y) == 0:
        return TrendResult(slope=0.0, p_value=1.0)
    res = stats.linregress(x, y)
    return TrendResult(slope=float(res.slope), p_value=float(res.pvalue))


# ---------------------------------------------------------------------------
# Muckenhoupt / reverse-Holder constants and weighted norms
# ---------------------------------------------------------------------------

@dataclass
class WeightRecord:
    p: float
    q: float
    a_p: float                 # sup_B <w>_B <w^{-1/(p-1)}>_B^{p-1}
    rh_q: float                # sup_B <w>_{q,B} / <w>_{1,B}
    balls_sampled: int


def weight_constants(space: HomogeneousSpace, w, p: float, q: float,
                     max_centers: int = 64) -> WeightRecord:
    """A_p and RH_q constants over sampled dyadic balls (exact per ball)."""
    wv = _values(w).astype(float)
    if np.any(wv <= 0):
        raise ValueError("weight must be strictly positive everywhere")
    if p <= 1:
        raise ValueError(f"A_p requires p > 1, got {p}")
    s_lo = int(math.floor(math.log2(space.step)))
    s_hi = int(math.ceil(math.log2(2.0 * space.extent)))
    stride = max(1, space.npts // max_centers)
    dual_pow = -1.0 / (p - 1.0)
    a_p = 1.0
    rh_q = 1.0
    count = 0
    for s in range(s_lo, s_hi + 1):
        for c in range(0, space.npts, stride):
            B = ball_r(space, c, 2.0 ** s)
            if B.members.size == 0:
                continue
            ww = wv[B.members]
            mu = space.weights[B.members]
            m1 = float(np.sum(ww * mu)) / B.measure
            mdual = float(np.sum(ww ** dual_pow * mu)) / B.measure
            a_p = max(a_p, m1 * mdual ** (p - 1.0))
            mq = (float(np.sum(ww ** q * mu)) / B.measure) ** (1.0 / q)
            rh_q = max(rh_q, mq / m1)
            count += 1
    return WeightRecord(p=p, q=q, a_p=a_p, rh_q=rh_q, balls_sampled=count)


def weighted_norm_sample(op: TruncatedOperator, w, p: float,
                         trials: int = 16, seed: int = 0) -> float:
    """Max sampled ratio ||T f||_{L^p(w)} / ||f||_{L^p(w)} over random f."""
    space = op.family.space
    wv = _values(w).astype(float)
    if np.any(wv <= 0):
        raise ValueError("weight must be strictly positive everywhere")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        if t % 3 == 0:
            f = rng.standard_normal(space.npts)
        elif t % 3 == 1:
            f = rng.choice([-1.0, 1.0], size=space.npts)
        else:
            f = np.zeros(space.npts)
            c = int(rng.integers(0, space.npts))
            B = ball_r(space, c, 2.0 ** int(rng.integers(
                int(math.floor(math.log2(space.step))),
                int(math.ceil(math.log2(space.extent))) + 1)))
            if B.members.size == 0:
                continue
            f[B.members] = 1.0
        den = float(np.sum(np.abs(f) ** p * wv * space.weights)) ** (1.0 / p)
        if den == 0:
            continue
        g = op.apply(f)
        num = float(np.sum(np.abs(g) ** p * wv * space.weights)) ** (1.0 / p)
        worst = max(worst, num / den)
    return worst


# ---------------------------------------------------------------------------
# sharpness sweep for the 2D curve average
# ---------------------------------------------------------------------------

@dataclass
class SharpnessReport:
    deltas: list[float]
    values: list[float]            # high quantile v(delta) of T(0) 1_{B_delta}
    measures: list[float]          # superlevel measure m(delta) at v/2
    value_slope: float
    measure_slope: float


def _sharpness_at(step: float, extent: float, deltas: Sequence[float],
                  quantile: float, s_scale: int) -> SharpnessReport:
    space = build_grid_space((1.0, 2.0), step=step, extent=extent)
    meas = radon_curve_measure(2, omega="one", one_sided=True)
    family = measure_family(space, meas)
    # center the bump on the curve, 3/4 of the way along its first coordinate
    pts = meas.points
    center_vec = pts[np.argmin(np.abs(pts[:, 0] - 0.75 * pts[:, 0].max()))]
    coords = space.coords
    values, measures = [], []
    for d in deltas:
        if d < 4 * step:
            raise ValueError(f"delta {d} is below 4 grid steps ({4 * step})")
        euclid = np.linalg.norm(coords - center_vec, axis=1)
        f = (euclid < d).astype(float)
        if not f.any():
            raise ValueError(f"delta {d} ball captured no grid points")
        u = np.abs(family.apply(s_scale, f))
        nz = u[u > 0]
        if nz.size == 0:
            raise ValueError(f"delta {d}: curve average is identically zero")
        v = float(np.quantile(nz, quantile))
        m = float(space.measure(np.flatnonzero(u >= v / 2.0)))
        values.append(v)
        measures.append(m)
    ld = np.log2(np.asarray(deltas, dtype=float))
    vs = float(stats.linregress(ld, np.log2(values)).slope)
    ms = float(stats.linregress(ld, np.log2(measures)).slope)
    return SharpnessReport(deltas=list(map(float, deltas)), values=values,
                           measures=measures, value_slope=vs,
                           measure_slope=ms)


def sharpness_sweep(deltas: Sequence[float], step: float = 2.0 ** -8,
                    extent: float = 2.0, quantile: float = 0.9,
                    s_scale: int = 0, with_oracle: bool = True
                    ) -> tuple[SharpnessReport, Optional[SharpnessReport]]:
    """Power-law sweep of the curve average applied to shrinking bumps.

    For each delta, applies the single-scale 2D curve average to the
    indicator of a Euclidean delta-ball centered on the curve, records a
    high quantile v(delta) of the output and the measure m(delta) of its
    half-superlevel set, and fits log-log slopes.  The oracle repeats the
    computation by the same direct summation at half the grid step.
    """
    deltas = sorted(float(d) for d in deltas)
    if len(deltas) < 3:
        raise ValueError("need at least 3 dyadic delta values")
    main = _sharpness_at(step, extent, deltas, quantile, s_scale)
    oracle = None
    if with_oracle:
        oracle = _sharpness_at(step / 2.0, extent, deltas, quantile, s_scale)
    return main, oracle
