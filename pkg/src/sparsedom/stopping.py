"""Maximal functions and the stopping-ball construction.

The ladder of exceptional sets

    E_0 = c_o B_0,
    E_1     = { M_{p_i} f_i > 2^Theta <f_i>_{p_i, c_o B_0} },
    E_{k+1} = { x in E_k : M^{E_k, Delta}_{p_i} f_i (x)
                           > 2^Theta <f_i>_{p_i, D_2 B(x, dist(x, E_k^c)/eta)} }

is built with q-Whitney covers B_k of each E_k.  Theta is auto-tuned: it
starts at ``theta_init`` and doubles whenever measure halving, radius
halving, or non-degeneracy of a major subset fails, up to ``theta_cap``.
The certified output is a sparse collection of balls with pairwise-disjoint
major subsets E_B = B(c_B, r_B/5) \\ E_{k+1}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage, signal

from .covering import WhitneyCover, whitney_cover
from .functions import GridFunction, avg
from .space import Ball, HomogeneousSpace, ball_r, next_pow2

__all__ = [
    "StoppingConfig",
    "StoppingLadder",
    "SparseCollection",
    "maximal_fn",
    "local_maximal_fn",
    "build_stopping_ladder",
    "certify_sparse",
    "sparse_form",
]


# ---------------------------------------------------------------------------
# maximal functions over dyadic balls centered at grid points
# ---------------------------------------------------------------------------

def _ball_footprint(space: HomogeneousSpace, radius: float) -> Optional[np.ndarray]:
    """Boolean offset mask of the open rho-ball, clipped to the grid size."""
    exps = space.dilations.exponents
    axes = []
    for j, a in enumerate(exps):
        k = int(math.floor(radius ** a / space.step)) + 1
        k = min(k, space.shape[j] - 1)
        axes.append(np.arange(-k, k + 1) * space.step)
    grids = np.meshgrid(*axes, indexing="ij")
    vec = np.stack(grids, axis=-1)
    mask = space.dilations.rho(vec) < radius
    return mask if mask.any() else None


def _trim_footprint(fp: np.ndarray) -> np.ndarray:
    """Crop a footprint to the bounding box of its True entries.

    rho-balls are symmetric around the origin, so the crop keeps the
    footprint centered and the filter alignment unchanged.  In 1D the
    cropped footprint is all-True, unlocking the separable size= path.
    """
    slices = []
    for ax in range(fp.ndim):
        proj = fp.any(axis=tuple(a for a in range(fp.ndim) if a != ax))
        idx = np.flatnonzero(proj)
        slices.append(slice(idx[0], idx[-1] + 1))
    return fp[tuple(slices)]


def _ball_sum(arr: np.ndarray, fp: np.ndarray) -> np.ndarray:
    """Sum of arr over the ball footprint around each site (zero padding)."""
    fp = _trim_footprint(fp)
    if fp.all():
        # full box (always the case in 1D): separable box filter
        out = ndimage.uniform_filter(arr, size=fp.shape, mode="constant",
                                     cval=0.0) * fp.size
        return np.maximum(out, 0.0)
    if fp.size <= 4096:
        return ndimage.convolve(arr, fp.astype(float), mode="constant", cval=0.0)
    out = signal.fftconvolve(arr, fp.astype(float), mode="same")
    return np.maximum(out, 0.0)


def _ball_max(arr: np.ndarray, fp: np.ndarray) -> np.ndarray:
    """Max of arr over the ball footprint around each site (zero padding)."""
    fp = _trim_footprint(fp)
    if fp.all():
        return ndimage.maximum_filter(arr, size=fp.shape, mode="constant",
                                      cval=0.0)
    return ndimage.maximum_filter(arr, footprint=fp, mode="constant", cval=0.0)


def _ball_min(arr: np.ndarray, fp: np.ndarray) -> np.ndarray:
    """Min of arr over the ball footprint around each site (zero padding)."""
    fp = _trim_footprint(fp)
    if fp.all():
        return ndimage.minimum_filter(arr, size=fp.shape, mode="constant",
                                      cval=0.0)
    return ndimage.minimum_filter(arr, footprint=fp, mode="constant", cval=0.0)


def _scale_range(space: HomogeneousSpace) -> range:
    s_lo = int(math.floor(math.log2(space.step)))
    s_hi = int(math.ceil(math.log2(2.0 * space.extent)))
    return range(s_lo, s_hi + 1)


def maximal_fn(space: HomogeneousSpace, f, p: float = 1.0,
               ball_family: Optional[Sequence[Ball]] = None,
               s_cap: Optional[int] = None) -> GridFunction:
    """M_p f = sup_B <f>_{p, B} 1_B over dyadic balls at grid centers.

    ``s_cap`` truncates the scale range from above; callers may use it when
    averages over balls beyond that scale are provably below their
    comparison threshold (the stopping construction does).
    """
    if p < 1:
        raise ValueError(f"maximal exponent must be >= 1, got {p}")
    vals = f.values if isinstance(f, GridFunction) else np.asarray(f)
    if ball_family is not None:
        out = np.zeros(space.npts)
        for B in ball_family:
            if B.members.size == 0:
                continue
            a = avg(vals, B, p)
            np.maximum.at(out, B.members, a)
        return GridFunction(space, out)
    if space.mode != "grid":
        raise ValueError("implicit ball family requires a grid space")
    fp_arr = np.abs(vals).reshape(space.shape) ** p
    ones = np.ones(space.shape)
    out = np.zeros(space.shape)
    for s in _scale_range(space):
        if s_cap is not None and s > s_cap:
            break
        fp = _ball_footprint(space, 2.0 ** s)
        if fp is None:
            continue
        sums = _ball_sum(fp_arr, fp)
        cnts = _ball_sum(ones, fp)
        avg_s = sums / np.maximum(cnts, 1e-300)
        # x belongs to B(c, r) iff c belongs to B(x, r): max-filter with the
        # same (symmetric) footprint
        lvl = _ball_max(avg_s, fp)
        np.maximum(out, lvl, out=out)
    return GridFunction(space, out.ravel() ** (1.0 / p))


def local_maximal_fn(space: HomogeneousSpace, f, p: float,
                     omega: np.ndarray, delta: float,
                     dist_map: Optional[np.ndarray] = None) -> GridFunction:
    """Maximal function restricted to balls B with dist(B, Omega^c) >= delta r_B.

    Qualifying balls are entirely inside Omega, so the computation is cropped
    to the bounding box of Omega.  Points with no qualifying ball get 0.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    vals = f.values if isinstance(f, GridFunction) else np.asarray(f)
    omega = np.asarray(omega, dtype=np.intp)
    mask = np.zeros(space.npts, dtype=bool)
    mask[omega] = True
    if dist_map is None:
        dist_map = space.dist_to_complement(mask)
    dist_arr = dist_map.reshape(space.shape)
    mg = np.array(np.unravel_index(omega, space.shape))
    lo = mg.min(axis=1)
    hi = mg.max(axis=1) + 1
    box = tuple(slice(int(a), int(b)) for a, b in zip(lo, hi))
    sub_f = (np.abs(vals).reshape(space.shape) ** p)[box]
    sub_ones = np.ones_like(sub_f)
    sub_dist = dist_arr[box]
    out_sub = np.zeros_like(sub_f)
    max_dist = float(dist_map[omega].max())
    for s in _scale_range(space):
        r = 2.0 ** s
        if delta * r > max_dist:
            break
        fp = _ball_footprint(space, r)
        if fp is None:
            continue
        # a qualifying ball center must itself be deep inside Omega
        min_d = _ball_min(sub_dist, fp)
        valid = min_d >= delta * r
        if not valid.any():
            continue
        sums = _ball_sum(sub_f, fp)
        cnts = _ball_sum(sub_ones, fp)
        avg_s = np.where(valid, sums / np.maximum(cnts, 1e-300), 0.0)
        lvl = _ball_max(avg_s, fp)
        np.maximum(out_sub, lvl, out=out_sub)
    out = np.zeros(space.shape)
    out[box] = out_sub
    out = out.ravel() ** (1.0 / p)
    out[~mask] = 0.0
    return GridFunction(space, out)


# ---------------------------------------------------------------------------
# stopping ladders
# ---------------------------------------------------------------------------

@dataclass
class StoppingConfig:
    p1: float = 1.0
    p2: float = 1.0
    c_o: float = 4.0           # localization dilate of the operator family
    theta_init: int = 4
    theta_cap: int = 32
    q: Optional[float] = None  # containment parameter; default 10 c_d^2 c_o
    b: float = 2.0             # Proposition-dist constant (refined by measurement)
    zeta_min: float = 0.01
    max_levels: int = 40

    def resolve(self, space: HomogeneousSpace) -> tuple[float, float]:
        q = self.q if self.q is not None else 10.0 * space.c_d ** 2 * self.c_o
        if q < 10.0 * space.c_d ** 2 * self.c_o - 1e-9:
            raise ValueError(
                f"q = {q} violates q >= 10 c_d^2 c_o = "
                f"{10.0 * space.c_d ** 2 * self.c_o}"
            )
        eta = 4.0 * space.c_d ** 2 * self.b * q
        return q, eta


@dataclass(eq=False)
class StoppingLadder:
    space: HomogeneousSpace
    B0: Ball
    E0_ball: Ball                 # c_o B_0
    levels: list[np.ndarray]      # E_0, E_1, ..., E_{K+1} (index sets)
    covers: list[Optional[WhitneyCover]]  # None at level 0 and empty tail
    theta: int
    config: StoppingConfig
    q: float
    eta: float
    c_1: float
    lambda_max: float
    d2_max: float
    notes: dict = field(default_factory=dict)

    @property
    def depth(self) -> int:
        """K: the last level whose exceptional set is covered by balls."""
        return len(self.levels) - 2

    def level_balls(self, k: int) -> list[Ball]:
        if k == 0:
            return [self.E0_ball]
        cov = self.covers[k]
        return cov.balls if cov is not None else []


class LadderRetune(Exception):
    pass


def _halving_pairs_ok(space: HomogeneousSpace, prev: list[Ball],
                      new: list[Ball], c_o: float) -> bool:
    """Radius halving r_B <= r_L / 2 for every L in the previous level with
    c_o L meeting B."""
    if not prev or not new:
        return True
    stamp = np.full(space.npts, np.inf)
    for L in prev:
        mem = space.ball_members(L.center, c_o * L.radius)
        np.minimum.at(stamp, mem, L.radius)
    for B in new:
        if B.members.size == 0:
            continue
        r_L_min = float(stamp[B.members].min())
        if math.isfinite(r_L_min) and B.radius > r_L_min / 2.0 + 1e-12:
            return False
    return True


def build_stopping_ladder(space: HomogeneousSpace, f1, f2, B0: Ball,
                          config: StoppingConfig) -> StoppingLadder:
    """Construct the nested exceptional sets and their Whitney covers."""
    v1 = np.abs(f1.values if isinstance(f1, GridFunction) else np.asarray(f1))
    v2 = np.abs(f2.values if isinstance(f2, GridFunction) else np.asarray(f2))
    q, eta = config.resolve(space)
    c_o = next_pow2(config.c_o)
    E0_ball = ball_r(space, B0.center, c_o * B0.radius)
    if E0_ball.members.size == space.npts:
        raise ValueError("c_o B_0 covers the whole space; enlarge the grid")
    e0_mask = np.zeros(space.npts, dtype=bool)
    e0_mask[E0_ball.members] = True
    for i, v in enumerate((v1, v2), 1):
        if np.any(v[~e0_mask] != 0):
            raise ValueError(f"f{i} is not supported inside c_o B_0")

    # balls strictly larger than E_0 = c_o B_0 have averages at most
    # <f>_{p, E_0} (f lives in E_0), so they can never beat the threshold
    s_cap = int(math.ceil(math.log2(E0_ball.radius))) + 1
    m1 = maximal_fn(space, v1, config.p1, s_cap=s_cap).values
    m2 = maximal_fn(space, v2, config.p2, s_cap=s_cap).values

    theta = config.theta_init
    last_err = "theta cap reached"
    while theta <= config.theta_cap:
        try:
            ladder = _attempt_ladder(space, v1, v2, m1, m2, E0_ball, B0,
                                     config, q, eta, c_o, theta)
            return ladder
        except LadderRetune as exc:
            last_err = str(exc)
            theta *= 2
    raise RuntimeError(
        f"stopping ladder did not stabilise up to Theta = {config.theta_cap}: "
        f"{last_err}"
    )


def _attempt_ladder(space, v1, v2, m1, m2, E0_ball, B0, config, q, eta, c_o,
                    theta) -> StoppingLadder:
    t1 = avg(v1, E0_ball, config.p1)
    t2 = avg(v2, E0_ball, config.p2)
    exceed = np.zeros(space.npts, dtype=bool)
    mem = E0_ball.members
    exceed[mem] = (m1[mem] > 2.0 ** theta * t1) | (m2[mem] > 2.0 ** theta * t2)
    E1 = np.flatnonzero(exceed)
    levels = [E0_ball.members.copy(), E1]
    if E1.size > E0_ball.members.size / 2.0:
        raise LadderRetune(f"|E_1| = {E1.size} > |E_0|/2 at Theta={theta}")
    covers: list[Optional[WhitneyCover]] = [None]
    lam_max, d2_max, d3_max = 0.0, 1.0, 1.0
    prev_balls = [E0_ball]
    k = 1
    while levels[-1].size and k <= config.max_levels:
        Ek = levels[-1]
        cov = whitney_cover(space, Ek, q)
        covers.append(cov)
        if not _halving_pairs_ok(space, prev_balls, cov.balls, c_o):
            raise LadderRetune(f"radius halving failed at level {k}, Theta={theta}")
        rep = cov.report
        lam = rep.lambda_touch
        lam_max = max(lam_max, lam)
        d2_max = max(d2_max, rep.d2)
        d3_max = max(d3_max, rep.d3)
        delta = 2.0 * space.c_d * lam
        # local maximal functions on E_k
        mask = np.zeros(space.npts, dtype=bool)
        mask[Ek] = True
        l1 = local_maximal_fn(space, v1, config.p1, Ek, delta, cov.dist).values
        l2 = local_maximal_fn(space, v2, config.p2, Ek, delta, cov.dist).values
        nxt = []
        for x in Ek:
            r_t = rep.d2 * cov.dist[x] / eta
            tb = None
            hit = False
            for v, lm, p in ((v1, l1, config.p1), (v2, l2, config.p2)):
                if lm[x] <= 0:
                    continue
                if tb is None:
                    tb = ball_r(space, int(x), r_t)
                if lm[x] > 2.0 ** theta * avg(v, tb, p):
                    hit = True
                    break
            if hit:
                nxt.append(int(x))
        Enext = np.array(sorted(nxt), dtype=np.intp)
        if Enext.size > Ek.size / 2.0:
            raise LadderRetune(f"|E_{k+1}| > |E_{k}|/2 at Theta={theta}")
        # non-degenerate major subsets: (1/5)B must not be swallowed by E_{k+1}
        nmask = np.zeros(space.npts, dtype=bool)
        nmask[Enext] = True
        for B in cov.balls:
            fifth = space.ball_members(B.center, B.radius / 5.0)
            if fifth.size == 0 or nmask[fifth].all():
                raise LadderRetune(
                    f"empty major subset at level {k}, Theta={theta}"
                )
        levels.append(Enext)
        prev_balls = cov.balls
        # stop when radii bottom out at the grid resolution
        if max(b.radius for b in cov.balls) <= space.step and Enext.size:
            # close the ladder with a final cover for bookkeeping
            covers.append(whitney_cover(space, Enext, q) if Enext.size else None)
            break
        k += 1
    else:
        if levels[-1].size:
            raise LadderRetune("max_levels reached with a nonempty set")
        covers.append(None)
    if len(covers) < len(levels) + 0:
        covers.append(None)
    lam_max = lam_max or 2.0 * eta
    c_1 = next_pow2(max(1.0, lam_max * d3_max / eta))
    return StoppingLadder(
        space=space, B0=B0, E0_ball=E0_ball, levels=levels, covers=covers,
        theta=theta, config=config, q=q, eta=eta, c_1=c_1,
        lambda_max=lam_max, d2_max=d2_max,
    )


# ---------------------------------------------------------------------------
# sparse certification and the sparse form
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SparseCollection:
    space: HomogeneousSpace
    balls: list[Ball]
    levels: list[int]
    major_subsets: list[np.ndarray]
    zeta: float
    c_1: float

    def __len__(self) -> int:
        return len(self.balls)


def certify_sparse(ladder: StoppingLadder) -> SparseCollection:
    """Major subsets E_B = B(c_B, r_B/5) \\ E_{k+1}, checked disjoint."""
    space = ladder.space
    balls: list[Ball] = []
    levels: list[int] = []
    majors: list[np.ndarray] = []
    zeta = math.inf
    stamp = np.zeros(space.npts, dtype=np.int32)
    for k in range(ladder.depth + 1):
        nxt_mask = np.zeros(space.npts, dtype=bool)
        nxt_mask[ladder.levels[k + 1]] = True
        for B in ladder.level_balls(k):
            fifth = space.ball_members(B.center, B.radius / 5.0)
            eb = fifth[~nxt_mask[fifth]]
            if eb.size == 0:
                raise RuntimeError(
                    f"empty major subset for ball at level {k}, "
                    f"center {B.center}"
                )
            balls.append(B)
            levels.append(k)
            majors.append(eb)
            stamp[eb] += 1
            zeta = min(zeta, space.measure(eb) / B.measure)
    if int(stamp.max(initial=0)) > 1:
        raise RuntimeError("major subsets are not pairwise disjoint")
    return SparseCollection(space=space, balls=balls, levels=levels,
                            major_subsets=majors, zeta=float(zeta),
                            c_1=ladder.c_1)


def sparse_form(collection: SparseCollection, f1, f2,
                p1: float, p2: float) -> float:
    """Sum_B |B| <f1>_{p1, c_1 B} <f2>_{p2, c_1 B}."""
    v1 = f1.values if isinstance(f1, GridFunction) else np.asarray(f1)
    v2 = f2.values if isinstance(f2, GridFunction) else np.asarray(f2)
    total = 0.0
    for B in collection.balls:
        cB = ball_r(collection.space, B.center, collection.c_1 * B.radius)
        total += B.measure * avg(v1, cB, p1) * avg(v2, cB, p2)
    return float(total)
