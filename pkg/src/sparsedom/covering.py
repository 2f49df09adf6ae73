"""Covering machinery: 5R selection, Whitney-type covers, fixed-scale covers
and subordinate partitions of unity.

The Whitney construction follows the classical recipe on a finite space:
for every point x of the open set Omega take the largest dyadic radius
r(x) = 2^s with B(x, eta * r(x)) contained in Omega, run the greedy 5R
selection on the shrunken family { B(x, r(x)/5) }, and dilate the selected
balls back by 5.  All six structural properties are then *verified* on the
produced family and the sharp local constants are measured, not assumed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .space import Ball, HomogeneousSpace, ball, ball_r

__all__ = [
    "WhitneyCover",
    "WhitneyReport",
    "PartitionOfUnity",
    "five_r_cover",
    "whitney_cover",
    "verify_whitney",
    "fixed_scale_cover",
    "partition_of_unity",
    "whitney_partition",
]


# ---------------------------------------------------------------------------
# 5R covering lemma (greedy, deterministic)
# ---------------------------------------------------------------------------

def five_r_cover(space: HomogeneousSpace, balls: Sequence[Ball]) -> list[Ball]:
    """Greedy disjoint subfamily whose 5-dilates cover the input union.

    Balls are visited by decreasing radius, ties broken by the lowest center
    index; a ball is kept iff its member set avoids all previously kept
    balls.  The cover property of the 5-dilates is checked by the caller
    (``verify_whitney``) rather than assumed.
    """
    order = sorted(range(len(balls)), key=lambda i: (-balls[i].radius, balls[i].center))
    taken = np.zeros(space.npts, dtype=bool)
    selected: list[Ball] = []
    for i in order:
        B = balls[i]
        if B.members.size == 0:
            continue
        if taken[B.members].any():
            continue
        taken[B.members] = True
        selected.append(B)
    return selected


# ---------------------------------------------------------------------------
# Whitney covers
# ---------------------------------------------------------------------------

@dataclass
class WhitneyReport:
    union_equals_omega: bool
    overlap_M: int                 # max overlap of the eta-dilates
    eta_inside: bool               # eta B_j subset Omega for all j
    lambda_touch: float            # smallest uniform dilate meeting Omega^c
    radius_ratio: float            # max radius ratio of intersecting eta-dilates
    shrunk_disjoint: bool          # 1/5-shrunk balls pairwise disjoint
    dyadic: bool
    neighbor_max: int              # max #balls whose eta-dilates meet a given one
    b_fit: float = float("nan")    # eta/b <= dist(x)/r_L <= b*Lambda over qL samples
    d1: float = float("nan")       # measured nesting dilates (see dist_constants)
    d2: float = float("nan")
    d3: float = float("nan")
    witness: Optional[str] = None  # first failed property, if any

    @property
    def ok(self) -> bool:
        return (self.union_equals_omega and self.eta_inside
                and self.shrunk_disjoint and self.dyadic)


@dataclass(eq=False)
class WhitneyCover:
    space: HomogeneousSpace
    omega: np.ndarray              # sorted member indices of Omega
    eta: float
    balls: list[Ball]
    dist: np.ndarray               # d(x, Omega^c) on all points (0 off Omega)
    report: Optional[WhitneyReport] = None

    @property
    def scales(self) -> np.ndarray:
        return np.array([b.scale for b in self.balls], dtype=int)


def whitney_cover(space: HomogeneousSpace, omega: np.ndarray, eta: float,
                  verify: bool = True) -> WhitneyCover:
    """Whitney-type cover of a proper nonempty subset at inflation eta > 5.

    The per-point radius is the largest dyadic r(x) with
    B(x, 4 c_d^2 eta * r(x)) inside Omega.  The definite margin between the
    construction factor and the recorded dilate eta keeps the distance to
    the complement comparable to eta * r throughout the eta-dilates, which
    is what makes the overlap bound M and the comparability of radii of
    intersecting eta-dilates uniform in Omega (taking the radius maximal
    for the eta-dilate itself lets the dilates touch the boundary and both
    constants then degrade logarithmically in diam(Omega)/step).
    """
    if eta <= 5:
        raise ValueError(f"whitney inflation eta must exceed 5, got {eta}")
    omega = np.unique(np.asarray(omega, dtype=np.intp))
    if omega.size == 0:
        raise ValueError("Omega is empty")
    if omega.size == space.npts:
        raise ValueError("Omega must be a proper subset of the space")
    mask = np.zeros(space.npts, dtype=bool)
    mask[omega] = True
    dist = space.dist_to_complement(mask)

    # per-point largest dyadic radius with B(x, margin * eta * r) inside
    # Omega: B(x, t) subset Omega  iff  t <= d(x, Omega^c)
    margin = 4.0 * space.c_d ** 2
    s_pt = np.floor(np.log2(dist[omega] / (margin * eta)) + 1e-12).astype(int)
    shrunk = [ball_r(space, int(c), (2.0 ** s) / 5.0)
              for c, s in zip(omega, s_pt)]
    # every center belongs to its own shrunken ball (radius > 0), so the 5R
    # selection below covers all of Omega after dilation
    selected = five_r_cover(space, shrunk)
    balls = []
    for b in selected:
        s = int(round(math.log2(5.0 * b.radius)))
        balls.append(ball(space, b.center, s))
    cover = WhitneyCover(space=space, omega=omega, eta=eta, balls=balls, dist=dist)
    if verify:
        cover.report = verify_whitney(cover)
        if not cover.report.ok:
            raise RuntimeError(
                f"whitney cover failed structural property: {cover.report.witness}"
            )
    return cover


def verify_whitney(cover: WhitneyCover) -> WhitneyReport:
    """Exact containment / disjointness checks plus measured constants."""
    space, eta = cover.space, cover.eta
    omask = np.zeros(space.npts, dtype=bool)
    omask[cover.omega] = True

    # (i) exact union
    union = np.zeros(space.npts, dtype=bool)
    for b in cover.balls:
        union[b.members] = True
    union_eq = bool(np.array_equal(np.flatnonzero(union), cover.omega))

    # (v) 1/5-shrunk balls pairwise disjoint
    counts5 = np.zeros(space.npts, dtype=np.int32)
    for b in cover.balls:
        counts5[space.ball_members(b.center, b.radius / 5.0)] += 1
    shrunk_disjoint = bool(counts5.max(initial=0) <= 1)

    # (ii)+(iii)+(iv): eta-dilates
    counts = np.zeros(space.npts, dtype=np.int32)
    rmin = np.full(space.npts, np.inf)
    rmax = np.zeros(space.npts)
    eta_inside = True
    incidences: list[np.ndarray] = []
    for b in cover.balls:
        mem = space.ball_members(b.center, eta * b.radius)
        incidences.append(mem)
        counts[mem] += 1
        np.minimum.at(rmin, mem, b.radius)
        np.maximum.at(rmax, mem, b.radius)
        if not omask[mem].all():
            eta_inside = False
    overlap = int(counts.max(initial=0))
    hit = counts > 0
    ratio = float(np.max(rmax[hit] / rmin[hit])) if hit.any() else 1.0

    # finite-neighbor count: balls whose eta-dilates meet a given one
    point_ball = [[] for _ in range(space.npts)]
    for bi, mem in enumerate(incidences):
        for p in mem:
            point_ball[p].append(bi)
    nbr = [set() for _ in cover.balls]
    for lst in point_ball:
        for a in lst:
            nbr[a].update(lst)
    neighbor_max = max((len(s) for s in nbr), default=0)

    # Lambda: smallest uniform dilate whose balls all meet Omega^c;
    # Lambda * r_j > d(c_j, Omega^c) suffices (open balls)
    lam = 0.0
    for b in cover.balls:
        lam = max(lam, cover.dist[b.center] / b.radius)
    lam = math.nextafter(lam, math.inf) if lam > 0 else 2.0 * eta

    dyadic = all(b.scale is not None and b.radius == 2.0 ** b.scale
                 for b in cover.balls)

    b_fit, d1, d2, d3 = dist_constants(cover, q=2.0, lam=lam)

    witness = None
    if not union_eq:
        witness = "union of cover balls != Omega"
    elif not eta_inside:
        witness = "some eta-dilate leaves Omega"
    elif not shrunk_disjoint:
        witness = "1/5-shrunk balls overlap"
    elif not dyadic:
        witness = "non-dyadic radius in cover"
    return WhitneyReport(
        union_equals_omega=union_eq, overlap_M=overlap, eta_inside=eta_inside,
        lambda_touch=lam, radius_ratio=ratio, shrunk_disjoint=shrunk_disjoint,
        dyadic=dyadic, neighbor_max=neighbor_max,
        b_fit=b_fit, d1=d1, d2=d2, d3=d3, witness=witness,
    )


def dist_constants(cover: WhitneyCover, q: float = 2.0,
                   lam: Optional[float] = None,
                   max_balls: int = 64) -> tuple[float, float, float, float]:
    """Measure the nesting constants of the distance-comparison chain

        B(x, dist/Lambda)  in  D1 L  in  D2 B(x, dist/eta)  in  D3 (Lambda/eta) L

    for x in qL, together with b such that eta/b <= dist(x)/r_L <= b*Lambda.
    All four are sampled over the cover balls and recorded, not derived.
    """
    space, eta = cover.space, cover.eta
    if lam is None:
        lam = max((cover.dist[b.center] / b.radius for b in cover.balls),
                  default=2.0 * eta)
        lam = math.nextafter(lam, math.inf)
    b_fit, d1, d2, d3 = 1.0, 1.0, 1.0, 1.0
    step = max(1, len(cover.balls) // max_balls)
    for L in cover.balls[::step]:
        qL = space.ball_members(L.center, q * L.radius)
        # subsample the points of qL for large balls
        pts = qL[:: max(1, qL.size // 8)]
        for x in pts:
            dx = float(cover.dist[x])
            if dx <= 0:
                continue
            ratio = dx / L.radius
            b_fit = max(b_fit, eta / ratio, ratio / lam)
            inner = space.ball_members(int(x), dx / lam)
            if inner.size:
                d1 = max(d1, float(np.max(space.d(L.center, inner))) / L.radius)
        # D2, D3 use the ball centre as the sample point (one per ball)
        dc = float(cover.dist[L.center])
        d1L = space.ball_members(L.center, d1 * L.radius)
        if d1L.size:
            d2 = max(d2, float(np.max(space.d(L.center, d1L))) / (dc / eta))
        mid = space.ball_members(L.center, d2 * dc / eta)
        if mid.size:
            d3 = max(d3, float(np.max(space.d(L.center, mid))) / (lam * L.radius / eta))
    return (math.nextafter(b_fit, math.inf), math.nextafter(d1, math.inf),
            math.nextafter(d2, math.inf), math.nextafter(d3, math.inf))


# ---------------------------------------------------------------------------
# fixed-scale covers of a host ball
# ---------------------------------------------------------------------------

@dataclass
class FixedScaleReport:
    covers: bool
    c1_containment: float  # smallest dilate of the host containing all pieces
    overlap: int


def fixed_scale_cover(space: HomogeneousSpace, host: Ball, s: int
                      ) -> tuple[list[Ball], FixedScaleReport]:
    """Cover of a host ball by balls of a single dyadic radius 2^s.

    Built by 5R selection on { B(x, 2^s / 5) : x in host } and dilation by 5.
    """
    if host.members.size == 0:
        raise ValueError("host ball is empty")
    r = 2.0 ** s
    if r > host.radius:
        raise ValueError(f"cover scale 2^{s} exceeds the host radius {host.radius}")
    cand = [ball_r(space, int(c), r / 5.0) for c in host.members]
    selected = five_r_cover(space, cand)
    pieces = [ball(space, b.center, int(s)) for b in selected]
    covered = np.zeros(space.npts, dtype=bool)
    counts = np.zeros(space.npts, dtype=np.int32)
    far = 0.0
    for p in pieces:
        covered[p.members] = True
        counts[p.members] += 1
        if p.members.size:
            dd = float(np.max(space.d(host.center, p.members)))
            far = max(far, dd / host.radius)
    covers = bool(covered[host.members].all())
    report = FixedScaleReport(
        covers=covers,
        c1_containment=max(1.0, math.nextafter(far, math.inf)),
        overlap=int(counts.max(initial=0)),
    )
    if not covers:
        raise RuntimeError("fixed-scale cover failed to cover the host ball")
    return pieces, report


# ---------------------------------------------------------------------------
# partitions of unity
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class PartitionOfUnity:
    """Sparse representation: per piece, member indices and values there."""

    space: HomogeneousSpace
    balls: list[Ball]
    members: list[np.ndarray]
    values: list[np.ndarray]
    theta: float          # measured lower bound of psi on the core dilate
    lipschitz: float      # measured discrete Lipschitz constant (grids)

    def dense(self, i: int) -> np.ndarray:
        out = np.zeros(self.space.npts)
        out[self.members[i]] = self.values[i]
        return out

    def apply_to(self, i: int, f: np.ndarray) -> np.ndarray:
        """f * psi_i as a full-length array."""
        out = np.zeros_like(f, dtype=np.result_type(f, float))
        out[self.members[i]] = f[self.members[i]] * self.values[i]
        return out

    def sum_check(self, region: np.ndarray) -> float:
        total = np.zeros(self.space.npts)
        for mem, val in zip(self.members, self.values):
            total[mem] += val
        return float(np.max(np.abs(total[region] - 1.0))) if region.size else 0.0


def _bump_partition(space: HomogeneousSpace, balls: list[Ball],
                    supports: list[np.ndarray], radii: list[float],
                    region: np.ndarray) -> PartitionOfUnity:
    """Normalised tent bumps b(x) = max(0, 1 - d(x, c)/r) on given supports."""
    total = np.zeros(space.npts)
    raw: list[np.ndarray] = []
    for B, sup, r in zip(balls, supports, radii):
        vals = np.maximum(0.0, 1.0 - np.asarray(space.d(B.center, sup)) / r)
        raw.append(vals)
        total[sup] += vals
    reg_mask = np.zeros(space.npts, dtype=bool)
    reg_mask[region] = True
    if region.size and np.any(total[region] <= 0):
        raise RuntimeError("partition of unity has an uncovered point in the region")
    values = []
    members = []
    for sup, vals in zip(supports, raw):
        keep = vals > 0
        mem = sup[keep]
        members.append(mem)
        values.append(vals[keep] / total[mem])
    # measured lower bound on the core balls
    theta = math.inf
    dense_cache = None
    for B, mem, val in zip(balls, members, values):
        core = np.intersect1d(B.members, region, assume_unique=False)
        if core.size == 0:
            continue
        dense_cache = np.zeros(space.npts)
        dense_cache[mem] = val
        theta = min(theta, float(dense_cache[core].min()))
    if not math.isfinite(theta):
        theta = 0.0
    # discrete Lipschitz constant along grid axes
    lip = 0.0
    if space.mode == "grid":
        for B, mem, val in zip(balls, members, values):
            dense = np.zeros(space.npts)
            dense[mem] = val
            arr = dense.reshape(space.shape)
            for ax in range(len(space.shape)):
                d1 = np.abs(np.diff(arr, axis=ax)).max(initial=0.0)
                lip = max(lip, d1 / space.step)
    return PartitionOfUnity(space=space, balls=balls, members=members,
                            values=values, theta=theta, lipschitz=lip)


def partition_of_unity(space: HomogeneousSpace, pieces: list[Ball], s: int,
                       c2: float = 2.0) -> PartitionOfUnity:
    """Partition subordinate to a fixed-scale cover, supports in c2-dilates."""
    if c2 < 1:
        raise ValueError(f"support dilate c2 must be >= 1, got {c2}")
    region = np.unique(np.concatenate([p.members for p in pieces]))
    supports = [space.ball_members(p.center, c2 * p.radius) for p in pieces]
    radii = [c2 * p.radius for p in pieces]
    return _bump_partition(space, pieces, supports, radii, region)


def whitney_partition(space: HomogeneousSpace, balls: list[Ball]) -> PartitionOfUnity:
    """Partition with supp(phi_B) inside B itself (needed for exact
    reconstruction and telescoping identities over Whitney covers)."""
    region = np.unique(np.concatenate([b.members for b in balls])) if balls \
        else np.empty(0, dtype=np.intp)
    supports = [b.members for b in balls]
    radii = [b.radius for b in balls]
    return _bump_partition(space, balls, supports, radii, region)
