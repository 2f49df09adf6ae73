"""Finite models of quasi-metric measure spaces of homogeneous type.

Two concrete flavours are supported:

* ``grid`` -- an anisotropic lattice in R^n carrying the homogeneous
  quasi-norm rho(x) = (sum_j |x_j|^(2/a_j))^(1/2) induced by a one-parameter
  dilation group with exponents a_j > 0, counting measure weighted by the
  cell volume step^n;
* ``cloud`` -- an arbitrary finite point set given by an explicit symmetric
  distance table and positive point weights.

Balls are always *open*: B(x, r) = { y : d(x, y) < r }.  Radii of record are
dyadic, 2^s with integer s, but internal helpers accept arbitrary positive
radii (dilated balls need them).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "DilationGroup",
    "HomogeneousSpace",
    "Ball",
    "DoublingReport",
    "build_grid_space",
    "build_cloud_space",
    "load_cloud_csv",
    "ball",
    "doubling_diagnostics",
    "check_geometric_doubling",
    "next_pow2",
]


def next_pow2(x: float) -> float:
    """Smallest power of two >= x (x > 0)."""
    if x <= 0:
        raise ValueError(f"next_pow2 needs x > 0, got {x}")
    return 2.0 ** math.ceil(math.log2(x) - 1e-12)


# ---------------------------------------------------------------------------
# dilations and the homogeneous quasi-norm
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DilationGroup:
    """One-parameter group delta_t(x) = (t^(a_1) x_1, ..., t^(a_n) x_n)."""

    exponents: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.exponents) == 0:
            raise ValueError("dilation group needs at least one exponent")
        if any(a <= 0 for a in self.exponents):
            raise ValueError(f"dilation exponents must be positive: {self.exponents}")

    @property
    def ndim(self) -> int:
        return len(self.exponents)

    @property
    def homogeneous_dimension(self) -> float:
        return float(sum(self.exponents))

    def apply(self, t: float, x: np.ndarray) -> np.ndarray:
        """delta_t acting on row vectors (last axis indexes coordinates)."""
        if t <= 0:
            raise ValueError(f"dilation parameter must be positive, got {t}")
        exps = np.asarray(self.exponents, dtype=float)
        return np.asarray(x, dtype=float) * t ** exps

    def rho(self, x: np.ndarray) -> np.ndarray:
        """Homogeneous quasi-norm, vectorised over leading axes."""
        x = np.asarray(x, dtype=float)
        exps = np.asarray(self.exponents, dtype=float)
        return np.sqrt(np.sum(np.abs(x) ** (2.0 / exps), axis=-1))


# ---------------------------------------------------------------------------
# the space
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class HomogeneousSpace:
    """A finite weighted quasi-metric space.

    ``weights[i]`` is the measure of point i.  For grids the geometry is
    implicit (regular lattice); for clouds the full distance table is stored.
    """

    mode: str                                  # "grid" | "cloud"
    weights: np.ndarray                        # (npts,)
    c_d: float                                 # quasi-triangle constant (measured)
    coords: Optional[np.ndarray] = None        # (npts, n) for grids
    dilations: Optional[DilationGroup] = None
    step: Optional[float] = None
    extent: Optional[float] = None
    shape: Optional[tuple[int, ...]] = None
    axis_coords: Optional[tuple[np.ndarray, ...]] = None
    dist_table: Optional[np.ndarray] = None    # (npts, npts) for clouds

    # -- basic accessors ----------------------------------------------------

    @property
    def npts(self) -> int:
        return int(self.weights.shape[0])

    @property
    def ndim(self) -> int:
        if self.mode == "grid":
            return len(self.shape)  # type: ignore[arg-type]
        return 0

    @property
    def total_measure(self) -> float:
        return float(self.weights.sum())

    def measure(self, idx: np.ndarray) -> float:
        if self.mode == "grid":
            # uniform weights: avoid fancy indexing on large index sets
            return float(self.weights[0]) * int(np.size(idx))
        return float(self.weights[np.asarray(idx, dtype=np.intp)].sum())

    # -- metric --------------------------------------------------------------

    def d(self, i: int, j) -> np.ndarray | float:
        """Quasi-distance from point i to point(s) j."""
        if self.mode == "cloud":
            return self.dist_table[i, j]
        diff = self.coords[j] - self.coords[i]
        return self.dilations.rho(diff)

    # -- grid index helpers ---------------------------------------------------

    def multi_index(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in np.unravel_index(i, self.shape))

    def flat_index(self, mi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(mi, self.shape))

    # -- balls ----------------------------------------------------------------

    def ball_members(self, center: int, radius: float) -> np.ndarray:
        """Indices of the open ball B(center, radius)."""
        if radius <= 0:
            raise ValueError(f"ball radius must be positive, got {radius}")
        if self.mode == "cloud":
            return np.flatnonzero(self.dist_table[center] < radius)
        return self._grid_ball(center, radius)

    def _grid_ball(self, center: int, radius: float) -> np.ndarray:
        exps = self.dilations.exponents
        mi = np.unravel_index(center, self.shape)
        cc = [self.axis_coords[j][mi[j]] for j in range(len(self.shape))]
        windows = []
        for j, a in enumerate(exps):
            w = radius ** a
            ax = self.axis_coords[j]
            lo = int(np.searchsorted(ax, cc[j] - w, side="right"))
            hi = int(np.searchsorted(ax, cc[j] + w, side="left"))
            # box prune may include the boundary; the exact rho test below
            # enforces strict inequality
            lo = max(lo - 1, 0)
            hi = min(hi + 1, len(ax))
            if lo >= hi:
                return np.empty(0, dtype=np.intp)
            windows.append(np.arange(lo, hi))
        grids = np.meshgrid(*windows, indexing="ij")
        diffs = np.stack(
            [self.axis_coords[j][grids[j]] - cc[j] for j in range(len(self.shape))],
            axis=-1,
        )
        mask = self.dilations.rho(diffs) < radius
        if not mask.any():
            return np.empty(0, dtype=np.intp)
        sel = [g[mask] for g in grids]
        return np.ravel_multi_index(sel, self.shape).astype(np.intp)

    def ball_escapes(self, center: int, radius: float) -> bool:
        """True when the bounding box of B(center, radius) leaves the grid."""
        if self.mode == "cloud":
            return bool(np.max(self.dist_table[center]) < radius)
        mi = np.unravel_index(center, self.shape)
        for j, a in enumerate(self.dilations.exponents):
            w = radius ** a
            c = self.axis_coords[j][mi[j]]
            if c - w < self.axis_coords[j][0] or c + w > self.axis_coords[j][-1]:
                return True
        return False

    # -- distance to a complement ---------------------------------------------

    def dist_to_complement(self, omega_mask: np.ndarray) -> np.ndarray:
        """For each point of Omega, d(x, Omega^c); zero on the complement.

        Grid path: the nearest complement point can always be taken on the
        inner boundary of Omega^c (rho is monotone in each coordinate
        difference), so only boundary targets are scanned.
        """
        omega_mask = np.asarray(omega_mask, dtype=bool)
        if omega_mask.all():
            raise ValueError("Omega must be a proper subset (complement empty)")
        if not omega_mask.any():
            raise ValueError("Omega must be nonempty")
        if self.mode == "cloud":
            comp = np.flatnonzero(~omega_mask)
            out = np.zeros(self.npts)
            om = np.flatnonzero(omega_mask)
            out[om] = self.dist_table[np.ix_(om, comp)].min(axis=1)
            return out

        m = omega_mask.reshape(self.shape)
        comp = ~m
        # inner boundary of the complement: complement sites with an axis
        # neighbour inside Omega (wrap-free shifts)
        boundary = np.zeros_like(comp)
        for ax in range(len(self.shape)):
            sl_lo = [slice(None)] * len(self.shape)
            sl_hi = [slice(None)] * len(self.shape)
            sl_lo[ax] = slice(None, -1)
            sl_hi[ax] = slice(1, None)
            boundary[tuple(sl_lo)] |= comp[tuple(sl_lo)] & m[tuple(sl_hi)]
            boundary[tuple(sl_hi)] |= comp[tuple(sl_hi)] & m[tuple(sl_lo)]
        tgt_idx = np.flatnonzero(boundary.ravel())
        om_idx = np.flatnonzero(omega_mask)
        out = np.zeros(self.npts)
        if tgt_idx.size == 0:
            # complement entirely disconnected from Omega along axes can not
            # happen on a full lattice, but guard anyway
            tgt_idx = np.flatnonzero(~omega_mask)
        tgt = self.coords[tgt_idx]
        chunk = max(1, int(4_000_000 // max(1, tgt_idx.size)))
        for start in range(0, om_idx.size, chunk):
            blk = om_idx[start:start + chunk]
            diff = self.coords[blk][:, None, :] - tgt[None, :, :]
            out[blk] = self.dilations.rho(diff).min(axis=1)
        return out


@dataclass(eq=False)
class Ball:
    """An open ball together with its member indices and measure."""

    space: HomogeneousSpace
    center: int
    radius: float
    members: np.ndarray
    measure: float
    scale: Optional[int] = None   # radius == 2**scale when dyadic

    def dilate(self, alpha: float) -> "Ball":
        if alpha <= 0:
            raise ValueError(f"dilation factor must be positive, got {alpha}")
        r = alpha * self.radius
        members = self.space.ball_members(self.center, r)
        return Ball(
            space=self.space,
            center=self.center,
            radius=r,
            members=members,
            measure=self.space.measure(members),
            scale=None,
        )


def ball(space: HomogeneousSpace, center: int, s: int) -> Ball:
    """Dyadic ball B(center, 2^s)."""
    if not (0 <= center < space.npts):
        raise ValueError(f"center index {center} out of range")
    r = 2.0 ** s
    members = space.ball_members(center, r)
    return Ball(space=space, center=center, radius=r, members=members,
                measure=space.measure(members), scale=int(s))


def ball_r(space: HomogeneousSpace, center: int, radius: float) -> Ball:
    """Ball with an arbitrary positive radius (dilates, threshold balls)."""
    members = space.ball_members(center, radius)
    return Ball(space=space, center=center, radius=radius, members=members,
                measure=space.measure(members), scale=None)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _measure_quasi_triangle(coords: np.ndarray, dil: DilationGroup,
                            samples: int = 4000) -> float:
    rng = np.random.default_rng(20260823)
    n = coords.shape[0]
    i = rng.integers(0, n, samples)
    j = rng.integers(0, n, samples)
    k = rng.integers(0, n, samples)
    ok = (i != j) & (i != k) & (j != k)
    i, j, k = i[ok], j[ok], k[ok]
    dij = dil.rho(coords[i] - coords[j])
    dik = dil.rho(coords[i] - coords[k])
    dkj = dil.rho(coords[k] - coords[j])
    denom = dik + dkj
    ratio = np.max(dij / np.maximum(denom, 1e-300))
    return float(ratio)


def build_grid_space(
    exponents: Sequence[float],
    step: float,
    extent: float,
    max_sites: int = 2 ** 22,
) -> HomogeneousSpace:
    """Regular lattice { step * k : |step * k| <= extent }^n with the
    anisotropic quasi-norm of ``exponents`` and measure step^n per site."""
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if extent <= step:
        raise ValueError(f"extent ({extent}) must exceed the step ({step})")
    dil = DilationGroup(tuple(float(a) for a in exponents))
    m = int(math.floor(extent / step + 1e-9))
    axis = np.arange(-m, m + 1, dtype=float) * step
    n = dil.ndim
    npts = len(axis) ** n
    if npts > max_sites:
        raise ValueError(
            f"grid would have {npts} sites, exceeding the budget {max_sites}"
        )
    shape = (len(axis),) * n
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    coords = np.stack([g.ravel() for g in mesh], axis=-1)
    weights = np.full(npts, step ** n)
    # measured quasi-triangle constant, floored at 1; a 1% safety factor is
    # applied only when the sampled value genuinely exceeds 1
    c_meas = _measure_quasi_triangle(coords[:: max(1, npts // 2048)], dil)
    c_d = 1.01 * c_meas if c_meas > 1.0 + 1e-9 else 1.0
    return HomogeneousSpace(
        mode="grid", weights=weights, c_d=c_d, coords=coords, dilations=dil,
        step=step, extent=extent, shape=shape,
        axis_coords=tuple([axis.copy() for _ in range(n)]),
    )


def build_cloud_space(
    dist_table: np.ndarray,
    weights: np.ndarray,
    c_d: Optional[float] = None,
) -> HomogeneousSpace:
    """Space from an explicit distance table and point weights."""
    dist_table = np.asarray(dist_table, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n = dist_table.shape[0]
    if dist_table.shape != (n, n):
        raise ValueError(f"distance table must be square, got {dist_table.shape}")
    if weights.shape != (n,):
        raise ValueError("weights length does not match the table")
    if np.any(weights <= 0):
        raise ValueError("point weights must be positive")
    if np.any(np.abs(np.diag(dist_table)) > 0):
        raise ValueError("distance table has a nonzero diagonal")
    if not np.allclose(dist_table, dist_table.T, rtol=0, atol=1e-12):
        raise ValueError("distance table is not symmetric")
    off = dist_table[~np.eye(n, dtype=bool)]
    if np.any(off <= 0):
        raise ValueError("off-diagonal distances must be positive")
    # measure the quasi-triangle constant over all (or sampled) triples
    best = 1.0
    if n <= 80:
        d = dist_table
        for k in range(n):
            denom = d[:, k][:, None] + d[k, :][None, :]
            np.fill_diagonal(denom, np.inf)
            denom[k, :] = np.inf
            denom[:, k] = np.inf
            with np.errstate(invalid="ignore"):
                best = max(best, float(np.nanmax(d / np.maximum(denom, 1e-300))))
    else:
        rng = np.random.default_rng(7)
        for _ in range(20000):
            i, j, k = rng.integers(0, n, 3)
            if len({int(i), int(j), int(k)}) < 3:
                continue
            best = max(best, dist_table[i, j] / (dist_table[i, k] + dist_table[k, j]))
    measured = max(1.0, best)
    if c_d is not None and c_d < measured - 1e-9:
        raise ValueError(
            f"declared c_d={c_d} is below the measured value {measured:.6g}"
        )
    return HomogeneousSpace(
        mode="cloud", weights=weights, c_d=(c_d if c_d else measured),
        dist_table=dist_table,
    )


def load_cloud_csv(metric_path: str, weights_path: str) -> HomogeneousSpace:
    """Cloud ingestion: metric CSV with header ``i,j,d`` and weights CSV
    with header ``i,w``."""
    import csv

    entries = {}
    nmax = -1
    with open(metric_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["i", "j", "d"]:
            raise ValueError(f"metric CSV must have header i,j,d, got {reader.fieldnames}")
        for row in reader:
            i, j, d = int(row["i"]), int(row["j"]), float(row["d"])
            entries[(i, j)] = d
            nmax = max(nmax, i, j)
    n = nmax + 1
    table = np.zeros((n, n))
    for (i, j), d in entries.items():
        table[i, j] = d
        if (j, i) not in entries:
            table[j, i] = d
    w = np.zeros(n)
    seen = np.zeros(n, dtype=bool)
    with open(weights_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["i", "w"]:
            raise ValueError(f"weights CSV must have header i,w, got {reader.fieldnames}")
        for row in reader:
            i = int(row["i"])
            w[i] = float(row["w"])
            seen[i] = True
    if not seen.all():
        raise ValueError(f"weights CSV missing {int((~seen).sum())} point(s)")
    return build_cloud_space(table, w)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass
class DoublingReport:
    beta: float            # measure-doubling constant sup |2B| / |B|
    alpha_fit: float       # least-squares slope of log|B(x, r)| vs log r
    delta_lower: float     # lower-regularity constant in |B'|/|B| >= D (r'/r)^d
    delta_exp: float       # ... and its exponent d
    samples: int
    excluded: int          # balls skipped because their box escaped the grid


def doubling_diagnostics(
    space: HomogeneousSpace,
    sample_size: int = 64,
    rng: Optional[np.random.Generator] = None,
) -> DoublingReport:
    """Sampled doubling / regularity constants.

    Balls whose doubled bounding box escapes the ambient extent are excluded
    (their boundary clipping would bias the ratios); the count is reported.
    """
    rng = rng or np.random.default_rng(0)
    if space.mode == "grid":
        r_lo = 2.0 * space.step
        r_hi = (space.extent or 1.0) / 4.0
    else:
        off = space.dist_table[~np.eye(space.npts, dtype=bool)]
        r_lo, r_hi = 2.0 * float(off.min()), float(off.max()) / 4.0
    if r_hi <= r_lo:
        r_hi = 2.0 * r_lo
    beta = 0.0
    excluded = 0
    logs_r, logs_mu = [], []
    ratios = []  # (log(r'/r), log(|B'|/|B|)) for nested pairs
    used = 0
    for _ in range(sample_size * 4):
        if used >= sample_size:
            break
        c = int(rng.integers(0, space.npts))
        r = float(np.exp(rng.uniform(np.log(r_lo), np.log(r_hi))))
        if space.mode == "grid" and space.ball_escapes(c, 2.0 * r):
            excluded += 1
            continue
        B = ball_r(space, c, r)
        if B.measure <= 0:
            continue
        B2 = ball_r(space, c, 2.0 * r)
        beta = max(beta, B2.measure / B.measure)
        logs_r.append(math.log(r))
        logs_mu.append(math.log(B.measure))
        rp = r / 2 ** rng.uniform(0.5, 2.0)
        if rp > r_lo / 2:
            Bp = ball_r(space, c, rp)
            if Bp.measure > 0:
                ratios.append((math.log(rp / r), math.log(Bp.measure / B.measure)))
        used += 1
    if used < 4:
        raise ValueError("too few usable sample balls for doubling diagnostics")
    alpha_fit = float(np.polyfit(logs_r, logs_mu, 1)[0])
    if ratios:
        xs = np.array([a for a, _ in ratios])
        ys = np.array([b for _, b in ratios])
        # lower envelope: exponent from the worst-case nested ratios
        delta_exp = float(np.polyfit(xs, ys, 1)[0])
        delta_lower = float(np.exp(np.min(ys - delta_exp * xs)))
    else:
        delta_exp, delta_lower = float("nan"), float("nan")
    return DoublingReport(
        beta=float(beta), alpha_fit=alpha_fit, delta_lower=delta_lower,
        delta_exp=delta_exp, samples=used, excluded=excluded,
    )


def check_geometric_doubling(
    space: HomogeneousSpace,
    s_values: Sequence[int],
    samples: int = 32,
    rng: Optional[np.random.Generator] = None,
) -> int:
    """Largest number of half-radius balls a greedy cover needs for a sampled
    dyadic ball (geometric doubling constant N)."""
    rng = rng or np.random.default_rng(0)
    worst = 0
    for s in s_values:
        for _ in range(samples):
            c = int(rng.integers(0, space.npts))
            B = ball(space, c, int(s))
            if B.members.size == 0:
                continue
            uncovered = np.ones(space.npts, dtype=bool)
            count = 0
            rem = B.members[uncovered[B.members]]
            while rem.size:
                p = int(rem[0])
                half = space.ball_members(p, B.radius / 2.0)
                uncovered[half] = False
                uncovered[p] = False
                count += 1
                rem = B.members[uncovered[B.members]]
            worst = max(worst, count)
    return worst
