"""Single-scale operator families on a finite homogeneous space.

Three families are provided:

* ``cz_family``     -- annulus truncations of a Calderon-Zygmund kernel,
                       T(s) f(x) = sum_{2^s <= d(x,y) < 2^(s+1)} K(x,y) f(y) mu(y);
* ``measure_family``-- convolution with the dilates of a compactly supported
                       finite measure, T(s) f = f * mu_s, realised on grids by
                       snapping the dilated support points to lattice offsets;
* ``geometric_smoothing_family`` -- positive local averaging built from a
                       fixed-scale cover and a subordinate partition of unity.

``truncate`` sums a family over a scale window (empty windows give the zero
operator) and ``maximal`` takes the pointwise sup of |T(s) f| instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .space import Ball, HomogeneousSpace, ball_r, next_pow2

__all__ = [
    "CZKernel",
    "DiscreteMeasure",
    "SingleScaleFamily",
    "TruncatedOperator",
    "cz_family",
    "measure_family",
    "geometric_smoothing_family",
    "truncate",
    "maximal",
    "adjoint",
    "check_localization",
    "fourier_transform",
    "radon_curve_measure",
    "circle_measure",
    "point_mass_measure",
    "hilbert_kernel",
]


# ---------------------------------------------------------------------------
# grid shift helper
# ---------------------------------------------------------------------------

def _shift_slices(shape: tuple[int, ...], dv: Sequence[int]):
    """Slices (dst, src) with dst_index = src_index + dv, zero padding."""
    dst, src = [], []
    for n, d in zip(shape, dv):
        d = int(d)
        if abs(d) >= n:
            return None
        if d >= 0:
            dst.append(slice(d, n))
            src.append(slice(0, n - d))
        else:
            dst.append(slice(0, n + d))
            src.append(slice(-d, n))
    return tuple(dst), tuple(src)


# ---------------------------------------------------------------------------
# kernels and measures
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class CZKernel:
    """Kernel K(x, y); ``profile`` takes coordinate arrays of shape (m, n).

    When ``translation_invariant`` is set, ``profile`` is called once per
    offset with a single difference vector, which makes grid application
    O(#offsets) instead of O(#offsets * #points).
    """

    profile: Callable[[np.ndarray, np.ndarray], np.ndarray]
    translation_invariant: bool = False
    name: str = "kernel"


def hilbert_kernel() -> CZKernel:
    """K(x, y) = 1 / (x - y) in one dimension."""

    def prof(x, y):
        return 1.0 / (x[..., 0] - y[..., 0])

    return CZKernel(profile=prof, translation_invariant=True, name="hilbert")


@dataclass(eq=False)
class DiscreteMeasure:
    """Finite measure sum_k mass_k * delta(x - point_k), support in the unit
    rho-ball.  Convolution families additionally require total variation at
    most 1 (checked by ``measure_family``, where it buys the exact L^inf
    bound of the maximal truncation)."""

    points: np.ndarray     # (m, n) coordinates at unit scale
    masses: np.ndarray     # (m,) possibly complex
    exponents: tuple[float, ...]
    name: str = "measure"

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.masses = np.asarray(self.masses)
        if self.points.shape[0] != self.masses.shape[0]:
            raise ValueError("points / masses length mismatch")
        exps = np.asarray(self.exponents, dtype=float)
        rho = np.sqrt(np.sum(np.abs(self.points) ** (2.0 / exps), axis=-1))
        if rho.size and float(rho.max()) >= 1.0:
            raise ValueError(
                f"measure support must lie in the open unit rho-ball "
                f"(max rho = {float(rho.max()):.6g})"
            )
        self.total_variation = float(np.sum(np.abs(self.masses)))

    @property
    def total_mass(self) -> complex:
        return complex(np.sum(self.masses))

    @property
    def cancellative(self) -> bool:
        return abs(self.total_mass) <= 1e-10 * max(self.total_variation, 1e-300)

    def reflected_conjugate(self) -> "DiscreteMeasure":
        return DiscreteMeasure(points=-self.points, masses=np.conj(self.masses),
                               exponents=self.exponents, name=self.name + "*")


def fourier_transform(measure: DiscreteMeasure, xi: np.ndarray) -> np.ndarray:
    """mhat(xi) = sum_k mass_k exp(-i xi . x_k), xi of shape (..., n)."""
    xi = np.asarray(xi, dtype=float)
    phase = xi @ measure.points.T                       # (..., m)
    return np.exp(-1j * phase) @ measure.masses


# ---------------------------------------------------------------------------
# canonical measures
# ---------------------------------------------------------------------------

def _taper(u: np.ndarray) -> np.ndarray:
    """Smooth cutoff: 0 off [1/2, 4], 1 on [1, 2], cosine ramps between."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    up = (u >= 0.5) & (u < 1.0)
    out[up] = np.sin(np.pi * (u[up] - 0.5)) ** 2
    mid = (u >= 1.0) & (u <= 2.0)
    out[mid] = 1.0
    dn = (u > 2.0) & (u <= 4.0)
    out[dn] = np.cos(np.pi * (u[dn] - 2.0) / 4.0) ** 2
    return out


def radon_curve_measure(
    d: int,
    omega: str | Callable[[np.ndarray], np.ndarray] = "sign",
    n_quad: int = 2048,
    one_sided: bool = False,
) -> DiscreteMeasure:
    """Arc measure on the monomial curve gamma(t) = (t, t^2, ..., t^d)
    with density Omega(t) psi(|t|) / |t| dt, rescaled by a dyadic dilation so
    the support sits inside the open unit rho-ball, and normalised to total
    variation 1.  ``omega``: "sign" (cancellative), "one", or a callable.
    """
    if d < 1:
        raise ValueError(f"curve degree must be >= 1, got {d}")
    if omega == "sign":
        om = np.sign
    elif omega == "one":
        om = lambda t: np.ones_like(t)
    elif callable(omega):
        om = omega
    else:
        raise ValueError(f"unknown angular part {omega!r}")
    lo = 0.5 if one_sided else -4.0
    ts = np.linspace(lo, 4.0, n_quad)
    dt = ts[1] - ts[0]
    w = om(ts) * _taper(np.abs(ts)) / np.maximum(np.abs(ts), 1e-300) * dt
    keep = np.abs(w) > 0
    ts, w = ts[keep], w[keep]
    pts = np.stack([ts ** (j + 1) for j in range(d)], axis=-1)
    exps = tuple(float(j + 1) for j in range(d))
    # dyadic rescale into the unit ball: rho(gamma(t)) = sqrt(d) |t|
    lam = 1.0
    earr = np.asarray(exps)
    while True:
        scaled = pts * lam ** earr
        rho = np.sqrt(np.sum(np.abs(scaled) ** (2.0 / earr), axis=-1))
        if float(rho.max()) < 0.999:
            break
        lam /= 2.0
    w = w / np.sum(np.abs(w))
    name = f"radon-curve-d{d}-{getattr(om, '__name__', 'omega')}"
    return DiscreteMeasure(points=scaled, masses=w, exponents=exps, name=name)


def circle_measure(n_quad: int = 1024) -> DiscreteMeasure:
    """Normalised arc-length measure on the circle of radius 1/2 in R^2."""
    th = np.arange(n_quad) * (2.0 * np.pi / n_quad)
    pts = 0.5 * np.stack([np.cos(th), np.sin(th)], axis=-1)
    masses = np.full(n_quad, 1.0 / n_quad)
    return DiscreteMeasure(points=pts, masses=masses, exponents=(1.0, 1.0),
                           name="circle")


def point_mass_measure(n: int, exponents: Optional[Sequence[float]] = None
                       ) -> DiscreteMeasure:
    """Unit point mass at the origin; its family is the identity at every
    scale (the flattest possible Fourier envelope)."""
    exps = tuple(exponents) if exponents else tuple(1.0 for _ in range(n))
    return DiscreteMeasure(points=np.zeros((1, n)), masses=np.array([1.0]),
                           exponents=exps, name="point-mass")


# ---------------------------------------------------------------------------
# single-scale families
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SingleScaleFamily:
    space: HomogeneousSpace
    s_min: int
    s_max: int
    c_o: float                     # declared localization dilate
    kind: str                      # "cz" | "measure" | "smoothing"
    _apply: Callable[[int, np.ndarray], np.ndarray] = None
    _make_adjoint: Callable[[], "SingleScaleFamily"] = None
    meta: dict = field(default_factory=dict)

    def apply(self, s: int, values: np.ndarray) -> np.ndarray:
        if not (self.s_min <= s <= self.s_max):
            raise ValueError(
                f"scale {s} outside the family range [{self.s_min}, {self.s_max}]"
            )
        return self._apply(int(s), np.asarray(values))


def adjoint(family: SingleScaleFamily) -> SingleScaleFamily:
    """Adjoint family for the weighted sesquilinear pairing."""
    return family._make_adjoint()


# -- CZ annulus truncations -------------------------------------------------

def _annulus_offsets(space: HomogeneousSpace, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid index offsets dv with 2^s <= rho(dv * step) < 2^(s+1), plus the
    coordinate offsets.  Cached on the space via a private attribute."""
    cache = getattr(space, "_annulus_cache", None)
    if cache is None:
        cache = {}
        space._annulus_cache = cache
    if s in cache:
        return cache[s]
    r_hi = 2.0 ** (s + 1)
    exps = space.dilations.exponents
    axes = []
    for a in exps:
        k = int(math.floor(r_hi ** a / space.step)) + 1
        axes.append(np.arange(-k, k + 1))
    grids = np.meshgrid(*axes, indexing="ij")
    dv = np.stack([g.ravel() for g in grids], axis=-1)
    vec = dv * space.step
    rho = space.dilations.rho(vec)
    mask = (rho >= 2.0 ** s) & (rho < r_hi)
    cache[s] = (dv[mask], vec[mask])
    return cache[s]


def cz_family(space: HomogeneousSpace, kernel: CZKernel,
              s_min: Optional[int] = None, s_max: Optional[int] = None
              ) -> SingleScaleFamily:
    """Annulus truncations of a kernel; the adjoint swaps and conjugates."""
    if space.mode == "grid":
        if s_min is None:
            s_min = int(math.floor(math.log2(space.step)))
        if s_max is None:
            s_max = int(math.ceil(math.log2(2.0 * space.extent)))
    else:
        off = space.dist_table[~np.eye(space.npts, dtype=bool)]
        if s_min is None:
            s_min = int(math.floor(math.log2(float(off.min()))))
        if s_max is None:
            s_max = int(math.ceil(math.log2(float(off.max()))))
    c_o = next_pow2(4.0 * space.c_d)

    if space.mode == "grid":
        shape = space.shape
        w = float(space.weights[0])
        coords_grid = space.coords.reshape(shape + (space.coords.shape[1],))

        def apply_fn(s: int, f: np.ndarray, kern=kernel) -> np.ndarray:
            dvs, vecs = _annulus_offsets(space, s)
            farr = f.reshape(shape)
            out = np.zeros(shape, dtype=np.result_type(f, float))
            for dv, vec in zip(dvs, vecs):
                sl = _shift_slices(shape, dv)
                if sl is None:
                    continue
                dst, src = sl
                if kern.translation_invariant:
                    coeff = kern.profile(vec[None, :], np.zeros((1, len(shape))))
                    out[dst] += (float(np.real(coeff[0])) if not
                                 np.iscomplexobj(coeff) else complex(coeff[0])) \
                        * farr[src] * w
                else:
                    kv = kern.profile(coords_grid[dst], coords_grid[src])
                    out[dst] += kv * farr[src] * w
            return out.ravel()

        def make_adj() -> SingleScaleFamily:
            adj_kern = CZKernel(
                profile=lambda x, y: np.conj(kernel.profile(y, x)),
                translation_invariant=kernel.translation_invariant,
                name=kernel.name + "*",
            )
            return cz_family(space, adj_kern, s_min, s_max)
    else:
        def apply_fn(s: int, f: np.ndarray, kern=kernel) -> np.ndarray:
            d = space.dist_table
            mask = (d >= 2.0 ** s) & (d < 2.0 ** (s + 1))
            out = np.zeros(space.npts, dtype=np.result_type(f, float))
            for i in range(space.npts):
                js = np.flatnonzero(mask[i])
                if js.size == 0:
                    continue
                # clouds carry no coordinates; translation-invariant profiles
                # are evaluated on the distances instead
                kv = kern.profile(d[i, js][:, None], np.zeros((js.size, 1)))
                out[i] = np.sum(kv * f[js] * space.weights[js])
            return out

        def make_adj() -> SingleScaleFamily:
            adj_kern = CZKernel(
                profile=lambda x, y: np.conj(kernel.profile(y, x)),
                translation_invariant=kernel.translation_invariant,
                name=kernel.name + "*",
            )
            return cz_family(space, adj_kern, s_min, s_max)

    return SingleScaleFamily(
        space=space, s_min=s_min, s_max=s_max, c_o=c_o, kind="cz",
        _apply=apply_fn, _make_adjoint=make_adj,
        meta={"kernel": kernel.name},
    )


# -- convolution with a dilated measure --------------------------------------

def _snap_offsets(space: HomogeneousSpace, measure: DiscreteMeasure, s: int):
    """Snap the dilated support delta_{2^s}(points) to lattice offsets,
    merging masses that collide.  Returns (offset index rows, masses,
    collision fraction)."""
    scaled = measure.points * (2.0 ** s) ** np.asarray(measure.exponents)
    dv = np.round(scaled / space.step).astype(np.int64)
    merged: dict[tuple[int, ...], complex] = {}
    for row, m in zip(dv, measure.masses):
        key = tuple(int(v) for v in row)
        merged[key] = merged.get(key, 0.0) + m
    keys = sorted(merged)
    offs = np.array(keys, dtype=np.int64).reshape(len(keys), -1)
    masses = np.array([merged[k] for k in keys])
    collision = 1.0 - len(keys) / max(1, len(dv))
    return offs, masses, collision


def measure_family(space: HomogeneousSpace, measure: DiscreteMeasure,
                   s_min: Optional[int] = None, s_max: Optional[int] = None
                   ) -> SingleScaleFamily:
    """T(s) f = f * mu_s with mu_s the dilate of ``measure`` at scale 2^s."""
    if space.mode != "grid":
        raise ValueError("measure families require a grid space")
    if tuple(measure.exponents) != tuple(space.dilations.exponents):
        raise ValueError(
            f"measure exponents {measure.exponents} do not match the space "
            f"dilations {space.dilations.exponents}"
        )
    if measure.total_variation > 1.0 + 1e-9:
        raise ValueError(
            f"convolution families require total variation <= 1, got "
            f"{measure.total_variation:.6g}"
        )
    if s_min is None:
        s_min = int(math.floor(math.log2(space.step)))
    if s_max is None:
        s_max = int(math.floor(math.log2(space.extent)))
    c_o = next_pow2(1.0 + 2.0 * space.c_d)
    shape = space.shape
    snap_reports: dict[int, float] = {}
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def offsets_for(s: int):
        if s not in cache:
            offs, masses, coll = _snap_offsets(space, measure, s)
            snap_reports[s] = coll
            cache[s] = (offs, masses)
        return cache[s]

    def apply_fn(s: int, f: np.ndarray) -> np.ndarray:
        offs, masses = offsets_for(s)
        farr = f.reshape(shape)
        cplx = np.iscomplexobj(masses) or np.iscomplexobj(f)
        out = np.zeros(shape, dtype=complex if cplx else float)
        for dv, m in zip(offs, masses):
            sl = _shift_slices(shape, dv)
            if sl is None:
                continue
            dst, src = sl
            out[dst] += m * farr[src]
        return out.ravel()

    def make_adj() -> SingleScaleFamily:
        return measure_family(space, measure.reflected_conjugate(), s_min, s_max)

    return SingleScaleFamily(
        space=space, s_min=s_min, s_max=s_max, c_o=c_o, kind="measure",
        _apply=apply_fn, _make_adjoint=make_adj,
        meta={"measure": measure.name, "snap_reports": snap_reports,
              "measure_obj": measure},
    )


# -- geometric smoothing ------------------------------------------------------

def geometric_smoothing_family(space: HomogeneousSpace,
                               s_min: Optional[int] = None,
                               s_max: Optional[int] = None,
                               c1: float = 2.0, c2: float = 2.0
                               ) -> SingleScaleFamily:
    """Positive self-adjoint local averaging A(s) built from a fixed-scale
    cover of the whole grid and a subordinate partition of unity."""
    from .covering import fixed_scale_cover, partition_of_unity

    if space.mode != "grid":
        raise ValueError("smoothing families require a grid space")
    if s_min is None:
        s_min = int(math.floor(math.log2(space.step))) + 1
    if s_max is None:
        s_max = int(math.floor(math.log2(space.extent)))
    center = space.flat_index(tuple(n // 2 for n in space.shape))
    host_r = next_pow2(float(np.max(space.d(center, np.arange(space.npts)))) * 1.01)
    host = ball_r(space, center, host_r)
    pieces_cache: dict[int, tuple] = {}

    def pieces_for(s: int):
        if s not in pieces_cache:
            pieces, _rep = fixed_scale_cover(space, host, s)
            pou = partition_of_unity(space, pieces, s, c2=c2)
            norms = np.array([
                max(ball_r(space, p.center, c1 * p.radius).measure, 1e-300)
                for p in pieces
            ])
            pieces_cache[s] = (pou, norms)
        return pieces_cache[s]

    def apply_fn(s: int, f: np.ndarray) -> np.ndarray:
        pou, norms = pieces_for(s)
        out = np.zeros(space.npts, dtype=np.result_type(f, float))
        for i, (mem, val) in enumerate(zip(pou.members, pou.values)):
            integ = np.sum(f[mem] * val * space.weights[mem])
            out[mem] += val * integ / norms[i]
        return out

    fam = SingleScaleFamily(
        space=space, s_min=s_min, s_max=s_max,
        c_o=next_pow2(4.0 * space.c_d * max(1.0, c2)), kind="smoothing",
        _apply=apply_fn, _make_adjoint=None, meta={"c1": c1, "c2": c2},
    )
    fam._make_adjoint = lambda: fam   # symmetric real kernel
    return fam


# ---------------------------------------------------------------------------
# scale windows
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class TruncatedOperator:
    """T_sigma^tau = sum_{sigma <= s < tau} T(s)  (or the maximal variant
    M_sigma^tau f = sup_{sigma <= s < tau} |T(s) f|); identically zero when
    sigma >= tau."""

    family: SingleScaleFamily
    sigma: int
    tau: int
    maximal: bool = False

    @property
    def is_zero(self) -> bool:
        return self.sigma >= self.tau

    def scale_window(self) -> range:
        lo = max(self.sigma, self.family.s_min)
        hi = min(self.tau, self.family.s_max + 1)
        return range(lo, hi)

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if self.is_zero:
            return np.zeros_like(values, dtype=np.result_type(values, float))
        out = None
        for s in self.scale_window():
            term = self.family.apply(s, values)
            if self.maximal:
                term = np.abs(term)
                out = term if out is None else np.maximum(out, term)
            else:
                out = term if out is None else out + term
        if out is None:
            return np.zeros_like(values, dtype=np.result_type(values, float))
        return out


def truncate(family: SingleScaleFamily, sigma: int, tau: int) -> TruncatedOperator:
    return TruncatedOperator(family=family, sigma=int(sigma), tau=int(tau))


def maximal(family: SingleScaleFamily, sigma: int, tau: int) -> TruncatedOperator:
    return TruncatedOperator(family=family, sigma=int(sigma), tau=int(tau),
                             maximal=True)


# ---------------------------------------------------------------------------
# localization audit
# ---------------------------------------------------------------------------

def check_localization(family: SingleScaleFamily, s_host: int, trials: int = 8,
                       rng: Optional[np.random.Generator] = None,
                       tol: float = 1e-12) -> tuple[bool, float]:
    """Empirically confirm supp T_sigma^{s_L} [f 1_L] inside c_o L.

    Returns (all trials within the declared dilate, worst dilate observed).
    """
    rng = rng or np.random.default_rng(0)
    space = family.space
    worst = 0.0
    done = 0
    for _ in range(trials * 4):
        if done >= trials:
            break
        c = int(rng.integers(0, space.npts))
        r_L = 2.0 ** s_host
        if space.mode == "grid" and space.ball_escapes(c, family.c_o * r_L * 1.5):
            continue
        L = ball_r(space, c, r_L)
        if L.members.size == 0:
            continue
        f = np.zeros(space.npts)
        f[L.members] = rng.standard_normal(L.members.size)
        op = truncate(family, family.s_min, s_host)
        res = op.apply(f)
        supp = np.flatnonzero(np.abs(res) > tol * max(1.0, np.abs(res).max()))
        if supp.size:
            alpha = float(np.max(space.d(c, supp))) / r_L
            worst = max(worst, math.nextafter(alpha, math.inf))
        done += 1
    return worst <= family.c_o, worst
