"""Functions on a finite homogeneous space: norms, ball averages, pairings."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .space import Ball, HomogeneousSpace

__all__ = ["GridFunction", "dual_exponent", "avg", "pairing"]


def dual_exponent(p: float) -> float:
    """Conjugate exponent p' with 1/p + 1/p' = 1 (1 <-> inf)."""
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    if p <= 0:
        raise ValueError(f"exponent must be >= 1, got {p}")
    return p / (p - 1.0)


@dataclass(eq=False)
class GridFunction:
    """A (possibly complex) function on the points of a space."""

    space: HomogeneousSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values)
        if self.values.shape != (self.space.npts,):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{self.space.npts} points"
            )

    def __abs__(self) -> "GridFunction":
        return GridFunction(self.space, np.abs(self.values))

    def restrict(self, idx: np.ndarray) -> "GridFunction":
        out = np.zeros_like(self.values)
        out[idx] = self.values[idx]
        return GridFunction(self.space, out)

    def lp_norm(self, p: float) -> float:
        if p == math.inf:
            return float(np.max(np.abs(self.values))) if self.values.size else 0.0
        return float(
            np.sum(np.abs(self.values) ** p * self.space.weights) ** (1.0 / p)
        )

    def support(self, tol: float = 0.0) -> np.ndarray:
        return np.flatnonzero(np.abs(self.values) > tol)


def _as_values(f: Union[GridFunction, np.ndarray]) -> np.ndarray:
    return f.values if isinstance(f, GridFunction) else np.asarray(f)


def avg(f: Union[GridFunction, np.ndarray], B: Ball, p: float = 1.0) -> float:
    """L^p average < |f| >_{p, B}; zero on empty balls; p = inf -> sup."""
    vals = _as_values(f)
    if B.members.size == 0 or B.measure <= 0:
        return 0.0
    sub = np.abs(vals[B.members])
    if p == math.inf:
        return float(sub.max())
    w = B.space.weights[B.members]
    return float((np.sum(sub ** p * w) / B.measure) ** (1.0 / p))


def pairing(space: HomogeneousSpace,
            f: Union[GridFunction, np.ndarray],
            g: Union[GridFunction, np.ndarray]) -> complex:
    """Weighted inner product <f, g> = sum f conj(g) mu."""
    fv, gv = _as_values(f), _as_values(g)
    out = np.sum(fv * np.conj(gv) * space.weights)
    return complex(out) if np.iscomplexobj(fv) or np.iscomplexobj(gv) else float(out)
