"""Midpoint quadrature grid on [0, t) and the bilinear pairing.

Everything downstream works on two-component functions sampled at the
midpoints s_j = (j + 1/2) * t / n.  Midpoints keep every sample strictly
inside [0, t), so the indicator of the interval is sampled exactly and no
boundary convention is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, InvalidParameterError


@dataclass(frozen=True)
class Grid:
    """Uniform midpoint grid on [0, t)."""

    t: float
    n: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.t == other.t and self.n == other.n

    def __hash__(self):
        return hash((self.t, self.n))


@dataclass(frozen=True)
class GridFunctionPair:
    """Samples of a two-component complex function (f1, f2) on a grid."""

    grid: Grid
    comp1: np.ndarray = field(repr=False)
    comp2: np.ndarray = field(repr=False)

    def as_vector(self) -> np.ndarray:
        """Stacked length-2n vector (component 1 first)."""
        return np.concatenate([self.comp1, self.comp2])

    def sup_norm(self) -> float:
        return max(np.abs(self.comp1).max(), np.abs(self.comp2).max())


def make_grid(t: float, n: int) -> Grid:
    """Build the midpoint grid with n nodes on [0, t)."""
    if not t > 0:
        raise InvalidParameterError(f"duration t must be positive, got {t}")
    if n < 2:
        raise InvalidParameterError(f"need at least 2 nodes, got {n}")
    h = t / n
    nodes = (np.arange(n) + 0.5) * h
    weights = np.full(n, h)
    return Grid(t=float(t), n=int(n), nodes=nodes, weights=weights)


def pair_from_vector(g: Grid, vec: np.ndarray) -> GridFunctionPair:
    """Inverse of :meth:`GridFunctionPair.as_vector`."""
    if vec.shape != (2 * g.n,):
        raise InvalidParameterError(
            f"vector length {vec.shape} does not match grid with n={g.n}")
    return GridFunctionPair(grid=g, comp1=vec[: g.n].copy(), comp2=vec[g.n:].copy())


def sample(f1, f2, g: Grid) -> GridFunctionPair:
    """Sample two scalar functions (callables or constants) at the nodes."""
    def _eval(f):
        if callable(f):
            vals = np.asarray([f(s) for s in g.nodes], dtype=complex)
        else:
            vals = np.full(g.n, f, dtype=complex)
        return vals

    return GridFunctionPair(grid=g, comp1=_eval(f1), comp2=_eval(f2))


def check_same_grid(u: GridFunctionPair, v: GridFunctionPair) -> None:
    if u.grid != v.grid:
        raise GridMismatchError(
            f"grids differ: (t={u.grid.t}, n={u.grid.n}) vs (t={v.grid.t}, n={v.grid.n})")


def pair(u: GridFunctionPair, v: GridFunctionPair) -> complex:
    """Bilinear dual pairing sum_j w_j (u1_j v1_j + u2_j v2_j).

    No complex conjugation: this is the bilinear extension of the real
    pairing, the convention used by every formula in this package.
    """
    check_same_grid(u, v)
    w = u.grid.weights
    return complex(np.sum(w * (u.comp1 * v.comp1 + u.comp2 * v.comp2)))


def conj_norm_sq(u: GridFunctionPair) -> float:
    """Hermitian squared norm sum_j w_j (|u1_j|^2 + |u2_j|^2).

    Only used for solver diagnostics; the formulas use :func:`pair`.
    """
    w = u.grid.weights
    return float(np.sum(w * (np.abs(u.comp1) ** 2 + np.abs(u.comp2) ** 2)))
