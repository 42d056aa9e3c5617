"""Discretized Volterra operator, its adjoint, and the block operators K, L, N.

The cumulative-integration operator A f(tau) = int_0^tau f(s) ds becomes a
strictly-lower-triangular matrix plus half the quadrature weight on the
diagonal.  Its adjoint is taken w.r.t. the *bilinear* pairing, i.e. exactly
the weighted transpose of the discrete A.  This makes the product
L (Id + K)^{-1} exactly real symmetric at every resolution, which is what
keeps its discrete spectrum clean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, InvalidParameterError
from .grid import Grid, GridFunctionPair, pair, pair_from_vector


@dataclass(frozen=True)
class MagneticModel:
    """Physical parameters: coupling k = q*H3/c and terminal time t (hbar = m = 1)."""

    k: float
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise InvalidParameterError(f"terminal time must be positive, got {self.t}")


@dataclass(frozen=True)
class BlockOperator:
    """Dense 2n x 2n complex matrix in 2x2 block layout on a grid."""

    grid: Grid
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        n2 = 2 * self.grid.n
        if self.entries.shape != (n2, n2):
            raise InvalidParameterError(
                f"entries shape {self.entries.shape} does not match grid (expect {(n2, n2)})")

    def apply(self, f: GridFunctionPair) -> GridFunctionPair:
        if f.grid != self.grid:
            raise GridMismatchError("operator and function live on different grids")
        return pair_from_vector(self.grid, self.entries @ f.as_vector())

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        if self.grid != other.grid:
            raise GridMismatchError("cannot add operators on different grids")
        return BlockOperator(grid=self.grid, entries=self.entries + other.entries)


def blocks(top_left, top_right, bottom_left, bottom_right, g: Grid) -> BlockOperator:
    n = g.n

    def _mat(b):
        if b is None:
            return np.zeros((n, n), dtype=complex)
        return np.asarray(b, dtype=complex)

    entries = np.block([[_mat(top_left), _mat(top_right)],
                        [_mat(bottom_left), _mat(bottom_right)]])
    return BlockOperator(grid=g, entries=entries)


def volterra(g: Grid) -> np.ndarray:
    """Matrix of A f(tau) = int_0^tau f: weight w_l below the diagonal, w_j/2 on it."""
    a = np.tril(np.tile(g.weights, (g.n, 1)), k=-1)
    np.fill_diagonal(a, g.weights / 2.0)
    return a


def volterra_adjoint(g: Grid) -> np.ndarray:
    """Exact pairing-adjoint of the discrete A: (A*)_{jl} = (w_l / w_j) A_{lj}.

    With uniform midpoint weights this is the plain transpose; it approximates
    A* f(tau) = int_tau^t f(s) ds to the same order as A.
    """
    a = volterra(g)
    w = g.weights
    return (a.T * w[None, :]) / w[:, None]


def free_K(m: MagneticModel, g: Grid) -> BlockOperator:
    """Kinetic-plus-compensation kernel: -(1+i) times the identity on the grid.

    The projection onto [0, t) acts as the identity because the grid never
    leaves the interval.
    """
    d = -(1.0 + 1.0j) * np.eye(g.n)
    return blocks(d, None, None, d, g)


def magnetic_L(m: MagneticModel, g: Grid) -> BlockOperator:
    """Velocity-coupling block operator: off-diagonal blocks +-ik(A - A*)."""
    a = volterra(g)
    astar = volterra_adjoint(g)
    d = 1j * m.k * (a - astar)
    return blocks(None, d, -d, None, g)


def identity(g: Grid) -> BlockOperator:
    return BlockOperator(grid=g, entries=np.eye(2 * g.n, dtype=complex))


def build_N(m: MagneticModel, g: Grid) -> BlockOperator:
    """N = Id + K + L; on the grid this is -i(Id + B) with B real symmetric."""
    return identity(g) + free_K(m, g) + magnetic_L(m, g)


def symmetric_core(m: MagneticModel, g: Grid) -> np.ndarray:
    """Real symmetric matrix B = L (Id + K)^{-1} restricted to the grid.

    (Id + K)^{-1} = i Id there, so B = iL = [[0, k(A* - A)], [k(A - A*), 0]],
    which is symmetric because A* is the exact pairing-adjoint of A.
    """
    a = volterra(g)
    astar = volterra_adjoint(g)
    s = m.k * (astar - a)
    zero = np.zeros_like(s)
    return np.block([[zero, s], [s.T, zero]])


def quadratic_form(b: BlockOperator, f: GridFunctionPair) -> complex:
    """pair(f, B f)."""
    return pair(f, b.apply(f))


def potential_form_direct(m: MagneticModel, f: GridFunctionPair) -> complex:
    """Direct quadrature of -ik int_0^t ((A f1) f2 - f1 (A f2)) dtau.

    Equals half the quadratic form of L on smooth functions (up to
    quadrature error); serves as the independent route for checking L.
    """
    g = f.grid
    a = volterra(g)
    inner1 = a @ f.comp1
    inner2 = a @ f.comp2
    integrand = inner1 * f.comp2 - f.comp1 * inner2
    return complex(-1j * m.k * np.sum(g.weights * integrand))
