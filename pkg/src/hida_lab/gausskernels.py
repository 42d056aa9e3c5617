"""Finite-rank Gauss-kernel machinery and its Monte Carlo cross-check.

The infinite-dimensional Gaussian measure only ever enters through
finite-rank functionals: coordinates along an eigenbasis are i.i.d.
standard normals, which is exactly the finite truncation of the limit
procedure defining quadratic forms on distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NearSingularError
from .grid import GridFunctionPair, pair


@dataclass(frozen=True)
class FiniteRankKernel:
    """Finite-rank symmetric kernel given by its eigenvalues, each in (-1/2, 0]."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", vals)
        if np.any(vals <= -0.5) or np.any(vals > 0):
            raise InvalidParameterError(
                f"kernel eigenvalues must lie in (-1/2, 0], got {vals}")

    @property
    def rank(self) -> int:
        return len(self.eigenvalues)


def donsker_T(eta_norm_sq: float, eta_dot_f: complex, f_norm_sq: complex,
              x: float) -> complex:
    """T-transform of Donsker's delta pinned at x.

    1/sqrt(2 pi <eta,eta>) * exp(-(i<eta,f> - x)^2 / (2<eta,eta>) - <f,f>/2)
    """
    if not eta_norm_sq > 0:
        raise InvalidParameterError(f"<eta,eta> must be positive, got {eta_norm_sq}")
    quad = -((1j * eta_dot_f - x) ** 2) / (2.0 * eta_norm_sq) - 0.5 * f_norm_sq
    return np.exp(quad) / np.sqrt(2.0 * np.pi * eta_norm_sq)


def finite_rank_T(kernel: FiniteRankKernel, f_coeffs, f_residual_norm_sq: complex = 0.0
                  ) -> complex:
    """T-transform of exp(-<.,K.>/2) for a finite-rank K.

    det(Id+K)^{-1/2} * exp(-(f, (Id+K)^{-1} f)/2); the coefficients are
    bilinear coordinates of f along the eigenbasis and the residual term
    covers the orthogonal complement, where K acts as zero.
    """
    coeffs = np.asarray(f_coeffs, dtype=complex)
    if coeffs.shape != (kernel.rank,):
        raise InvalidParameterError(
            f"expected {kernel.rank} coefficients, got shape {coeffs.shape}")
    det = np.prod(1.0 + kernel.eigenvalues)
    quad = np.sum(coeffs ** 2 / (1.0 + kernel.eigenvalues)) + f_residual_norm_sq
    return det ** (-0.5) * np.exp(-0.5 * quad)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    exact: float


def montecarlo_gauss_expectation(kernel: FiniteRankKernel, samples: int,
                                 seed: int) -> MonteCarloEstimate:
    """Seeded Monte Carlo check of E[exp(-<w, K w>)] = det(Id + 2K)^{-1/2}."""
    if samples < 100:
        raise InvalidParameterError(f"need at least 100 samples, got {samples}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, kernel.rank))
    vals = np.exp(-(z ** 2) @ kernel.eigenvalues)
    mean = float(vals.mean())
    std_error = float(vals.std(ddof=1) / np.sqrt(samples)) if kernel.rank else 0.0
    exact = float(np.prod(1.0 + 2.0 * kernel.eigenvalues) ** (-0.5))
    return MonteCarloEstimate(mean=mean, std_error=std_error, samples=samples,
                              seed=seed, exact=exact)


def normalized_exp_T(apply_inverse, f: GridFunctionPair) -> complex:
    """T-transform of the normalized exponential: exp(-(f, (Id+K)^{-1} f)/2).

    ``apply_inverse`` maps a GridFunctionPair to (Id+K)^{-1} applied to it;
    no determinant prefactor is involved.
    """
    inv_f = apply_inverse(f)
    if not isinstance(inv_f, GridFunctionPair):
        raise InvalidParameterError("apply_inverse must return a GridFunctionPair")
    if not np.all(np.isfinite(inv_f.comp1)) or not np.all(np.isfinite(inv_f.comp2)):
        raise NearSingularError("(Id+K)^{-1} produced non-finite values")
    return complex(np.exp(-0.5 * pair(f, inv_f)))
