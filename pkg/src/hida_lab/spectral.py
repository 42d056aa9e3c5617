"""Spectrum of L(Id+K)^{-1} and the three-way Fredholm determinant.

The closed-form eigenvalues are lambda_n = 2kt / ((2n-1) pi), n in Z, each
with multiplicity 2 and the symmetry lambda_n = -lambda_{-n+1}.  The
determinant of Id + L(Id+K)^{-1} is cos^2(kt), reachable three ways:

  closed     cos^2(kt)
  product    prod_n (1 - 4 k^2 t^2 / ((2n-1)^2 pi^2))^2, truncated
  discrete   prod (1 + lambda) over the eigenvalues of the discretized core
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NumericFailureError
from .grid import Grid, GridFunctionPair
from .operators import MagneticModel, symmetric_core


@dataclass(frozen=True)
class SpectralReport:
    """Analytic vs. discrete spectrum of the symmetric core B."""

    model: MagneticModel
    analytic: np.ndarray          # positive-branch closed-form values, multiplicity 2 each
    discrete: np.ndarray          # all eigenvalues of B, sorted by descending |value|
    match_errors: np.ndarray      # per matched pair: relative error vs analytic value
    pair_gaps: np.ndarray = field(default=None)   # per matched pair: relative in-pair spread
    matched_analytic: np.ndarray = field(default=None)  # signed analytic value per pair
    matched_means: np.ndarray = field(default=None)     # discrete pair means


@dataclass(frozen=True)
class DeterminantReport:
    model: MagneticModel
    closed: float
    product: float
    product_terms: int
    discrete: float
    discrepancies: dict


def analytic_eigenvalues(m: MagneticModel, count: int) -> np.ndarray:
    """Positive-branch eigenvalues 2kt/((2n-1)pi), n = 1..count."""
    if count < 1:
        raise InvalidParameterError(f"count must be >= 1, got {count}")
    n = np.arange(1, count + 1)
    return 2.0 * m.k * m.t / ((2 * n - 1) * np.pi)


def analytic_eigenfunction(m: MagneticModel, n: int, c1: complex, c2: complex,
                           g: Grid) -> GridFunctionPair:
    """Closed-form eigenfunction c1 (cos, sin) + c2 (sin, -cos) at frequency 2k/lambda_n."""
    if n == 0:
        raise InvalidParameterError("eigenvalue index n must be nonzero")
    if c1 == 0 and c2 == 0:
        raise InvalidParameterError("coefficient pair must not be (0, 0)")
    # The frequency 2k/lambda_n = (2n-1) pi / t is k-independent and well
    # defined for either sign branch (n -> -n+1 flips lambda's sign only).
    lam_n = 2.0 * m.k * m.t / ((2 * n - 1) * np.pi)
    freq = (2 * n - 1) * np.pi / m.t if m.k == 0 else 2.0 * m.k / lam_n
    s = g.nodes
    comp1 = c1 * np.cos(freq * s) + c2 * np.sin(freq * s)
    comp2 = c1 * np.sin(freq * s) - c2 * np.cos(freq * s)
    return GridFunctionPair(grid=g, comp1=comp1.astype(complex), comp2=comp2.astype(complex))


def discrete_spectrum(m: MagneticModel, g: Grid, count: int = 10) -> SpectralReport:
    """Eigen-decomposition of B with greedy multiplicity-2 matching.

    Positive and negative discrete eigenvalues are paired separately in
    descending magnitude; pair j of each sign is matched against
    +-lambda_j.  ``count`` analytic values are matched on each branch.
    """
    b = symmetric_core(m, g)
    try:
        eigs = np.linalg.eigvalsh(b)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"symmetric eigensolver failed: {exc}") from exc

    order = np.argsort(-np.abs(eigs))
    discrete = eigs[order]

    if m.k == 0:
        analytic = np.zeros(count)
        zeros = np.zeros(count * 2)
        return SpectralReport(model=m, analytic=analytic, discrete=discrete,
                              match_errors=zeros, pair_gaps=zeros,
                              matched_analytic=zeros, matched_means=zeros)

    analytic = analytic_eigenvalues(m, count)
    sign = 1.0 if m.k > 0 else -1.0
    pos = np.sort(discrete[discrete * sign > 0] * sign)[::-1] * sign
    neg = np.sort(-discrete[discrete * sign < 0] * sign)[::-1] * (-sign)

    matched_analytic, matched_means, errors, gaps = [], [], [], []
    for j, lam in enumerate(analytic):
        for branch, target in ((pos, lam), (neg, -lam)):
            if 2 * j + 2 > len(branch):
                raise NumericFailureError(
                    f"not enough discrete eigenvalues to match {count} analytic pairs")
            pair_vals = branch[2 * j: 2 * j + 2]
            mean = pair_vals.mean()
            matched_analytic.append(target)
            matched_means.append(mean)
            errors.append(abs(mean - target) / abs(target))
            gaps.append(abs(pair_vals[0] - pair_vals[1]) / abs(target))

    return SpectralReport(model=m, analytic=analytic, discrete=discrete,
                          match_errors=np.array(errors), pair_gaps=np.array(gaps),
                          matched_analytic=np.array(matched_analytic),
                          matched_means=np.array(matched_means))


def determinant_closed(m: MagneticModel) -> float:
    return float(np.cos(m.k * m.t) ** 2)


def determinant_product(m: MagneticModel, n_max: int = 100_000) -> float:
    """Partial product of (1 - 4k^2t^2/((2n-1)^2 pi^2))^2 up to n_max."""
    if n_max < 1:
        raise InvalidParameterError(f"n_max must be >= 1, got {n_max}")
    n = np.arange(1, n_max + 1, dtype=float)
    factors = 1.0 - (2.0 * m.k * m.t / ((2 * n - 1) * np.pi)) ** 2
    return float(np.prod(factors) ** 2)


def determinant_discrete(report: SpectralReport) -> float:
    """prod (1 + lambda) over all discrete eigenvalues of B."""
    return float(np.prod(1.0 + report.discrete))


def determinant_report(m: MagneticModel, g: Grid, n_max: int = 100_000) -> DeterminantReport:
    closed = determinant_closed(m)
    product = determinant_product(m, n_max)
    spectrum = discrete_spectrum(m, g, count=1)
    discrete = determinant_discrete(spectrum)

    def _rel(a, b):
        scale = max(abs(a), abs(b), 1e-300)
        return abs(a - b) / scale

    discrepancies = {
        "closed_vs_product": _rel(closed, product),
        "closed_vs_discrete": _rel(closed, discrete),
        "product_vs_discrete": _rel(product, discrete),
    }
    return DeterminantReport(model=m, closed=closed, product=product,
                             product_terms=n_max, discrete=discrete,
                             discrepancies=discrepancies)
