"""End-to-end verification harness: ten named checks over the whole package.

Each check compares an independently computed quantity against a closed
form or a convergence-order gate and reports a single pass/fail verdict
with the measured value and the threshold it was held to.  The harness is
shared by the ``hida-lab verify`` subcommand and the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .feynman import (caustic_check, composed_closed_value, free_limit_reference,
                      lemma_T, magnetic_T, propagator, residual_convergence)
from .fredholm import (closed_preimage_f, gram_matrix, solve_N, verify_preimage)
from .gausskernels import FiniteRankKernel, donsker_T, montecarlo_gauss_expectation
from .grid import make_grid
from .operators import MagneticModel, free_K, magnetic_L
from .spectral import (determinant_closed, determinant_discrete,
                       determinant_product, discrete_spectrum)
from .testfunctions import indicator_pair, random_suite


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "measured", float(self.measured))


def _orders(residuals) -> list:
    return [float(np.log2(residuals[i] / residuals[i + 1]))
            for i in range(len(residuals) - 1)]


def check_spectrum(n_grid: int = 2000, count: int = 10) -> CheckResult:
    """Discrete eigenvalue pairs of B vs 2kt/((2n-1)pi), multiplicity 2."""
    m = MagneticModel(k=1.0, t=1.0)
    rep = discrete_spectrum(m, make_grid(m.t, n_grid), count=count)
    worst_match = float(rep.match_errors.max())
    worst_gap = float(rep.pair_gaps.max())
    passed = worst_match <= 1e-3 and worst_gap <= 1e-6
    return CheckResult(
        name="spectrum_match", passed=passed, measured=worst_match, threshold=1e-3,
        detail=(f"{count} leading pairs per sign branch at n_grid={n_grid}: "
                f"max relative error {worst_match:.3e} (<= 1e-3), "
                f"max in-pair gap {worst_gap:.3e} (<= 1e-6)"))


def check_determinant(n_grid: int = 2000, n_max: int = 100_000) -> CheckResult:
    """Closed cos^2(kt) vs truncated product vs discrete eigen-product."""
    worst_disc, worst_prod = 0.0, 0.0
    for k, t in ((1.0, 1.0), (0.5, 2.0), (0.3, 0.7)):
        m = MagneticModel(k=k, t=t)
        closed = determinant_closed(m)
        disc = determinant_discrete(discrete_spectrum(m, make_grid(t, n_grid), count=1))
        prod = determinant_product(m, n_max)
        worst_disc = max(worst_disc, abs(disc - closed))
        worst_prod = max(worst_prod, abs(prod - closed))
    passed = worst_disc <= 1e-2 and worst_prod <= 1e-4
    return CheckResult(
        name="determinant_three_way", passed=passed, measured=worst_disc,
        threshold=1e-2,
        detail=(f"three (k,t) points at n_grid={n_grid}: "
                f"max |discrete - cos^2| {worst_disc:.3e} (<= 1e-2), "
                f"max |product({n_max}) - cos^2| {worst_prod:.3e} (<= 1e-4)"))


def check_preimage(sizes=(500, 1000, 2000)) -> CheckResult:
    """Closed preimage residual, solve agreement, and residual order."""
    m = MagneticModel(k=1.0, t=1.0)
    residuals = []
    for n in sizes:
        residuals.append(verify_preimage(m, make_grid(m.t, n)).sup_f)
    orders = _orders(residuals)

    g_fine = make_grid(m.t, sizes[-1])
    solved = solve_N(m, g_fine, indicator_pair(g_fine, 1))
    closed = closed_preimage_f(m, g_fine)
    gap = float(max(np.abs(solved.comp1 - closed.comp1).max(),
                    np.abs(solved.comp2 - closed.comp2).max()))

    passed = residuals[-1] <= 1e-3 and gap <= 1e-3 and min(orders) >= 1.9
    return CheckResult(
        name="preimage_residual", passed=passed, measured=residuals[-1],
        threshold=1e-3,
        detail=(f"sup residual at n_grid={sizes[-1]}: {residuals[-1]:.3e} (<= 1e-3), "
                f"solve-vs-closed gap {gap:.3e} (<= 1e-3), "
                f"orders over {sizes}: {[round(o, 3) for o in orders]} (each >= 1.9)"))


def check_gram(n_grid: int = 2000) -> CheckResult:
    """Gram matrix of the pinning directions vs (i/k) tan(kt) Id."""
    m = MagneticModel(k=1.0, t=1.0)
    g = make_grid(m.t, n_grid)
    entries = gram_matrix(m, g, [indicator_pair(g, 1), indicator_pair(g, 2)]).entries
    re_max = float(np.abs(entries.real).max())
    off = float(abs(entries[0, 1]))
    diag_err = float(abs(entries[0, 0] - 1j * np.tan(1.0)))
    passed = re_max <= 1e-8 and off <= 1e-4 and diag_err <= 1e-4
    return CheckResult(
        name="gram_matrix", passed=passed, measured=diag_err, threshold=1e-4,
        detail=(f"n_grid={n_grid}: max|Re M| {re_max:.3e} (<= 1e-8), "
                f"|M12| {off:.3e} (<= 1e-4), "
                f"|M11 - i tan(1)| {diag_err:.3e} (<= 1e-4)"))


def check_two_path(n_grid: int = 2000, seed: int = 777) -> CheckResult:
    """Closed-form vs fully numeric T-transform on seeded test functions."""
    m = MagneticModel(k=1.0, t=1.0)
    g = make_grid(m.t, n_grid)
    y = (0.3, -0.4)
    from .feynman import LemmaEvaluator
    evaluator = LemmaEvaluator(free_K(m, g), magnetic_L(m, g),
                               etas=(indicator_pair(g, 1), indicator_pair(g, 2)))
    worst = 0.0
    for f in random_suite(seed, 5, g):
        numeric = evaluator.evaluate(f=f, ys=y).value
        closed = magnetic_T(m, y, f=f).value
        worst = max(worst, abs(closed - numeric) / abs(numeric))
    passed = worst <= 1e-3
    return CheckResult(
        name="two_path_consistency", passed=passed, measured=worst, threshold=1e-3,
        detail=(f"5 seeded Gaussian test functions at n_grid={n_grid}, y={y}: "
                f"max relative gap {worst:.3e} (<= 1e-3)"))


def check_free_limit(n_grid: int = 600) -> CheckResult:
    """Composed propagator converges to the free propagator as k -> 0."""
    y = (1.0, 0.0)
    free = free_limit_reference(1.0, y)
    gaps = []
    for k in (1e-2, 1e-3, 1e-4):
        value = propagator(MagneticModel(k=k, t=1.0), y, n_grid=n_grid).value
        gaps.append(abs(value - free) / abs(free))
    monotone = all(gaps[i + 1] < gaps[i] for i in range(len(gaps) - 1))
    passed = gaps[-1] <= 1e-3 and monotone
    return CheckResult(
        name="free_limit", passed=passed, measured=gaps[-1], threshold=1e-3,
        detail=(f"relative gaps at k=1e-2/1e-3/1e-4: "
                f"{[f'{g:.3e}' for g in gaps]}; final <= 1e-3, "
                f"monotone decrease: {monotone}"))


def check_gauss_identity(samples: int = 100_000, seed: int = 2024) -> CheckResult:
    """Monte Carlo E[exp(-<w,Kw>)] = det(Id+2K)^{-1/2} for rank-1 K = -1/4."""
    kernel = FiniteRankKernel(eigenvalues=np.array([-0.25]))
    est1 = montecarlo_gauss_expectation(kernel, samples, seed)
    est2 = montecarlo_gauss_expectation(kernel, samples, seed)
    sigmas = abs(est1.mean - est1.exact) / est1.std_error
    reproducible = est1.mean == est2.mean and est1.std_error == est2.std_error
    passed = sigmas <= 3.0 and reproducible and abs(est1.exact - np.sqrt(2.0)) < 1e-12
    return CheckResult(
        name="gauss_determinant_identity", passed=passed, measured=sigmas,
        threshold=3.0,
        detail=(f"{samples} samples, seed {seed}: mean {est1.mean:.6f} vs sqrt(2), "
                f"{sigmas:.2f} standard errors (<= 3), "
                f"bit-reproducible: {reproducible}"))


def check_delta_normalization() -> CheckResult:
    """x-integral of the pinned-delta T-transform at f = 0 equals 1."""
    integral, _ = quad(lambda x: donsker_T(1.0, 0.0, 0.0, x).real,
                       -np.inf, np.inf)
    err = float(abs(integral - 1.0))
    return CheckResult(
        name="delta_normalization", passed=err <= 1e-6, measured=err,
        threshold=1e-6,
        detail=f"|integral - 1| = {err:.3e} (<= 1e-6)")


def check_caustics(n_grid: int = 400, points: int = 7) -> CheckResult:
    """Exact caustic flags plus propagator growth approaching kt = pi.

    The magnitude of the composed value scales as k / (2 pi |sin(kt)|); the
    growth gate over kt in [2.8, 3.1] is held at a factor of 10.
    """
    flag_pi = caustic_check(MagneticModel(k=1.0, t=np.pi)).classification
    flag_half = caustic_check(MagneticModel(k=1.0, t=np.pi / 2.0)).classification
    flags_ok = flag_pi == "integer_caustic" and flag_half == "half_integer_caustic"

    kts = np.linspace(2.8, 3.1, points)
    mags = [abs(propagator(MagneticModel(k=1.0, t=float(kt)), (0.0, 0.0),
                           n_grid=n_grid).value) for kt in kts]
    monotone = all(mags[i + 1] > mags[i] for i in range(len(mags) - 1))
    growth = mags[-1] / mags[0]
    passed = flags_ok and monotone and growth >= 10.0
    return CheckResult(
        name="caustic_behavior", passed=passed, measured=float(growth),
        threshold=10.0,
        detail=(f"flags: kt=pi -> {flag_pi}, kt=pi/2 -> {flag_half}; "
                f"|propagator| over kt in [2.8, 3.1]: monotone {monotone}, "
                f"growth {growth:.3f}x (>= 10 required)"))


def check_schrodinger(levels: int = 3, base_n: int = 11) -> CheckResult:
    """Finite-difference residual convergence adjudicates the conventions.

    The free (k = 0) composed value must satisfy the free equation at order
    >= 1.9; at k = 0.5 exactly one phase-sign convention may converge, and
    the report records which, together with the composed and as-quoted
    values and their disagreement.
    """
    free_res = [r.residual for r in residual_convergence(
        MagneticModel(k=0.0, t=1.0), levels=levels, base_n=base_n)]
    free_order = _orders(free_res)[-1]

    m = MagneticModel(k=0.5, t=1.0)
    verdicts = {}
    for convention in ("composed", "printed"):
        res = [r.residual for r in residual_convergence(
            m, convention=convention, levels=levels, base_n=base_n)]
        verdicts[convention] = _orders(res)[-1]
    converging = [c for c, order in verdicts.items() if order >= 1.9]

    from .feynman import printed_propagator_value
    y = (0.3, -0.4)
    composed = composed_closed_value(m, y)
    printed = printed_propagator_value(m, y)
    gap = abs(composed - printed)

    passed = free_order >= 1.9 and converging == ["composed"]
    return CheckResult(
        name="schrodinger_residual", passed=passed, measured=float(free_order),
        threshold=1.9,
        detail=(f"free-case finest order {free_order:.3f} (>= 1.9); "
                f"k=0.5 orders: composed {verdicts['composed']:.3f}, "
                f"printed {verdicts['printed']:.3f}; converging convention: "
                f"{converging}; composed value {composed:.6g}, "
                f"as-quoted value {printed:.6g}, disagreement {gap:.3e}"))


def run_checks(quick: bool = False, seed: int = 777) -> list:
    """All ten checks in order; ``quick`` trades grid size for runtime."""
    n_grid = 1000 if quick else 2000
    sizes = (250, 500, 1000) if quick else (500, 1000, 2000)
    samples = 20_000 if quick else 100_000
    return [
        check_spectrum(n_grid=n_grid),
        check_determinant(n_grid=n_grid),
        check_preimage(sizes=sizes),
        check_gram(n_grid=n_grid),
        check_two_path(n_grid=n_grid, seed=seed),
        check_free_limit(n_grid=300 if quick else 600),
        check_gauss_identity(samples=samples),
        check_delta_normalization(),
        check_caustics(n_grid=200 if quick else 400, points=5 if quick else 7),
        check_schrodinger(),
    ]
