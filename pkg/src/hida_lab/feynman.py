"""Composition of the master T-transform, the magnetic propagator, caustic
classification and the Schrödinger-residual verification.

Two independent evaluation paths exist on purpose:

* :func:`lemma_T` composes the T-transform from fully numeric ingredients
  (eigen-determinant, dense resolvent solves, numeric Gram matrix).
* :func:`magnetic_T` evaluates the closed-form specialization (analytic
  determinant, closed-form preimages, analytic Gram matrix).

The sign of the delta exponent and the square-root branches are fixed by
actually performing the Gaussian integrals that define the pinned product:
the exponent is +1/2 u^T M^{-1} u and the branches are chosen so the value
is continuous in t and matches the free propagator as t -> 0+.  With these
choices the composed generalized expectation at k > 0 is

    k / (2 pi i sin(kt)) * exp(+(ik/2) cot(kt) (y1^2 + y2^2)),

which reduces to the free two-dimensional propagator as k -> 0 and solves
the magnetic Schrödinger equation (both verified in the test suite).  The
often-quoted variant with cos(kt) in the prefactor is evaluated alongside
for comparison but never silently substituted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (CausticError, ConditionViolationError, InvalidParameterError,
                     NearSingularError)
from .fredholm import (analytic_gram_diagonal, check_away_from_caustic,
                       closed_preimage_f, closed_preimage_g, solve_N)
from .grid import Grid, GridFunctionPair, make_grid, pair, pair_from_vector
from .operators import BlockOperator, MagneticModel, free_K, magnetic_L
from .testfunctions import indicator_pair

_NEAR_REAL = 1e-8


def _branch_sqrt(z: complex, notes: list, label: str) -> complex:
    """Principal square root, stabilized on the negative real axis.

    Determinants that are analytically negative real (e.g. det M of the
    magnetic Gram matrix) acquire a tiny imaginary rounding part; snapping
    them back to the axis keeps the branch deterministic: sqrt(-x) = i sqrt(x).
    """
    z = complex(z)
    if z.real < 0 and abs(z.imag) <= _NEAR_REAL * abs(z):
        root = 1j * np.sqrt(-z.real)
        notes.append(f"{label}: negative-real determinant, branch sqrt(-x)=i*sqrt(x)")
        return root
    notes.append(f"{label}: principal branch")
    return complex(np.sqrt(z))


@dataclass(frozen=True)
class TTransformReport:
    value: complex
    det_factor: complex
    gram_factor: complex
    exponent_quadratic: complex
    exponent_delta: complex
    u: np.ndarray
    branch_note: tuple
    convention: str
    gram: np.ndarray = field(default=None, repr=False)
    determinant: complex = None


@dataclass(frozen=True)
class PropagatorValue:
    model: MagneticModel
    y: tuple
    value: complex
    convention: str
    printed_value: complex = None     # as-quoted cos-prefactor formula, for comparison
    report: TTransformReport = field(default=None, repr=False)


@dataclass(frozen=True)
class CausticClassification:
    classification: str               # regular | integer_caustic | half_integer_caustic
    kt: float
    distance: float                   # |kt - nearest caustic value of kt|


class LemmaEvaluator:
    """Numeric ingredients of the master T-transform, computed once per (K, L, etas).

    The determinant of Id + L(Id+K)^{-1} comes from an eigen-decomposition
    (symmetric fast path when the product is real symmetric), N = Id+K+L is
    LU-factorized, and the Gram matrix of the pinning directions is built
    from resolvent solves.  ``evaluate`` is then cheap per test function.
    """

    def __init__(self, K: BlockOperator, L: BlockOperator, etas=(), gram_tol=1e-8):
        if K.grid != L.grid:
            raise InvalidParameterError("K and L must live on the same grid")
        self.grid = K.grid
        self.etas = tuple(etas)
        for eta in self.etas:
            if eta.grid != self.grid:
                raise InvalidParameterError("every eta must live on the operator grid")

        n2 = 2 * self.grid.n
        id_plus_k = np.eye(n2, dtype=complex) + K.entries
        # Fast path: K diagonal (the free kernel is), else a dense solve.
        if np.count_nonzero(id_plus_k - np.diag(np.diagonal(id_plus_k))) == 0:
            core = L.entries * (1.0 / np.diagonal(id_plus_k))[None, :]
        else:
            core = L.entries @ np.linalg.inv(id_plus_k)

        if (np.abs(core.imag).max(initial=0.0) <= 1e-12 * max(1.0, np.abs(core).max())
                and np.abs(core - core.T).max() <= 1e-10 * max(1.0, np.abs(core).max())):
            self.core_eigs = np.linalg.eigvalsh(core.real.astype(float)).astype(complex)
        else:
            self.core_eigs = np.linalg.eigvals(core)
        self.determinant = complex(np.prod(1.0 + self.core_eigs))
        if abs(self.determinant) < 1e-12:
            raise CausticError(
                f"det(Id + L(Id+K)^{{-1}}) = {self.determinant:.3g} is singular",
                classification="half_integer_caustic")

        n_matrix = id_plus_k + L.entries
        self._n_lu = sla.lu_factor(n_matrix)
        anorm = np.linalg.norm(n_matrix, 1)
        rcond, _ = sla.lapack.zgecon(self._n_lu[0], anorm)
        self.cond_estimate = np.inf if rcond == 0 else 1.0 / rcond
        if self.cond_estimate > 1e12:
            raise NearSingularError("N = Id+K+L is numerically singular",
                                    cond_estimate=self.cond_estimate)

        j = len(self.etas)
        self.gram = np.empty((j, j), dtype=complex)
        solved = [self._solve_vec(eta.as_vector()) for eta in self.etas]
        for a in range(j):
            for b in range(j):
                self.gram[a, b] = _pair_vec(self.grid, self.etas[a].as_vector(), solved[b])
        if j:
            self._check_gram(gram_tol)

    def _solve_vec(self, vec: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self._n_lu, vec.astype(complex))

    def _check_gram(self, tol: float) -> None:
        m = self.gram
        scale = np.abs(m).max()
        re, im = m.real, m.imag
        if np.abs(re).max() <= tol * max(scale, 1e-300):
            if np.abs(im).max() == 0:
                raise ConditionViolationError("Gram matrix vanishes identically")
            self.gram_branch = "imaginary"
            return
        try:
            re_eigs = np.linalg.eigvalsh((re + re.T) / 2.0)
        except np.linalg.LinAlgError as exc:
            raise ConditionViolationError(f"Gram real part not diagonalizable: {exc}")
        if np.all(re_eigs > 0):
            self.gram_branch = "positive_real"
            return
        raise ConditionViolationError(
            "Gram matrix is neither positive-real nor purely imaginary; "
            "the pinned product is not defined for these directions")

    def evaluate(self, f: GridFunctionPair | None = None, ys=(),
                 g_fn: GridFunctionPair | None = None) -> TTransformReport:
        ys = np.asarray(ys, dtype=float)
        j = len(self.etas)
        if ys.shape != (j,):
            raise InvalidParameterError(f"need {j} pinning values, got shape {ys.shape}")

        notes: list = []
        phi = _combine(self.grid, f, g_fn)
        if phi is None:
            exponent_quadratic = 0.0 + 0.0j
            n_inv_phi = None
        else:
            n_inv_phi = self._solve_vec(phi)
            exponent_quadratic = -0.5 * _pair_vec(self.grid, phi, n_inv_phi)

        det_factor = 1.0 / _branch_sqrt(self.determinant, notes, "det(Id+L(Id+K)^-1)")

        if j == 0:
            gram_factor = 1.0 + 0.0j
            u = np.zeros(0, dtype=complex)
            exponent_delta = 0.0 + 0.0j
        else:
            det_m = complex(np.linalg.det(self.gram))
            gram_factor = 1.0 / _branch_sqrt((2.0 * np.pi) ** j * det_m, notes,
                                             "(2pi)^J det(M)")
            u = np.empty(j, dtype=complex)
            for a in range(j):
                coupling = 0.0 + 0.0j
                if n_inv_phi is not None:
                    coupling = _pair_vec(self.grid, self.etas[a].as_vector(), n_inv_phi)
                u[a] = 1j * ys[a] + coupling
            # Sign fixed by performing the Gaussian integrals over the pinning
            # parameters: completing the square yields +1/2 u^T M^{-1} u.
            exponent_delta = 0.5 * complex(u @ np.linalg.solve(self.gram, u))
            notes.append("delta exponent: +1/2 u^T M^-1 u (Gaussian-integral composition)")

        value = det_factor * gram_factor * np.exp(exponent_quadratic + exponent_delta)
        return TTransformReport(value=complex(value), det_factor=complex(det_factor),
                                gram_factor=complex(gram_factor),
                                exponent_quadratic=complex(exponent_quadratic),
                                exponent_delta=complex(exponent_delta),
                                u=u, branch_note=tuple(notes), convention="composed",
                                gram=self.gram.copy(), determinant=self.determinant)


def _pair_vec(g: Grid, u_vec: np.ndarray, v_vec: np.ndarray) -> complex:
    return pair(pair_from_vector(g, u_vec), pair_from_vector(g, v_vec))


def _combine(g: Grid, f, g_fn):
    vecs = [x.as_vector() for x in (f, g_fn) if x is not None]
    for x in (f, g_fn):
        if x is not None and x.grid != g:
            raise InvalidParameterError("test function lives on a different grid")
    if not vecs:
        return None
    total = sum(vecs)
    if not np.any(total):
        return None
    return total


def lemma_T(K: BlockOperator, L: BlockOperator, g_fn, etas, ys,
            f: GridFunctionPair | None = None) -> TTransformReport:
    """One-shot evaluation of the master formula; see :class:`LemmaEvaluator`."""
    return LemmaEvaluator(K, L, etas).evaluate(f=f, ys=ys, g_fn=g_fn)


def caustic_check(m: MagneticModel) -> CausticClassification:
    """Classify kt against the exclusion set {n pi} u {(n + 1/2) pi}."""
    kt = m.k * m.t
    if m.k == 0:
        return CausticClassification(classification="regular", kt=0.0,
                                     distance=float("inf"))
    half = np.pi / 2.0
    nearest_idx = round(kt / half)
    distance = abs(kt - nearest_idx * half)
    if distance <= 1e-9 * max(1.0, abs(kt)):
        kind = "integer_caustic" if nearest_idx % 2 == 0 else "half_integer_caustic"
        return CausticClassification(classification=kind, kt=kt, distance=distance)
    return CausticClassification(classification="regular", kt=kt, distance=distance)


def _require_regular(m: MagneticModel) -> None:
    cls = caustic_check(m)
    if cls.classification != "regular":
        raise CausticError(f"kt = {cls.kt:.6g} is a {cls.classification}",
                           classification=cls.classification, kt=cls.kt)


def magnetic_T(m: MagneticModel, y, f: GridFunctionPair | None = None,
               n_grid: int = 1000, convention: str = "composed") -> TTransformReport:
    """Closed-form specialization of the T-transform for the magnetic model.

    Uses the closed-form preimages, the analytic determinant cos^2(kt) and
    the analytic Gram matrix (i/k) tan(kt) Id.  Only the quadratic term in a
    nonzero test function requires one numeric resolvent solve.
    """
    if convention not in ("composed", "printed"):
        raise InvalidParameterError(f"unknown convention {convention!r}")
    _require_regular(m)
    y = np.asarray(y, dtype=float)
    if y.shape != (2,):
        raise InvalidParameterError(f"endpoint must be a real pair, got shape {y.shape}")

    g = f.grid if f is not None else make_grid(m.t, n_grid)
    notes = [f"analytic determinant cos^2(kt) = {np.cos(m.k * m.t) ** 2:.6g}"]

    if m.k == 0:
        pre_f = None
        gram_diag = 1j * m.t
        det_factor = 1.0 + 0.0j
    else:
        check_away_from_caustic(m)
        pre_f = closed_preimage_f(m, g)
        gram_diag = analytic_gram_diagonal(m)
        # Branch: sqrt(cos^2) = cos, continuous from the t -> 0+ limit on the
        # first caustic-free interval and consistent with the sin-form prefactor.
        det_factor = 1.0 / complex(np.cos(m.k * m.t))
        notes.append("det branch: sqrt(cos^2(kt)) = cos(kt) (continuity in t)")

    gram = gram_diag * np.eye(2, dtype=complex)
    # sqrt((2pi)^2 det M) = 2 pi i mu for det M = (i mu)^2, mu = tan(kt)/k:
    # the branch that reproduces the free propagator normalization.
    mu = m.t if m.k == 0 else np.tan(m.k * m.t) / m.k
    gram_factor = 1.0 / (2.0 * np.pi * 1j * mu)
    notes.append("gram branch: sqrt(det M) = i tan(kt)/k (free-limit continuity)")

    if f is None or not (np.any(f.comp1) or np.any(f.comp2)):
        exponent_quadratic = 0.0 + 0.0j
        coupling = np.zeros(2, dtype=complex)
    else:
        n_inv_f = solve_N(m, g, f)
        exponent_quadratic = -0.5 * pair(f, n_inv_f)
        if pre_f is None:
            c1 = pair(indicator_pair(g, 1), n_inv_f)
            c2 = pair(indicator_pair(g, 2), n_inv_f)
        else:
            pre_g = closed_preimage_g(m, g)
            c1 = pair(pre_f, f)
            c2 = pair(pre_g, f)
        coupling = np.array([c1, c2])

    u = 1j * y + coupling
    minv = 1.0 / gram_diag
    sign = +0.5 if convention == "composed" else -0.5
    exponent_delta = sign * minv * complex(u @ u)
    notes.append(f"delta exponent sign: {'+' if sign > 0 else '-'}1/2 u^T M^-1 u "
                 f"({convention})")

    value = det_factor * gram_factor * np.exp(exponent_quadratic + exponent_delta)
    return TTransformReport(value=complex(value), det_factor=complex(det_factor),
                            gram_factor=complex(gram_factor),
                            exponent_quadratic=complex(exponent_quadratic),
                            exponent_delta=complex(exponent_delta), u=u,
                            branch_note=tuple(notes), convention=convention,
                            gram=gram, determinant=complex(np.cos(m.k * m.t) ** 2))


def printed_propagator_value(m: MagneticModel, y) -> complex:
    """The as-quoted closed formula k/(2 pi i cos(kt)) exp(+(ik/2) cot(kt) |y|^2).

    Kept verbatim for comparison; it does not recover the free propagator as
    k -> 0 and is not the value this package vouches for.
    """
    y = np.asarray(y, dtype=float)
    kt = m.k * m.t
    if m.k == 0:
        return free_limit_reference(m.t, y)
    return (m.k / (2.0 * np.pi * 1j * np.cos(kt))
            * np.exp(0.5j * m.k / np.tan(kt) * float(y @ y)))


def composed_closed_value(m: MagneticModel, y, convention: str = "composed") -> complex:
    """Closed form of the composed generalized expectation.

    k/(2 pi i sin(kt)) exp(+-(ik/2) cot(kt) |y|^2); the '+' sign is the
    composed convention, '-' the alternative under adjudication.
    """
    y = np.asarray(y, dtype=float)
    r2 = float(y @ y)
    sign = +1.0 if convention == "composed" else -1.0
    if m.k == 0:
        return 1.0 / (2.0 * np.pi * 1j * m.t) * np.exp(sign * 0.5j * r2 / m.t)
    kt = m.k * m.t
    return (m.k / (2.0 * np.pi * 1j * np.sin(kt))
            * np.exp(sign * 0.5j * m.k / np.tan(kt) * r2))


def propagator(m: MagneticModel, y, n_grid: int = 600) -> PropagatorValue:
    """Generalized expectation by full numeric composition.

    Numeric determinant, numeric Gram matrix and numeric resolvent; the
    as-quoted cos-prefactor formula is attached for comparison only.
    """
    _require_regular(m)
    y = np.asarray(y, dtype=float)
    g = make_grid(m.t, n_grid)
    evaluator = LemmaEvaluator(free_K(m, g), magnetic_L(m, g),
                               etas=(indicator_pair(g, 1), indicator_pair(g, 2)))
    report = evaluator.evaluate(ys=y)
    return PropagatorValue(model=m, y=(float(y[0]), float(y[1])),
                           value=report.value, convention="composed",
                           printed_value=printed_propagator_value(m, y),
                           report=report)


def external_force_green(m: MagneticModel, y, force: GridFunctionPair,
                         convention: str = "composed") -> complex:
    """Green's function under an external force: the T-transform at the force."""
    return magnetic_T(m, y, f=force, convention=convention).value


def free_limit_reference(t: float, y) -> complex:
    """Free 2D quantum propagator 1/(2 pi i t) exp(i |y|^2 / (2t)), hbar = m = 1."""
    if not t > 0:
        raise InvalidParameterError(f"time must be positive, got {t}")
    y = np.asarray(y, dtype=float)
    return 1.0 / (2.0 * np.pi * 1j * t) * np.exp(0.5j * float(y @ y) / t)


@dataclass(frozen=True)
class SchrodingerResidualReport:
    model: MagneticModel
    convention: str
    residual: float                   # ||i dG/dt - H G|| / ||G|| on the interior
    y_step: float
    t_step: float


def schrodinger_residual(m: MagneticModel, y_half: float = 1.0, n_y: int = 21,
                         t_span=(0.5, 1.0), n_t: int = 21,
                         convention: str = "composed") -> SchrodingerResidualReport:
    """Finite-difference residual of the composed propagator in the
    symmetric-gauge magnetic Schrödinger equation.

    The Hamiltonian is the Legendre transform of the Lagrangian
    (1/2)(xdot1^2 + xdot2^2) + k (x1 xdot2 - xdot1 x2): canonical momenta
    p1 = xdot1 - k x2, p2 = xdot2 + k x1 give

        H = 1/2 [ (p1 + k y2)^2 + (p2 - k y1)^2 ],   p = -i d/dy.

    Expanded with central differences:
        H G = 1/2 [ -lap G - 2ik y2 dG/dy1 + 2ik y1 dG/dy2 + k^2 |y|^2 G ].
    """
    t0, t1 = t_span
    if not 0 < t0 < t1:
        raise InvalidParameterError(f"invalid time span {t_span}")
    if n_y < 5 or n_t < 5:
        raise InvalidParameterError("need at least 5 nodes per axis")
    for t_edge in np.linspace(t0, t1, n_t):
        cls = caustic_check(MagneticModel(k=m.k, t=float(t_edge))) if m.k else None
        if cls is not None and cls.classification != "regular":
            raise CausticError(f"caustic at t = {t_edge:.6g} inside the time span",
                               classification=cls.classification, kt=cls.kt)

    y_axis = np.linspace(-y_half, y_half, n_y)
    t_axis = np.linspace(t0, t1, n_t)
    hy = y_axis[1] - y_axis[0]
    ht = t_axis[1] - t_axis[0]
    y1 = y_axis[:, None]
    y2 = y_axis[None, :]

    def g_at(t):
        r2 = y1 ** 2 + y2 ** 2
        sign = +1.0 if convention == "composed" else -1.0
        if m.k == 0:
            return 1.0 / (2.0 * np.pi * 1j * t) * np.exp(sign * 0.5j * r2 / t)
        kt = m.k * t
        return (m.k / (2.0 * np.pi * 1j * np.sin(kt))
                * np.exp(sign * 0.5j * m.k / np.tan(kt) * r2))

    g_vals = np.stack([g_at(t) for t in t_axis])        # (t, y1, y2)

    dt = (g_vals[2:] - g_vals[:-2]) / (2.0 * ht)
    inner = g_vals[1:-1]
    d1 = (inner[:, 2:, 1:-1] - inner[:, :-2, 1:-1]) / (2.0 * hy)
    d2 = (inner[:, 1:-1, 2:] - inner[:, 1:-1, :-2]) / (2.0 * hy)
    lap = ((inner[:, 2:, 1:-1] - 2 * inner[:, 1:-1, 1:-1] + inner[:, :-2, 1:-1])
           + (inner[:, 1:-1, 2:] - 2 * inner[:, 1:-1, 1:-1] + inner[:, 1:-1, :-2])) / hy ** 2

    yy1 = y1[1:-1, :]
    yy2 = y2[:, 1:-1]
    core = inner[:, 1:-1, 1:-1]
    h_g = 0.5 * (-lap
                 - 2j * m.k * yy2[None, :, :] * d1
                 + 2j * m.k * yy1[None, :, :] * d2
                 + (m.k ** 2) * (yy1 ** 2 + yy2 ** 2)[None, :, :] * core)

    res = 1j * dt[:, 1:-1, 1:-1] - h_g
    rel = float(np.linalg.norm(res) / np.linalg.norm(core))
    return SchrodingerResidualReport(model=m, convention=convention, residual=rel,
                                     y_step=float(hy), t_step=float(ht))


def residual_convergence(m: MagneticModel, convention: str = "composed",
                         levels: int = 3, y_half: float = 1.0, base_n: int = 11,
                         t_span=(0.5, 1.0)) -> list:
    """Residuals under simultaneous step halving; orders in the gaps."""
    reports = []
    n = base_n
    for _ in range(levels):
        reports.append(schrodinger_residual(m, y_half=y_half, n_y=n,
                                            t_span=t_span, n_t=n,
                                            convention=convention))
        n = 2 * (n - 1) + 1
    return reports
