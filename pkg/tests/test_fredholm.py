"""Resolvent solves, closed-form preimages, and the Gram matrix."""

import numpy as np
import pytest

from hida_lab import (CausticError, GridMismatchError, MagneticModel,
                      NearSingularError, analytic_gram_diagonal,
                      closed_preimage_f, closed_preimage_g, gram_matrix,
                      solve_N, verify_preimage)
from hida_lab.fredholm import check_away_from_caustic, resolvent
from hida_lab.grid import make_grid, sample
from hida_lab.operators import build_N
from hida_lab.testfunctions import indicator_pair

M11 = MagneticModel(k=1.0, t=1.0)


def test_solve_round_trips_through_N():
    g = make_grid(1.0, 400)
    rhs = sample(lambda s: np.sin(2 * s), lambda s: s, g)
    x = solve_N(M11, g, rhs)
    back = build_N(M11, g).apply(x)
    np.testing.assert_allclose(back.as_vector(), rhs.as_vector(), atol=1e-12)


def test_solve_of_real_rhs_is_purely_imaginary():
    g = make_grid(1.0, 200)
    x = solve_N(M11, g, indicator_pair(g, 1))
    assert np.abs(x.comp1.real).max() == 0.0
    assert np.abs(x.comp2.real).max() == 0.0


def test_solve_rejects_foreign_grid():
    g = make_grid(1.0, 100)
    rhs = indicator_pair(make_grid(1.0, 101), 1)
    with pytest.raises(GridMismatchError):
        solve_N(M11, g, rhs)


def test_closed_preimage_values_at_zero_coupling_limit():
    """As k -> 0 the preimage of (1,0) tends to (i, 0)."""
    g = make_grid(1.0, 50)
    f = closed_preimage_f(MagneticModel(k=1e-9, t=1.0), g)
    np.testing.assert_allclose(f.comp1, 1j, atol=1e-8)
    np.testing.assert_allclose(f.comp2, 0.0, atol=1e-8)


def test_closed_preimage_matches_solver():
    g = make_grid(1.0, 1000)
    closed = closed_preimage_f(M11, g)
    solved = solve_N(M11, g, indicator_pair(g, 1))
    assert np.abs(closed.as_vector() - solved.as_vector()).max() < 1e-5
    closed_g = closed_preimage_g(M11, g)
    solved_g = solve_N(M11, g, indicator_pair(g, 2))
    assert np.abs(closed_g.as_vector() - solved_g.as_vector()).max() < 1e-5


def test_preimage_g_is_rotation_of_f():
    g = make_grid(1.0, 64)
    f = closed_preimage_f(M11, g)
    gg = closed_preimage_g(M11, g)
    np.testing.assert_array_equal(gg.comp1, -f.comp2)
    np.testing.assert_array_equal(gg.comp2, f.comp1)


def test_residual_report_second_order():
    sups = [verify_preimage(M11, make_grid(1.0, n)).sup_f for n in (200, 400, 800)]
    orders = np.log2(np.array(sups[:-1]) / np.array(sups[1:]))
    assert np.all(orders > 1.9)
    assert sups[-1] < 1e-5


def test_gram_matrix_closed_form():
    g = make_grid(1.0, 1500)
    m = gram_matrix(M11, g, [indicator_pair(g, 1), indicator_pair(g, 2)])
    assert m.size == 2
    assert np.abs(m.entries.real).max() < 1e-12
    assert abs(m.entries[0, 1]) < 1e-12
    assert abs(m.entries[1, 0]) < 1e-12
    assert m.entries[0, 0] == pytest.approx(1j * np.tan(1.0), abs=1e-5)
    assert m.entries[1, 1] == pytest.approx(1j * np.tan(1.0), abs=1e-5)


def test_analytic_gram_diagonal_values():
    assert analytic_gram_diagonal(M11) == pytest.approx(1j * np.tan(1.0))
    assert analytic_gram_diagonal(MagneticModel(k=0.0, t=0.7)) == 0.7j
    # Continuity of the k -> 0 limit.
    small = analytic_gram_diagonal(MagneticModel(k=1e-6, t=0.7))
    assert small == pytest.approx(0.7j, abs=1e-9)


def test_caustic_guard_refuses_half_integer_times():
    near = MagneticModel(k=1.0, t=np.pi / 2.0)
    with pytest.raises(CausticError) as exc:
        check_away_from_caustic(near)
    assert exc.value.classification == "half_integer_caustic"
    with pytest.raises(CausticError):
        closed_preimage_f(near, make_grid(near.t, 32))


def test_resolvent_refuses_near_singular_system():
    """Just off the caustic the guard passes but the solve must still refuse."""
    m = MagneticModel(k=1.0, t=np.pi / 2.0 + 1e-7)
    with pytest.raises((NearSingularError, CausticError)):
        resolvent(m, make_grid(m.t, 64))


def test_resolvent_reports_condition_estimate():
    fact = resolvent(M11, make_grid(1.0, 64))
    assert 1.0 <= fact.cond_estimate < 1e3
