"""T-transform composition, propagator values, caustics, residual checks."""

import numpy as np
import pytest

from hida_lab import (CausticError, InvalidParameterError, MagneticModel,
                      caustic_check, composed_closed_value,
                      external_force_green, free_limit_reference, lemma_T,
                      magnetic_T, printed_propagator_value, propagator,
                      residual_convergence, schrodinger_residual)
from hida_lab.errors import ConditionViolationError
from hida_lab.feynman import LemmaEvaluator
from hida_lab.gausskernels import donsker_T
from hida_lab.grid import GridFunctionPair, make_grid, pair, sample
from hida_lab.operators import BlockOperator, free_K, magnetic_L
from hida_lab.testfunctions import TestFunctionSpec, generate, indicator_pair

M11 = MagneticModel(k=1.0, t=1.0)


def _zero_op(g):
    return BlockOperator(grid=g, entries=np.zeros((2 * g.n, 2 * g.n), dtype=complex))


# ---------------------------------------------------------------- caustics

def test_caustic_classification_exact_points():
    assert caustic_check(MagneticModel(k=1.0, t=np.pi)).classification == "integer_caustic"
    assert caustic_check(MagneticModel(k=1.0, t=np.pi / 2)).classification == \
        "half_integer_caustic"
    assert caustic_check(MagneticModel(k=2.0, t=np.pi)).classification == "integer_caustic"
    assert caustic_check(M11).classification == "regular"
    assert caustic_check(MagneticModel(k=0.0, t=5.0)).classification == "regular"


def test_caustic_distance_is_reported():
    cls = caustic_check(M11)
    assert cls.distance == pytest.approx(np.pi / 2 - 1.0)


def test_propagator_refuses_caustic_times():
    with pytest.raises(CausticError) as exc:
        propagator(MagneticModel(k=1.0, t=np.pi), (0.0, 0.0))
    assert exc.value.classification == "integer_caustic"
    with pytest.raises(CausticError):
        magnetic_T(MagneticModel(k=1.0, t=np.pi / 2), (0.0, 0.0))


# ------------------------------------------------- master-formula reductions

def test_lemma_reduces_to_pinned_delta():
    """K = L = 0 and one unit-norm pinning direction reproduce the
    pinned-delta transform exactly, test function included."""
    g = make_grid(1.0, 150)
    eta = indicator_pair(g, 1)
    f = generate(TestFunctionSpec(kind="gaussian_bump", center=0.5, width=0.08), g)
    for x in (0.0, 0.7, -1.1):
        rep = lemma_T(_zero_op(g), _zero_op(g), None, (eta,), [x], f=f)
        expected = donsker_T(1.0, pair(eta, f), pair(f, f), x)
        assert rep.value == pytest.approx(expected, rel=1e-12)


def test_lemma_reduces_to_normalized_exponential():
    """No pinning directions: det^{-1/2} exp(-(f, N^{-1} f)/2)."""
    g = make_grid(1.0, 200)
    f = sample(lambda s: np.exp(-((s - 0.5) / 0.1) ** 2), 0.0, g)
    rep = lemma_T(free_K(M11, g), magnetic_L(M11, g), None, (), [], f=f)
    from hida_lab.fredholm import solve_N
    quad = pair(f, solve_N(M11, g, f))
    det = rep.determinant
    assert det == pytest.approx(np.cos(1.0) ** 2, abs=5e-3)
    assert rep.value == pytest.approx(det ** -0.5 * np.exp(-0.5 * quad), rel=1e-12)


def test_lemma_gram_branch_positive_real():
    g = make_grid(1.0, 60)
    evaluator = LemmaEvaluator(_zero_op(g), _zero_op(g), etas=(indicator_pair(g, 1),))
    assert evaluator.gram_branch == "positive_real"


def test_lemma_gram_branch_imaginary():
    g = make_grid(1.0, 60)
    evaluator = LemmaEvaluator(free_K(M11, g), magnetic_L(M11, g),
                               etas=(indicator_pair(g, 1), indicator_pair(g, 2)))
    assert evaluator.gram_branch == "imaginary"
    np.testing.assert_allclose(evaluator.gram.real, 0.0, atol=1e-12)


def test_lemma_rejects_inadmissible_gram():
    g = make_grid(1.0, 40)
    bad_eta = GridFunctionPair(grid=g, comp1=1j * np.ones(g.n),
                               comp2=np.zeros(g.n, dtype=complex))
    with pytest.raises(ConditionViolationError):
        LemmaEvaluator(_zero_op(g), _zero_op(g), etas=(bad_eta,))


def test_lemma_input_validation():
    g = make_grid(1.0, 20)
    with pytest.raises(InvalidParameterError):
        LemmaEvaluator(_zero_op(g), _zero_op(make_grid(1.0, 21)))
    evaluator = LemmaEvaluator(_zero_op(g), _zero_op(g), etas=(indicator_pair(g, 1),))
    with pytest.raises(InvalidParameterError):
        evaluator.evaluate(ys=[1.0, 2.0])


# ----------------------------------------------------- two evaluation paths

def test_two_paths_agree_on_test_functions():
    g = make_grid(1.0, 400)
    y = (0.3, -0.4)
    evaluator = LemmaEvaluator(free_K(M11, g), magnetic_L(M11, g),
                               etas=(indicator_pair(g, 1), indicator_pair(g, 2)))
    f = generate(TestFunctionSpec(kind="gaussian_bump", center=0.45, width=0.06), g)
    numeric = evaluator.evaluate(f=f, ys=y).value
    closed = magnetic_T(M11, y, f=f).value
    assert closed == pytest.approx(numeric, rel=3e-3)


def test_propagator_matches_closed_form():
    y = (0.3, -0.4)
    value = propagator(M11, y, n_grid=500).value
    assert value == pytest.approx(composed_closed_value(M11, y), rel=2e-3)


def test_magnetic_T_without_test_function_is_the_closed_value():
    y = (0.2, 0.1)
    rep = magnetic_T(M11, y)
    assert rep.value == pytest.approx(composed_closed_value(M11, y), rel=1e-12)


def test_printed_convention_flips_delta_exponent():
    y = (0.5, 0.0)
    composed = magnetic_T(M11, y, convention="composed")
    printed = magnetic_T(M11, y, convention="printed")
    assert printed.exponent_delta == pytest.approx(-composed.exponent_delta)
    with pytest.raises(InvalidParameterError):
        magnetic_T(M11, y, convention="other")


def test_external_force_green_equals_T_at_the_force():
    g = make_grid(1.0, 300)
    force = generate(TestFunctionSpec(kind="gaussian_bump", center=0.5, width=0.07), g)
    y = (0.1, 0.2)
    assert external_force_green(M11, y, force) == \
        pytest.approx(magnetic_T(M11, y, f=force).value)


# ------------------------------------------------------------- closed forms

def test_free_limit_reference_value():
    value = free_limit_reference(1.0, (1.0, 0.0))
    expected = 1.0 / (2 * np.pi * 1j) * np.exp(0.5j)
    assert value == pytest.approx(expected)
    with pytest.raises(InvalidParameterError):
        free_limit_reference(0.0, (1.0, 0.0))


def test_propagator_free_limit():
    y = (1.0, 0.0)
    free = free_limit_reference(1.0, y)
    value = propagator(MagneticModel(k=1e-3, t=1.0), y, n_grid=400).value
    assert abs(value - free) / abs(free) < 1e-3


def test_composed_and_printed_values_disagree_and_are_both_reported():
    y = (0.3, -0.4)
    pv = propagator(M11, y, n_grid=300)
    assert pv.printed_value == pytest.approx(printed_propagator_value(M11, y))
    assert abs(pv.value - pv.printed_value) > 0.05   # never silently reconciled
    assert printed_propagator_value(MagneticModel(k=0.0, t=1.0), y) == \
        pytest.approx(free_limit_reference(1.0, y))


def test_branch_notes_record_the_square_root_choices():
    rep = propagator(M11, (0.0, 0.0), n_grid=200).report
    notes = " ".join(rep.branch_note)
    assert "negative-real determinant" in notes
    assert "+1/2 u^T M^-1 u" in notes


# ------------------------------------------------------ equation residuals

def test_free_propagator_solves_free_equation():
    rep = schrodinger_residual(MagneticModel(k=0.0, t=1.0), n_y=21, n_t=21)
    assert rep.residual < 0.05


def test_residual_convergence_composed_second_order():
    reports = residual_convergence(MagneticModel(k=0.5, t=1.0), levels=3, base_n=11)
    res = [r.residual for r in reports]
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert orders[-1] > 1.9


def test_residual_printed_convention_does_not_converge():
    reports = residual_convergence(MagneticModel(k=0.5, t=1.0),
                                   convention="printed", levels=3, base_n=11)
    res = [r.residual for r in reports]
    assert np.log2(res[-2] / res[-1]) < 1.0


def test_residual_rejects_caustic_inside_time_span():
    with pytest.raises(CausticError):
        schrodinger_residual(M11, t_span=(np.pi / 2, 2.0))
    with pytest.raises(InvalidParameterError):
        schrodinger_residual(M11, t_span=(1.0, 0.5))
    with pytest.raises(InvalidParameterError):
        schrodinger_residual(M11, n_y=3)
