from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from bvjet.exprcore import LEFT, RIGHT, cos, total_derivative_multi
from bvjet.functionals import functional_equal, integral, is_trivial, laplacian_jet, schouten_jet
from bvjet.funcalc import (
    ExtendedFunctional,
    ext_multiply,
    functional_derivative,
    functional_laplacian,
    functional_schouten,
    lift,
    restrict_to_diagonal,
)
from bvjet.randgen import DEFAULT_FIELDS, TWO_FIELDS, random_active_block, random_block
from bvjet.suites import counterexample_pair, excounter2_report

FC = DEFAULT_FIELDS
q, p = FC.var("q"), FC.var("p")
q_x, q_xx = FC.var("q", (1,)), FC.var("q", (1, 1))

seeds = st.integers(0, 10_000)


def active(seed, parity=None, fc=TWO_FIELDS):
    return random_active_block(random.Random(seed), fc, parity, 2)


def sign(k):
    return -1 if k % 2 else 1


def test_lift_then_restrict_is_identity():
    _, F, G = counterexample_pair()
    assert restrict_to_diagonal(lift(F * G)) == F * G


def test_excounter2_frozen_values():
    r = excounter2_report()
    assert r["Delta F"] == "1 * <q|q_xx@e0, p@e0>\n1 * <q_xx|q@e0, p@e0>"
    assert r["Delta G"] == "-1 * <sin(q)|q@e0, p_xx@e0>"
    assert r["Delta [[F,G]]"] == "1 * <q*q_xx|p@e0> * <cos(q)|q@e0, q@e1, p_xx@e1>"
    assert r["[[Delta F, G]]"] == "0"
    assert r["[[F, Delta G]]"] == r["Delta [[F,G]]"]
    assert len(r["cancelled"]) == 2
    assert r["derivation exact"] and r["diagonal matches"]


def test_excounter2_diagonal_is_q_qxx_times_second_derivative_of_cos():
    _, F, G = counterexample_pair()
    LB = functional_laplacian(functional_schouten(lift(F), lift(G)))
    expected = integral(FC, q * q_xx * total_derivative_multi(cos(q), (1, 1)))
    assert functional_equal(restrict_to_diagonal(LB), expected)
    assert not is_trivial(restrict_to_diagonal(LB))


def test_laplacian_of_pairing_on_one_copy():
    E = functional_laplacian(lift(integral(FC, p * q)))
    assert restrict_to_diagonal(E) == integral(FC, q ** 0)


def test_bracket_and_laplacian_reject_free_slots():
    E = functional_derivative(lift(integral(FC, p * q)), FC["q"], "y")
    with pytest.raises(ValueError, match="free test-shift slot"):
        functional_laplacian(E)
    with pytest.raises(ValueError, match="free test-shift slot"):
        functional_schouten(E, E)
    with pytest.raises(ValueError):
        restrict_to_diagonal(E)


def test_labels_must_be_fresh():
    E = functional_derivative(lift(integral(FC, p * q)), FC["q"], "y")
    with pytest.raises(ValueError, match="fresh"):
        functional_derivative(E, FC["p"], "y")


def test_canonical_form_forgets_factor_order():
    A = lift(integral(TWO_FIELDS, TWO_FIELDS.var("c") * TWO_FIELDS.var("q")))
    B = lift(integral(TWO_FIELDS, TWO_FIELDS.var("b", (1,))))
    assert ext_multiply(A, B) == ext_multiply(B, A)
    C = lift(integral(TWO_FIELDS, TWO_FIELDS.var("c", (1,))))
    assert ext_multiply(A, C) == ext_multiply(C, A).scale(-1)


def test_hbar_parts_and_constants():
    E = lift(integral(FC, p * q)).times_constant(h=2, i=1, c=3)
    assert set(E.hbar_parts()) == {2}
    assert E.times_constant(i=1) == lift(integral(FC, p * q)).times_constant(h=2, c=-3)


@settings(max_examples=30, deadline=None)
@given(seeds, seeds)
def test_bracket_restricts_to_jet_bracket_on_blocks(s1, s2):
    F, G = active(s1), active(s2)
    assert functional_equal(restrict_to_diagonal(functional_schouten(lift(F), lift(G))), schouten_jet(F, G))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_laplacian_restricts_to_jet_laplacian_on_blocks(seed):
    F = active(seed)
    assert functional_equal(restrict_to_diagonal(functional_laplacian(lift(F))), laplacian_jet(F))


@settings(max_examples=30, deadline=None)
@given(seeds, seeds)
def test_functional_laplacian_squares_to_zero(s1, s2):
    E = lift(active(s1) * active(s2))
    assert functional_laplacian(functional_laplacian(E)).is_zero()


@settings(max_examples=25, deadline=None)
@given(seeds, seeds, st.integers(0, 1), st.integers(0, 1))
def test_derivation_holds_exactly(s1, s2, pF, pG):
    F, G = lift(active(s1, pF, FC)), lift(active(s2, pG, FC))
    lhs = functional_laplacian(functional_schouten(F, G))
    rhs = (functional_schouten(functional_laplacian(F), G)
           + functional_schouten(F, functional_laplacian(G)).scale(sign(pF - 1)))
    assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([LEFT, RIGHT]))
def test_functional_derivatives_commute(seed, side):
    F = lift(random_block(random.Random(seed), TWO_FIELDS, None, 3))
    for a in TWO_FIELDS.coordinates:
        for b in TWO_FIELDS.coordinates:
            one = functional_derivative(functional_derivative(F, a, "y1", side), b, "y2", side)
            two = functional_derivative(functional_derivative(F, b, "y2", side), a, "y1", side)
            assert one == two


@settings(max_examples=20, deadline=None)
@given(seeds, seeds, st.integers(0, 1), st.integers(0, 1))
def test_skew_symmetry_of_extended_bracket(s1, s2, pF, pG):
    F, G = lift(active(s1, pF)), lift(active(s2, pG))
    assert functional_schouten(F, G) == functional_schouten(G, F).scale(-sign((pF - 1) * (pG - 1)))


def test_zero_and_unit():
    U = ExtendedFunctional.unit(FC)
    E = lift(integral(FC, p * q))
    assert ext_multiply(U, E) == E
    assert functional_laplacian(U).is_zero()
    assert functional_schouten(U, E).is_zero()
