from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvjet.exprcore import (
    LEFT,
    RIGHT,
    Expr,
    FieldContent,
    JetVar,
    cos,
    euler_derivative,
    is_trivial_density,
    partial_derivative,
    sin,
    total_derivative,
    total_derivative_multi,
)
from bvjet.grassmann import GrassmannValue
from bvjet.oracle import PeriodicSection, gateaux_check
from bvjet.randgen import DEFAULT_FIELDS, TWO_FIELDS, random_density

FC = DEFAULT_FIELDS
q, p = FC.var("q"), FC.var("p")
q_x, q_xx = FC.var("q", (1,)), FC.var("q", (1, 1))
p_x, p_xx = FC.var("p", (1,)), FC.var("p", (1, 1))

seeds = st.integers(0, 10_000)


def density(seed, fc=TWO_FIELDS, **kw):
    return random_density(random.Random(seed), fc, **kw)


def test_odd_squares_vanish():
    c = TWO_FIELDS.var("c")
    assert (c * c).terms == {}
    assert (p * p).terms == {}


def test_odd_variables_anticommute():
    c, c_x = TWO_FIELDS.var("c"), TWO_FIELDS.var("c", (1,))
    assert c * c_x == -(c_x * c)


def test_imaginary_unit_squares_to_minus_one():
    from bvjet.exprcore import I

    assert I * I == Expr.const(-1)


def test_chain_rule_through_functions():
    assert total_derivative(sin(q), 1) == q_x * cos(q)
    assert total_derivative(cos(q), 1) == -(q_x * sin(q))


def test_text_prints_rationals_and_suffixes():
    e = (q_xx * p).scale(3) - q * q_x + p.scale(Fraction(1, 2))
    assert e.text() == "1/2*p - q*q_x + 3*q_xx*p"


def test_text_in_higher_dimension_uses_nested_derivatives():
    fc = FieldContent.from_pairs(4, [("q", 0, "p")])
    assert fc.var("q", (4, 4)).text() == "D(q, x4, 2)"


@settings(max_examples=40, deadline=None)
@given(seeds, seeds)
def test_product_is_graded_commutative(s1, s2):
    for pa in (0, 1):
        for pb in (0, 1):
            a, b = density(s1, parity=pa), density(s2, parity=pb)
            assert a * b == (b * a).scale(-1 if pa and pb else 1)


@settings(max_examples=40, deadline=None)
@given(seeds, seeds, seeds)
def test_product_is_associative(s1, s2, s3):
    a, b, c = density(s1), density(s2), density(s3)
    assert (a * b) * c == a * (b * c)


@settings(max_examples=40, deadline=None)
@given(seeds, seeds)
def test_total_derivative_is_a_derivation(s1, s2):
    a, b = density(s1), density(s2)
    assert total_derivative(a * b, 1) == total_derivative(a, 1) * b + a * total_derivative(b, 1)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_total_derivatives_commute(seed):
    fc = FieldContent.from_pairs(2, [("q", 0, "p"), ("c", 1, "b")])
    a = density(seed, fc)
    assert total_derivative_multi(a, (1, 2)) == total_derivative_multi(a, (2, 1))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_divergences_are_trivial(seed):
    a = density(seed)
    assert is_trivial_density(total_derivative(a, 1), TWO_FIELDS)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_euler_derivative_kills_divergences(seed):
    a = density(seed)
    for c in TWO_FIELDS.coordinates:
        assert euler_derivative(total_derivative(a, 1), c, RIGHT).terms == {}


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(0, 1))
def test_left_and_right_partials_differ_by_parity(seed, parity):
    a = density(seed, parity=parity)
    c = JetVar(TWO_FIELDS["c"])
    sign = -1 if (parity - 1) % 2 else 1
    assert partial_derivative(a, c, RIGHT) == partial_derivative(a, c, LEFT).scale(sign)


def test_counterexample_variational_derivatives():
    f = p * q * q_xx
    g = p_xx * cos(q)
    qc, pc = FC["q"], FC["p"]
    assert euler_derivative(f, qc, RIGHT) == (p * q_xx).scale(2) + p_xx * q + (p_x * q_x).scale(2)
    assert euler_derivative(f, pc, RIGHT) == q * q_xx
    assert euler_derivative(g, qc, LEFT) == -(p_xx * sin(q))
    assert euler_derivative(g, pc, LEFT) == -(q_xx * sin(q)) - q_x ** 2 * cos(q)


@pytest.mark.parametrize("seed", range(6))
def test_euler_derivative_matches_finite_differences(seed):
    rng = random.Random(seed)
    fc = FieldContent.from_pairs(1, [("q", 0, "u", 1), ("r", 0, "v", 1)])
    even = Expr()
    while not even.terms:
        # the sector without odd variables, where real sections suffice
        f = random_density(rng, fc, 3, 3, 0)
        even = Expr({m: c for m, c in f.terms.items() if not m.odds})
    for c in (fc["q"], fc["r"]):
        numeric, symbolic = gateaux_check(even, fc, c, np.random.default_rng(seed))
        assert numeric == pytest.approx(symbolic, rel=1e-5, abs=1e-7)


def test_grassmann_generators_anticommute():
    a, b = GrassmannValue.generator(0), GrassmannValue.generator(1)
    assert (a * b).allclose(-(b * a))
    assert (a * a).allclose(GrassmannValue.scalar(0.0))


@pytest.mark.parametrize("seed", range(5))
def test_evaluation_is_multiplicative(seed):
    rng = random.Random(seed)
    a = random_density(rng, TWO_FIELDS, 2, 2, functions=False)
    b = random_density(rng, TWO_FIELDS, 2, 2, functions=False)
    s = PeriodicSection(TWO_FIELDS, np.random.default_rng(seed))
    assert s.density_values(a * b).allclose(s.density_values(a) * s.density_values(b))


@pytest.mark.parametrize("seed", range(5))
def test_divergences_integrate_to_zero(seed):
    a = random_density(random.Random(seed), TWO_FIELDS, 2, 3, functions=False)
    s = PeriodicSection(TWO_FIELDS, np.random.default_rng(seed))
    assert np.allclose(s.integrate(total_derivative(a, 1)).coeffs, 0, atol=1e-9)
