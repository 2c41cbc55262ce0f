from __future__ import annotations

import random

from hypothesis import given, settings, strategies as st

from bvjet.exprcore import cos, sin, total_derivative
from bvjet.functionals import (
    LocalFunctional,
    functional_equal,
    integral,
    is_trivial,
    laplacian_jet,
    multiply,
    schouten_jet,
)
from bvjet.randgen import DEFAULT_FIELDS, TWO_FIELDS, random_block, random_density
from bvjet.suites import counterexample_pair

FC = DEFAULT_FIELDS
q, p = FC.var("q"), FC.var("p")
q_x, q_xx = FC.var("q", (1,)), FC.var("q", (1, 1))

seeds = st.integers(0, 10_000)


def block(seed, parity=None, fc=TWO_FIELDS):
    return random_block(random.Random(seed), fc, parity, 2)


def sign(k):
    return -1 if k % 2 else 1


def test_blocks_commute_with_koszul_sign():
    c = TWO_FIELDS.var("c")
    A = integral(TWO_FIELDS, c)
    B = integral(TWO_FIELDS, TWO_FIELDS.var("c", (1, 1)) * TWO_FIELDS.var("q"))
    assert A * B == (B * A).scale(-1)
    assert (A * A).is_zero()


def test_divergence_blocks_are_trivial():
    F = integral(FC, total_derivative(p * q * q_xx, 1))
    assert not F.is_zero()
    assert is_trivial(F)
    assert is_trivial(F * integral(FC, q))


def test_constant_block_is_not_trivial():
    assert not is_trivial(integral(FC, q ** 0))


def test_integration_by_parts_identifies_densities():
    assert functional_equal(integral(FC, q * q_xx), integral(FC, -(q_x ** 2)))


def test_bracket_of_antifield_and_field_blocks():
    assert schouten_jet(integral(FC, q), integral(FC, p)) == integral(FC, q ** 0)
    assert schouten_jet(integral(FC, p), integral(FC, q)) == integral(FC, q ** 0).scale(-1)


def test_jet_laplacian_of_a_pairing():
    assert laplacian_jet(integral(FC, p * q)) == integral(FC, q ** 0)


def test_jet_laplacian_forms_differ_on_counterexample():
    _, F, _ = counterexample_pair()
    assert laplacian_jet(F) == integral(FC, q_xx).scale(2)
    assert laplacian_jet(F, form="partial") == integral(FC, q_xx)
    assert is_trivial(laplacian_jet(F)) and is_trivial(laplacian_jet(F, form="partial"))


def test_counterexample_values():
    _, F, G = counterexample_pair()
    assert laplacian_jet(G).is_zero()
    lb = laplacian_jet(schouten_jet(F, G))
    expected = integral(FC, q_xx ** 2 * cos(q) - q_xx * q_x ** 2 * sin(q)).scale(-2)
    assert functional_equal(lb, expected)
    assert not is_trivial(lb)
    rhs = schouten_jet(laplacian_jet(F), G) - schouten_jet(F, laplacian_jet(G))
    assert not functional_equal(lb, rhs)


@settings(max_examples=40, deadline=None)
@given(seeds, seeds)
def test_bracket_is_graded_skew(s1, s2):
    for pf in (0, 1):
        for pg in (0, 1):
            F, G = block(s1, pf), block(s2, pg)
            assert functional_equal(schouten_jet(F, G),
                                    schouten_jet(G, F).scale(-sign((pf - 1) * (pg - 1))))


@settings(max_examples=15, deadline=None)
@given(seeds, seeds, seeds, st.integers(0, 7))
def test_jacobi_identity(s1, s2, s3, parities):
    pf, pg, ph = parities & 1, (parities >> 1) & 1, (parities >> 2) & 1
    F, G, H = block(s1, pf, FC), block(s2, pg, FC), block(s3, ph, FC)
    lhs = schouten_jet(F, schouten_jet(G, H))
    rhs = schouten_jet(schouten_jet(F, G), H) + schouten_jet(G, schouten_jet(F, H)).scale(sign((pf - 1) * (pg - 1)))
    assert functional_equal(lhs, rhs)


@settings(max_examples=30, deadline=None)
@given(seeds, seeds, seeds)
def test_bracket_is_a_derivation_in_products(s1, s2, s3):
    # a product of blocks only involves block brackets, so both sides are jet-level
    F, G, H = block(s1, 1), block(s2, 0), block(s3, 1)
    lhs = schouten_jet(F, multiply(G, H))
    rhs = multiply(schouten_jet(F, G), H) + multiply(G, schouten_jet(F, H))
    assert functional_equal(lhs, rhs)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_jet_laplacian_squares_to_zero(seed):
    F = block(seed)
    assert is_trivial(laplacian_jet(laplacian_jet(F)))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_trivial_test_agrees_with_adding_divergences(seed):
    rng = random.Random(seed)
    f = random_density(rng, TWO_FIELDS, 2, 3)
    g = random_density(rng, TWO_FIELDS, 2, 3)
    F = integral(TWO_FIELDS, f)
    assert functional_equal(F, integral(TWO_FIELDS, f + total_derivative(g, 1)))


def test_unit_and_zero():
    one = LocalFunctional.unit(FC)
    F = integral(FC, p * q)
    assert one * F == F
    assert (LocalFunctional.zero(FC) * F).is_zero()
