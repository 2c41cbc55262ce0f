from __future__ import annotations

import random

import pytest

from bvjet.funcalc import ExtendedFunctional, lift
from bvjet.functionals import integral
from bvjet.gauge import YangMillsModel, build_bv_action, su2
from bvjet.qme import (
    HbarSeries,
    check_qme,
    exp_identity_residual,
    exp_series,
    omega,
    omega_squared,
    power_lemmas,
    qme_residual,
)
from bvjet.randgen import DEFAULT_FIELDS, TWO_FIELDS, random_active_block
from bvjet.suites import qme_reference_action

FC = DEFAULT_FIELDS


@pytest.mark.parametrize("n", range(1, 6))
def test_power_lemmas_hold_exactly(n):
    rng = random.Random(n)
    F = random_active_block(rng, FC, 0, 3)
    G = random_active_block(rng, FC, None, 2)
    r = power_lemmas(G, F, n)
    assert r == {"bracket_exact": True, "bracket": True, "laplacian_exact": True, "laplacian": True}


def test_power_lemmas_need_even_input():
    F = random_active_block(random.Random(0), FC, 1, 2)
    with pytest.raises(ValueError, match="even"):
        power_lemmas(F, F, 2)


@pytest.mark.parametrize("seed", range(4))
def test_exp_identity_through_third_order(seed):
    F0 = random_active_block(random.Random(seed), FC, 0, 3)
    r = exp_identity_residual(lift(F0).times_constant(h=1), 3)
    assert r.is_zero()
    assert r.valid == 3


def test_exp_series_validity_drops_without_hbar():
    F = lift(integral(FC, FC.var("p") * FC.var("q")))
    assert exp_series(F, 3).valid == 0
    assert exp_series(F.times_constant(h=1), 3).valid == 3


def test_truncation_discards_high_orders():
    F = HbarSeries.of(lift(integral(FC, FC.var("q"))).times_constant(h=2), 1)
    assert F.is_zero()


def test_yang_mills_solves_the_quantum_master_equation():
    S = build_bv_action(YangMillsModel(su2(), 2))
    r = check_qme(S)
    assert r["passed"]
    assert r["orders"] == {"0": True, "1": True, "2": True, "3": True}


def test_reference_action_has_identically_zero_residual():
    S = qme_reference_action()
    assert qme_residual(S).is_zero()


def test_quantum_differential_squares_to_zero():
    S = qme_reference_action()
    rng = random.Random(7)
    for _ in range(5):
        O = random_active_block(rng, TWO_FIELDS, None, 3)
        assert not omega(S, O).is_zero()
        assert omega_squared(S, O).is_zero()


def test_quantum_differential_annihilates_constants():
    S = qme_reference_action()
    assert omega(S, ExtendedFunctional.unit(S.fc)).is_zero()


def test_non_solution_gives_nonzero_residual():
    fc = TWO_FIELDS
    S = integral(fc, fc.var("p") * fc.var("c", (1,)) + fc.var("q") ** 2 * fc.var("b"))
    assert not check_qme(S)["extended_zero"]
