from __future__ import annotations

from fractions import Fraction

import pytest

from bvjet.exprcore import Expr
from bvjet.functionals import integral, is_trivial, schouten_jet
from bvjet.gauge import (
    LieAlgebraSpec,
    YangMillsModel,
    abelian,
    action_density,
    build_bv_action,
    laplacian_sectors,
    load_algebra,
    parse_algebra,
    solvable2,
    su2,
    verify_classical_master,
    verify_laplacian_zero,
)


def test_structure_constants_are_antisymmetrized():
    g = LieAlgebraSpec(2, {(1, 2, 2): 1})
    assert g.const(2, 1, 2) == -1


def test_inconsistent_antisymmetry_is_rejected():
    with pytest.raises(ValueError, match="antisymmetric"):
        LieAlgebraSpec(2, {(1, 2, 2): 1, (2, 1, 2): 1})


def test_jacobi_violation_is_rejected():
    bad = "dim 3\nf 1 2 3 1\nf 1 3 1 1\n"
    with pytest.raises(ValueError, match="Jacobi"):
        parse_algebra(bad)


def test_parse_algebra_reports_line():
    with pytest.raises(ValueError, match="line 2"):
        parse_algebra("dim 2\nf 1 2 x 1\n")
    with pytest.raises(ValueError, match="dim"):
        parse_algebra("f 1 2 2 1\n")


def test_load_algebra_from_file(tmp_path):
    path = tmp_path / "so3.alg"
    path.write_text("# so(3)\ndim 3\nf 1 2 3 1\nf 2 3 1 1\nf 3 1 2 1\n")
    g = load_algebra(str(path))
    assert g.f == su2().f
    with pytest.raises(ValueError, match="unknown algebra"):
        load_algebra(str(tmp_path / "missing"))


def test_traces_and_metric_invariance():
    assert set(su2().traces().values()) == {0}
    assert not su2().metric_defects()
    assert solvable2().traces() == {1: Fraction(-1), 2: Fraction(0)}
    assert solvable2().metric_defects()


@pytest.mark.parametrize("n", [2, 4])
def test_su2_action_has_vanishing_laplacian_and_bracket(n):
    m = YangMillsModel(su2(), n)
    r = verify_laplacian_zero(m)
    assert r["jet"] and r["functional"] and r["passed"]
    assert verify_classical_master(m)["passed"]


def test_abelian_model_passes():
    m = YangMillsModel(abelian(2), 3)
    assert verify_laplacian_zero(m)["passed"]
    assert verify_classical_master(m)["passed"]


def test_non_unimodular_algebra_fails_with_trace_terms():
    m = YangMillsModel(solvable2(), 2)
    sectors = laplacian_sectors(m)
    assert sectors["gauge"].text() == "-2*c1"
    assert sectors["ghost"].text() == "c1"
    assert not verify_laplacian_zero(m)["passed"]


def test_sector_laplacians_scale_with_base_dimension():
    m = YangMillsModel(solvable2(), 4)
    assert laplacian_sectors(m)["gauge"].text() == "-4*c1"


def test_action_is_even_with_ghost_number_zero():
    m = YangMillsModel(su2(), 2)
    S = build_bv_action(m)
    assert S.parity() == 0
    for key in S.terms:
        for block in key:
            for mono in block.terms:
                ghost = sum(v.coord.ghost for v in mono.variables())
                assert ghost == 0


def test_ghost_sign_flip_breaks_the_master_equation():
    m = YangMillsModel(su2(), 2)
    dens = action_density(m)
    ghost = Expr({mono: c for mono, c in dens.terms.items()
                  if any(v.coord.name.startswith("cs") for v in mono.variables())})
    assert ghost.terms
    flipped = integral(m.fc, dens - ghost.scale(2))
    assert not is_trivial(schouten_jet(flipped, flipped))


def test_model_size_limits():
    with pytest.raises(ValueError):
        YangMillsModel(su2(), 10)
