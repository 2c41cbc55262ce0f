"""Seeded random densities and functionals for property checks."""

from __future__ import annotations

import random
from fractions import Fraction

from .exprcore import ANTIFIELD, UNIT, Expr, FieldContent, JetVar, MultiIndex, cos, exp, sin
from .functionals import LocalFunctional, integral

DEFAULT_FIELDS = FieldContent.from_pairs(1, [("q", 0, "p")])
TWO_FIELDS = FieldContent.from_pairs(1, [("q", 0, "p"), ("c", 1, "b")])


def random_jetvar(rng: random.Random, fc: FieldContent, max_order: int = 2, parity=None,
                  kind=None) -> JetVar:
    coords = [c for c in fc.coordinates
              if (parity is None or c.parity == parity) and (kind is None or c.kind == kind)]
    c = rng.choice(coords)
    sigma = MultiIndex(rng.randint(1, fc.dim) for _ in range(rng.randint(0, max_order)))
    return JetVar(c, sigma)


def random_monomial(rng: random.Random, fc: FieldContent, size: int = 3, parity=None,
                    functions: bool = True) -> Expr:
    """Product of up to ``size`` atoms; ``parity`` forces the result parity."""
    for _ in range(50):
        e = Expr.const(1)
        if rng.random() < 0.7:
            e = Expr.of_var(random_jetvar(rng, fc, kind=ANTIFIELD))
        for _ in range(rng.randint(0 if e.terms.get(UNIT) is None else 1, size)):
            if functions and rng.random() < 0.2 and any(c.parity == 0 for c in fc.coordinates):
                v = random_jetvar(rng, fc, 1, parity=0)
                e = e * rng.choice((sin, cos, exp))(Expr.of_var(v))
            else:
                e = e * Expr.of_var(random_jetvar(rng, fc))
        if e.terms and (parity is None or e.parity() == parity):
            return e
    odd = [c for c in fc.coordinates if c.parity == 1]
    e = Expr.of_var(random_jetvar(rng, fc, parity=0))
    return e * Expr.of_var(JetVar(odd[0])) if parity else e


def random_coefficient(rng: random.Random) -> Fraction:
    return Fraction(rng.choice([1, -1, 2, -2, 3]), rng.choice([1, 1, 2, 3]))


def random_density(rng: random.Random, fc: FieldContent = DEFAULT_FIELDS, terms: int = 2,
                   size: int = 3, parity=None, functions: bool = True) -> Expr:
    e = Expr()
    for _ in range(rng.randint(1, terms)):
        e = e + random_monomial(rng, fc, size, parity, functions).scale(random_coefficient(rng))
    if not e.terms:
        return random_density(rng, fc, terms, size, parity, functions)
    return e


def random_block(rng: random.Random, fc: FieldContent = DEFAULT_FIELDS, parity=None,
                 size: int = 3, terms: int = 2, functions: bool = True) -> LocalFunctional:
    return integral(fc, random_density(rng, fc, terms, size, parity, functions))


def random_functional(rng: random.Random, fc: FieldContent = DEFAULT_FIELDS, parity=None,
                      max_blocks: int = 2, size: int = 2) -> LocalFunctional:
    """Product of one or two homogeneous blocks with the requested total parity."""
    nblocks = rng.randint(1, max_blocks)
    if nblocks == 1:
        return random_block(rng, fc, parity, size)
    p1 = rng.randint(0, 1)
    p2 = None if parity is None else (parity - p1) % 2
    return random_block(rng, fc, p1, size, 1) * random_block(rng, fc, p2, size, 1)


def random_active_block(rng: random.Random, fc: FieldContent = DEFAULT_FIELDS, parity=None,
                        size: int = 3, terms: int = 2, tries: int = 200,
                        functions: bool = True) -> LocalFunctional:
    """A block whose extended Laplacian or self-bracket does not vanish."""
    from .funcalc import functional_laplacian, functional_schouten, lift

    for _ in range(tries):
        F = random_block(rng, fc, parity, size, terms, functions)
        E = lift(F)
        if not functional_laplacian(E).is_zero() or not functional_schouten(E, E).is_zero():
            return F
    raise RuntimeError("could not draw an active block")
