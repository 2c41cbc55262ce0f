"""Truncated hbar-series, the quantum master equation and the quantum differential.

All brackets and Laplacians here are the multi-base-point versions.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .funcalc import (
    ExtendedFunctional,
    diagonal_equal,
    ext_multiply,
    functional_laplacian,
    functional_schouten,
    lift,
    restrict_to_diagonal,
)
from .functionals import LocalFunctional, is_trivial

DEFAULT_ORDER = 3


class HbarSeries:
    """An extended functional truncated above hbar^order.

    ``valid`` is the highest hbar power known to be exact; it drops when an
    operand was itself truncated below the requested order.
    """

    __slots__ = ("value", "order", "valid")

    def __init__(self, value: ExtendedFunctional, order: int = DEFAULT_ORDER, valid: int | None = None):
        self.order = order
        self.valid = order if valid is None else min(valid, order)
        self.value = _truncate(value, order)

    @classmethod
    def of(cls, F, order: int = DEFAULT_ORDER) -> "HbarSeries":
        if isinstance(F, HbarSeries):
            return cls(F.value, order, F.valid)
        if isinstance(F, LocalFunctional):
            F = lift(F)
        return cls(F, order)

    def _pair(self, other: "HbarSeries") -> tuple[int, int]:
        return min(self.order, other.order), min(self.valid, other.valid)

    def __add__(self, other: "HbarSeries") -> "HbarSeries":
        order, valid = self._pair(other)
        return HbarSeries(self.value + other.value, order, valid)

    def __sub__(self, other: "HbarSeries") -> "HbarSeries":
        order, valid = self._pair(other)
        return HbarSeries(self.value - other.value, order, valid)

    def __mul__(self, other) -> "HbarSeries":
        if isinstance(other, (int, Fraction)):
            return HbarSeries(self.value.scale(other), self.order, self.valid)
        order, valid = self._pair(other)
        return HbarSeries(ext_multiply(self.value, other.value), order, valid)

    def times_constant(self, h: int = 0, i: int = 0, c=1) -> "HbarSeries":
        return HbarSeries(self.value.times_constant(h, i, c), self.order, self.valid + h)

    def bracket(self, other: "HbarSeries") -> "HbarSeries":
        order, valid = self._pair(other)
        return HbarSeries(functional_schouten(self.value, other.value), order, valid)

    def laplacian(self) -> "HbarSeries":
        return HbarSeries(functional_laplacian(self.value), self.order, self.valid)

    def parts(self) -> dict[int, ExtendedFunctional]:
        return self.value.hbar_parts()

    def is_zero(self) -> bool:
        return self.value.is_zero()

    def diagonal_zero(self) -> dict[int, bool]:
        """Per-order verdict: does the diagonal restriction vanish modulo divergences?"""
        parts = self.parts()
        return {h: h not in parts or is_trivial(restrict_to_diagonal(parts[h]))
                for h in range(self.valid + 1)}

    def __repr__(self):
        return f"HbarSeries(order={self.order}, valid={self.valid}, terms={len(self.value.terms)})"


def _truncate(F: ExtendedFunctional, order: int) -> ExtendedFunctional:
    return ExtendedFunctional(F.fc, {k: v for k, v in F.terms.items() if k[0] <= order})


def exp_series(F, order: int = DEFAULT_ORDER) -> HbarSeries:
    """Sum of F^n / n! for n up to ``order``, truncated above hbar^order.

    Exact through ``order`` when F has no hbar^0 part.
    """
    F = HbarSeries.of(F, order)
    valid = order if all(k[0] >= 1 for k in F.value.terms) else 0
    total = HbarSeries(ExtendedFunctional.unit(F.value.fc), order)
    power = total
    for n in range(1, order + 1):
        power = power * F
        total = total + power * Fraction(1, factorial(n))
    total.valid = min(valid, F.valid)
    return total


def exp_identity_residual(F, order: int = DEFAULT_ORDER) -> HbarSeries:
    """Delta(exp F) - (Delta F + 1/2 [[F, F]]) exp F, each side expanded on its own."""
    F = HbarSeries.of(F, order)
    E = exp_series(F, order)
    lhs = E.laplacian()
    rhs = (F.laplacian() + F.bracket(F) * Fraction(1, 2)) * E
    return lhs - rhs


def qme_residual(S, order: int = DEFAULT_ORDER) -> HbarSeries:
    """1/2 [[S, S]] - i hbar Delta S."""
    S = HbarSeries.of(S, order)
    return S.bracket(S) * Fraction(1, 2) - S.laplacian().times_constant(h=1, i=1)


def check_qme(S, order: int = DEFAULT_ORDER) -> dict:
    res = qme_residual(S, order)
    per_order = res.diagonal_zero()
    return {
        "orders": {str(h): ok for h, ok in per_order.items()},
        "extended_zero": res.is_zero(),
        "passed": all(per_order.values()),
    }


def omega(S, O, order: int = DEFAULT_ORDER) -> HbarSeries:
    """[[S, O]] - i hbar Delta O."""
    S, O = HbarSeries.of(S, order), HbarSeries.of(O, order)
    return S.bracket(O) - O.laplacian().times_constant(h=1, i=1)


def omega_squared(S, O, order: int = DEFAULT_ORDER) -> HbarSeries:
    return omega(S, omega(S, O, order), order)


def power_lemmas(G, F, n: int) -> dict:
    """Check [[G, F^n]] = n [[G, F]] F^(n-1) and the Laplacian of F^n for even F."""
    if isinstance(F, LocalFunctional):
        F = lift(F)
    if isinstance(G, LocalFunctional):
        G = lift(G)
    if F.parity() != 0:
        raise ValueError("power lemmas need an even functional")
    fc = F.fc
    powers = [ExtendedFunctional.unit(fc)]
    for _ in range(n):
        powers.append(ext_multiply(powers[-1], F))
    bracket_lhs = functional_schouten(G, powers[n])
    bracket_rhs = ext_multiply(functional_schouten(G, F), powers[n - 1]).scale(n)
    lap_lhs = functional_laplacian(powers[n])
    lap_rhs = ext_multiply(functional_laplacian(F), powers[n - 1]).scale(n)
    if n >= 2:
        lap_rhs = lap_rhs + ext_multiply(functional_schouten(F, F), powers[n - 2]).scale(Fraction(n * (n - 1), 2))
    return {
        "bracket_exact": bracket_lhs == bracket_rhs,
        "bracket": diagonal_equal(bracket_lhs, bracket_rhs),
        "laplacian_exact": lap_lhs == lap_rhs,
        "laplacian": diagonal_equal(lap_lhs, lap_rhs),
    }
