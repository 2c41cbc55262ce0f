"""Exterior-algebra numeric oracle.

Elements live in the Grassmann algebra on ``K`` generators and are stored as
coefficient arrays indexed by bitmasks.  A trailing array axis, when present,
holds grid samples, so whole periodic sections evaluate in one pass.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

from .exprcore import Expr, JetVar

K_DEFAULT = 6


@lru_cache(maxsize=None)
def _tables(k: int):
    size = 1 << k
    rows, cols, out, signs = [], [], [], []
    for a in range(size):
        for b in range(size):
            if a & b:
                continue
            inv = 0
            for j in range(k):
                if b >> j & 1:
                    inv += bin(a >> (j + 1)).count("1")
            rows.append(a)
            cols.append(b)
            out.append(a | b)
            signs.append(-1.0 if inv % 2 else 1.0)
    scatter = np.zeros((size, len(out)))
    scatter[out, np.arange(len(out))] = signs
    degree = np.array([bin(m).count("1") for m in range(size)])
    return np.array(rows), np.array(cols), scatter, degree


class GrassmannValue:
    __slots__ = ("k", "coeffs")

    def __init__(self, coeffs, k: int = K_DEFAULT):
        self.k = k
        self.coeffs = np.asarray(coeffs)
        if self.coeffs.shape[0] != 1 << k:
            raise ValueError("coefficient array does not match the generator count")

    @classmethod
    def scalar(cls, x, k: int = K_DEFAULT, shape=()) -> "GrassmannValue":
        x = np.asarray(x)
        c = np.zeros((1 << k,) + (x.shape or shape), dtype=np.result_type(x, float))
        c[0] = x
        return cls(c, k)

    @classmethod
    def generator(cls, j: int, k: int = K_DEFAULT) -> "GrassmannValue":
        c = np.zeros(1 << k)
        c[1 << j] = 1.0
        return cls(c, k)

    @property
    def degrees(self) -> np.ndarray:
        return _tables(self.k)[3]

    @property
    def body(self):
        return self.coeffs[0]

    def is_odd(self) -> bool:
        even = self.degrees % 2 == 0
        return not np.any(self.coeffs[even])

    def is_even(self) -> bool:
        odd = self.degrees % 2 == 1
        return not np.any(self.coeffs[odd])

    def _lift(self, other) -> "GrassmannValue":
        if isinstance(other, GrassmannValue):
            return other
        return GrassmannValue.scalar(other, self.k, self.coeffs.shape[1:])

    def __add__(self, other):
        other = self._lift(other)
        return GrassmannValue(self.coeffs + other.coeffs, self.k)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannValue(-self.coeffs, self.k)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __mul__(self, other):
        if not isinstance(other, GrassmannValue):
            return GrassmannValue(self.coeffs * other, self.k)
        rows, cols, scatter, _ = _tables(self.k)
        a, b = self.coeffs, other.coeffs
        if a.ndim < b.ndim:
            a = a.reshape(a.shape + (1,) * (b.ndim - a.ndim))
        elif b.ndim < a.ndim:
            b = b.reshape(b.shape + (1,) * (a.ndim - b.ndim))
        prod = a[rows] * b[cols]
        flat = prod.reshape(prod.shape[0], -1)
        res = (scatter @ flat).reshape((1 << self.k,) + prod.shape[1:])
        return GrassmannValue(res, self.k)

    def __rmul__(self, other):
        return GrassmannValue(self.coeffs * other, self.k)

    def __pow__(self, n: int):
        out = GrassmannValue.scalar(1.0, self.k, self.coeffs.shape[1:])
        for _ in range(n):
            out = out * self
        return out

    def apply(self, name: str) -> "GrassmannValue":
        """sin/cos/exp by Taylor expansion around the body."""
        if not self.is_even():
            raise ValueError(f"odd argument to {name}")
        b = self.coeffs[0]
        nil = GrassmannValue(self.coeffs.copy(), self.k)
        nil.coeffs[0] = 0
        if name == "exp":
            derivs = [np.exp(b)] * 4
        elif name == "sin":
            derivs = [np.sin(b), np.cos(b), -np.sin(b), -np.cos(b)]
        elif name == "cos":
            derivs = [np.cos(b), -np.sin(b), -np.cos(b), np.sin(b)]
        else:
            raise ValueError(f"unknown function {name!r}")
        out = GrassmannValue.scalar(derivs[0], self.k)
        power = GrassmannValue.scalar(np.ones_like(b), self.k)
        for n in range(1, self.k // 2 + 1):
            power = power * nil
            out = out + power * (derivs[n % 4] / factorial(n))
        return out

    def allclose(self, other, rtol: float = 1e-6) -> bool:
        a, b = self.coeffs, self._lift(other).coeffs
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
        return bool(np.all(np.abs(a - b) <= rtol * scale))

    def __repr__(self):
        nz = {m: c for m, c in enumerate(self.coeffs.tolist()) if c}
        return f"GrassmannValue({nz})"


def eval_grassmann(e: Expr, assign_even: dict, assign_odd: dict,
                   k: int = K_DEFAULT, hbar: float = 1.0) -> GrassmannValue:
    """Evaluate ``e`` homomorphically; i evaluates to 1j and hbar to ``hbar``."""
    for v, g in assign_odd.items():
        if not isinstance(g, GrassmannValue) or not g.is_odd():
            raise ValueError(f"odd variable {v!r} needs an odd Grassmann value")
    shape = ()
    for g in list(assign_even.values()) + list(assign_odd.values()):
        arr = g.coeffs[0] if isinstance(g, GrassmannValue) else np.asarray(g)
        if arr.shape:
            shape = arr.shape
    cache: dict = {}

    def even_value(a) -> GrassmannValue:
        if a in cache:
            return cache[a]
        if isinstance(a, JetVar):
            val = assign_even[a]
            val = val if isinstance(val, GrassmannValue) else GrassmannValue.scalar(val, k, shape)
        else:
            val = walk(a.arg).apply(a.name)
        cache[a] = val
        return val

    def walk(expr: Expr) -> GrassmannValue:
        total = GrassmannValue.scalar(np.zeros(shape), k)
        for m, c in expr.terms.items():
            coef = float(c) * (1j if m.i else 1.0) * hbar ** m.h
            term = GrassmannValue.scalar(np.full(shape, coef), k)
            for a, p in m.evens:
                term = term * even_value(a) ** p
            for v in m.odds:
                term = term * assign_odd[v]
            total = total + term
        return total

    return walk(e)
