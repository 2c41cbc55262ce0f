"""Numeric evaluation of functionals on random periodic sections (1-D base).

Even coordinates get a real trigonometric polynomial plus a nilpotent even
part; odd coordinates get a combination of Grassmann generators with
trigonometric-polynomial coefficients.  Jets are computed spectrally and
integrals by the periodic trapezoid rule, which is exact for the band-limited
data used here up to round-off.
"""

from __future__ import annotations

import numpy as np

from .exprcore import Expr, FieldContent, JetVar
from .grassmann import K_DEFAULT, GrassmannValue, eval_grassmann


def spectral_derivative(values: np.ndarray, order: int, period: float = 2 * np.pi) -> np.ndarray:
    if order == 0:
        return values
    n = values.shape[-1]
    k = np.fft.rfftfreq(n, d=period / n) * 2 * np.pi
    spec = np.fft.rfft(values, axis=-1) * (1j * k) ** order
    if order % 2 and n % 2 == 0:
        spec[..., -1] = 0
    return np.fft.irfft(spec, n=n, axis=-1)


def _trig(rng: np.random.Generator, x: np.ndarray, modes: int, amplitude: float) -> np.ndarray:
    out = np.full_like(x, rng.normal() * amplitude)
    for m in range(1, modes + 1):
        a, b = rng.normal(size=2) * amplitude / m
        out += a * np.cos(m * x) + b * np.sin(m * x)
    return out


class PeriodicSection:
    """A random section of the BV bundle over the circle."""

    def __init__(self, fc: FieldContent, rng: np.random.Generator, points: int = 64,
                 modes: int = 3, amplitude: float = 0.4, k: int = K_DEFAULT,
                 nilpotent: bool = True):
        if fc.dim != 1:
            raise ValueError("periodic sections are implemented for a 1-D base")
        self.fc = fc
        self.k = k
        self.x = np.linspace(0, 2 * np.pi, points, endpoint=False)
        size = 1 << k
        self.base: dict = {}
        for c in fc.coordinates:
            coeffs = np.zeros((size, points))
            if c.parity == 0:
                coeffs[0] = _trig(rng, self.x, modes, amplitude)
                if nilpotent:
                    a, b = rng.choice(k, size=2, replace=False)
                    coeffs[(1 << a) | (1 << b)] = _trig(rng, self.x, modes, amplitude)
            else:
                for j in range(k):
                    coeffs[1 << j] = _trig(rng, self.x, modes, amplitude)
                if nilpotent and k >= 3:
                    a, b, d = rng.choice(k, size=3, replace=False)
                    coeffs[(1 << a) | (1 << b) | (1 << d)] = _trig(rng, self.x, modes, amplitude)
            self.base[c] = coeffs
        self._jets: dict = {}

    def jet(self, v: JetVar) -> GrassmannValue:
        key = (v.coord, v.sigma.order)
        if key not in self._jets:
            self._jets[key] = GrassmannValue(spectral_derivative(self.base[v.coord], v.sigma.order), self.k)
        return self._jets[key]

    def density_values(self, e: Expr) -> GrassmannValue:
        even, odd = {}, {}
        for v in e.variables():
            (odd if v.parity else even)[v] = self.jet(v)
        return eval_grassmann(e, even, odd, self.k)

    def integrate(self, e: Expr) -> GrassmannValue:
        vals = self.density_values(e)
        coeffs = vals.coeffs
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None] * np.ones_like(self.x)
        return GrassmannValue(coeffs.mean(axis=-1) * 2 * np.pi, self.k)

    def evaluate(self, F) -> GrassmannValue:
        """Value of a LocalFunctional: sum of ordered products of block integrals."""
        total = GrassmannValue.scalar(0.0, self.k)
        for key, coef in F.terms.items():
            term = GrassmannValue.scalar(float(coef), self.k)
            for block in key:
                term = term * self.integrate(block)
            total = total + term
        return total


def gateaux_check(f: Expr, fc: FieldContent, coord, rng: np.random.Generator,
                  eps: float = 1e-6, points: int = 64) -> tuple[float, float]:
    """Central-difference derivative of s -> int f[s] versus int ds * Euler(f).

    Works on the even sector only: every coordinate in ``f`` must be even.
    """
    from .exprcore import RIGHT, euler_derivative

    x = np.linspace(0, 2 * np.pi, points, endpoint=False)
    base = {c: _trig(rng, x, 3, 0.4) for c in fc.coordinates if c.parity == 0}
    shift = _trig(rng, x, 3, 0.4)

    def value(fields: dict) -> float:
        assign = {v: spectral_derivative(fields[v.coord], v.sigma.order) for v in f.variables()}
        vals = eval_grassmann(f, assign, {}, 1).coeffs[0]
        return float(np.real(vals).mean() * 2 * np.pi)

    plus = dict(base)
    minus = dict(base)
    plus[coord] = base[coord] + eps * shift
    minus[coord] = base[coord] - eps * shift
    numeric = (value(plus) - value(minus)) / (2 * eps)
    ed = euler_derivative(f, coord, RIGHT)
    assign = {v: spectral_derivative(base[v.coord], v.sigma.order) for v in ed.variables()}
    vals = eval_grassmann(ed, assign, {}, 1).coeffs[0] if ed.terms else np.zeros_like(x)
    symbolic = float(np.real(vals * shift).mean() * 2 * np.pi)
    return numeric, symbolic


def shift_function(rng: np.random.Generator, section: PeriodicSection) -> np.ndarray:
    return _trig(rng, section.x, 3, 0.4)


def evaluate_extended(section: PeriodicSection, F, shifts: dict) -> dict:
    """Value of an extended functional without couplings, paired with real test shifts.

    Each factor is integrated over its own copy of the circle; a port on a
    free slot multiplies the factor by the matching derivative of the shift.
    Returns a map from the ordered slot labels to the Grassmann coefficient.
    """
    out: dict = {}
    k = section.k
    for (h, i, enc, slots), coef in F.terms.items():
        if i or h:
            raise ValueError("numeric evaluation needs hbar- and i-free terms")
        value = GrassmannValue.scalar(float(coef), k)
        for m, ports in enc:
            vals = section.density_values(Expr({m: 1}))
            coeffs = vals.coeffs if vals.coeffs.ndim == 2 else vals.coeffs[:, None] * np.ones_like(section.x)
            weight = np.ones_like(section.x)
            for (_, _, sigma), ref in ports:
                if ref[0] != "s":
                    raise ValueError("numeric evaluation of couplings is not supported")
                weight = weight * spectral_derivative(shifts[ref[1]], len(sigma))
            value = value * GrassmannValue((coeffs * weight).mean(axis=-1) * 2 * np.pi, k)
        key = tuple(ref[1] for ref, _ in slots)
        out[key] = out[key] + value if key in out else value
    return out
