"""Local functionals: sums of products of integral blocks.

Block densities are stored at the base label ``x``; the position of a block
inside a product plays the role of its private base copy.  Products are kept
graded-commutative by sorting blocks with the Koszul sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .exprcore import (
    LEFT,
    RIGHT,
    Expr,
    FieldContent,
    JetVar,
    Mono,
    at_zero_section,
    euler_derivative,
    partial_derivative,
    relabel,
)


@dataclass(frozen=True)
class IntegralBlock:
    density: Expr
    label: str

    @property
    def parity(self) -> int:
        return self.density.parity() or 0

    def text(self) -> str:
        return f"int[{self.density.text()}] d{self.label}"


def _sort_blocks(blocks: list[Expr]) -> tuple[int, tuple[Expr, ...]] | None:
    items = list(blocks)
    sign = 1
    for a in range(1, len(items)):
        b = a
        while b > 0 and items[b - 1].skey > items[b].skey:
            if (items[b - 1].parity() or 0) and (items[b].parity() or 0):
                sign = -sign
            items[b - 1], items[b] = items[b], items[b - 1]
            b -= 1
    for a in range(1, len(items)):
        if items[a - 1] == items[a] and items[a].parity():
            return None
    return sign, tuple(items)


def _split_blocks(blocks: tuple[Expr, ...]) -> list[tuple[Fraction, tuple[Expr, ...]]]:
    """Expand blocks of mixed parity into parity-homogeneous products."""
    out = [(Fraction(1), ())]
    for b in blocks:
        parts = [p for p in (b.even_part(), b.odd_part()) if p.terms]
        out = [(c, head + (p,)) for c, head in out for p in parts]
    return out


def _content(e: Expr) -> tuple[Fraction, Expr]:
    lead = min(e.terms, key=lambda m: m.skey)
    c = e.terms[lead]
    return c, e.scale(1 / c)


class LocalFunctional:
    """Formal sum of scalar multiples of products of integral blocks."""

    __slots__ = ("fc", "terms")

    def __init__(self, fc: FieldContent, terms: dict | None = None, _canonical: bool = False):
        self.fc = fc
        if _canonical:
            self.terms = {k: v for k, v in (terms or {}).items() if v}
            return
        acc: dict[tuple[Expr, ...], Fraction] = {}
        for blocks, coef in (terms or {}).items():
            if not coef or any(not b.terms for b in blocks):
                continue
            for c0, homog in _split_blocks(tuple(blocks)):
                c = Fraction(coef) * c0
                normed = []
                for b in homog:
                    k, nb = _content(b)
                    c *= k
                    normed.append(nb)
                res = _sort_blocks(normed)
                if res is None:
                    continue
                s, key = res
                acc[key] = acc.get(key, 0) + s * c
        self.terms = {k: v for k, v in acc.items() if v}

    # construction -----------------------------------------------------
    @classmethod
    def integral(cls, fc: FieldContent, density: Expr) -> "LocalFunctional":
        labels = density.labels()
        if len(labels) > 1:
            raise ValueError("a block density must live on a single base copy")
        if labels and labels != {"x"}:
            density = relabel(density, {labels.pop(): "x"})
        return cls(fc, {(density,): Fraction(1)})

    @classmethod
    def unit(cls, fc: FieldContent) -> "LocalFunctional":
        return cls(fc, {(): Fraction(1)})

    @classmethod
    def zero(cls, fc: FieldContent) -> "LocalFunctional":
        return cls(fc, {})

    # arithmetic -------------------------------------------------------
    def __add__(self, other: "LocalFunctional") -> "LocalFunctional":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return LocalFunctional(self.fc, out, _canonical=True)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "LocalFunctional":
        c = Fraction(c)
        return LocalFunctional(self.fc, {k: c * v for k, v in self.terms.items()}, _canonical=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return multiply(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, LocalFunctional) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def parity(self) -> int | None:
        ps = {term_parity(k) for k in self.terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def parity_parts(self) -> tuple["LocalFunctional", "LocalFunctional"]:
        ev = {k: v for k, v in self.terms.items() if term_parity(k) == 0}
        od = {k: v for k, v in self.terms.items() if term_parity(k) == 1}
        return LocalFunctional(self.fc, ev, True), LocalFunctional(self.fc, od, True)

    def blocks(self, key: tuple[Expr, ...]) -> list[IntegralBlock]:
        return [IntegralBlock(relabel(d, {"x": f"x{j + 1}"}), f"x{j + 1}") for j, d in enumerate(key)]

    def single_density(self) -> Expr:
        """The density of a functional made of single-block terms only."""
        out = Expr()
        for key, c in self.terms.items():
            if len(key) != 1:
                raise ValueError("functional contains products of blocks")
            out = out + key[0].scale(c)
        return out

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=lambda k: (len(k), [b.skey for b in k])):
            c = self.terms[key]
            body = " * ".join(f"int[{b.text()}]" for b in key) or "1"
            if c == 1:
                parts.append(body)
            elif c == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    __str__ = text

    def __repr__(self):
        return f"LocalFunctional({self.text()})"


def term_parity(key: tuple[Expr, ...]) -> int:
    return sum(b.parity() or 0 for b in key) % 2


def integral(fc: FieldContent, density: Expr) -> LocalFunctional:
    return LocalFunctional.integral(fc, density)


def _from_term(fc, key, coef=Fraction(1)) -> LocalFunctional:
    return LocalFunctional(fc, {tuple(key): coef})


def multiply(F: LocalFunctional, G: LocalFunctional) -> LocalFunctional:
    out: dict = {}
    for k1, c1 in F.terms.items():
        for k2, c2 in G.terms.items():
            key = k1 + k2
            out[key] = out.get(key, 0) + c1 * c2
    return LocalFunctional(F.fc, out)


def _block_bracket(fc: FieldContent, f: Expr, g: Expr) -> LocalFunctional:
    dens = Expr()
    for q, qd in fc.pairs:
        a = euler_derivative(f, q, RIGHT)
        b = euler_derivative(g, qd, LEFT)
        if a.terms and b.terms:
            dens = dens + a * b
        a = euler_derivative(f, qd, RIGHT)
        b = euler_derivative(g, q, LEFT)
        if a.terms and b.terms:
            dens = dens - a * b
    if not dens.terms:
        return LocalFunctional.zero(fc)
    return _from_term(fc, (dens,))


def _bracket_terms(fc, a: tuple, b: tuple) -> LocalFunctional:
    if not a or not b:
        return LocalFunctional.zero(fc)
    if len(a) == 1 and len(b) == 1:
        return _block_bracket(fc, a[0], b[0])
    if len(b) > 1:
        head, rest = b[:1], b[1:]
        pf, ph = term_parity(a), term_parity(head)
        first = multiply(_bracket_terms(fc, a, head), _from_term(fc, rest))
        second = multiply(_from_term(fc, head), _bracket_terms(fc, a, rest))
        return first + second.scale((-1) ** ((pf - 1) * ph % 2))
    head, rest = a[:1], a[1:]
    pr, ph = term_parity(rest), term_parity(b)
    first = multiply(_from_term(fc, head), _bracket_terms(fc, rest, b))
    second = multiply(_bracket_terms(fc, head, b), _from_term(fc, rest))
    return first + second.scale((-1) ** (pr * (ph - 1) % 2))


def schouten_jet(F: LocalFunctional, G: LocalFunctional) -> LocalFunctional:
    """Variational Schouten bracket; products by the graded Leibniz rule."""
    out = LocalFunctional.zero(F.fc)
    for k1, c1 in F.terms.items():
        for k2, c2 in G.terms.items():
            out = out + _bracket_terms(F.fc, k1, k2).scale(c1 * c2)
    return out


def _block_laplacian(fc, h: Expr, form: str) -> Expr:
    dens = Expr()
    for q, qd in fc.pairs:
        if form == "variational":
            inner = euler_derivative(h, qd, LEFT)
            outer = euler_derivative(inner, q, LEFT) if inner.terms else Expr()
        else:
            inner = partial_derivative(h, JetVar(qd), LEFT)
            outer = partial_derivative(inner, JetVar(q), LEFT) if inner.terms else Expr()
        # pushing the q-dagger variation through the odd q-variation
        dens = dens + (outer.scale(-1) if q.parity else outer)
    return dens


def _laplacian_term(fc, a: tuple, form: str) -> LocalFunctional:
    if not a:
        return LocalFunctional.zero(fc)
    if len(a) == 1:
        dens = _block_laplacian(fc, a[0], form)
        return _from_term(fc, (dens,)) if dens.terms else LocalFunctional.zero(fc)
    head, rest = a[:1], a[1:]
    s = (-1) ** term_parity(head)
    H, R = _from_term(fc, head), _from_term(fc, rest)
    return (multiply(_laplacian_term(fc, head, form), R)
            + _bracket_terms(fc, head, rest).scale(s)
            + multiply(H, _laplacian_term(fc, rest, form)).scale(s))


def laplacian_jet(F: LocalFunctional, form: str = "variational") -> LocalFunctional:
    """Jet-space BV-Laplacian; products by the deviation-from-derivation rule.

    ``form="variational"`` composes two Euler operators on each block.
    ``form="partial"`` keeps only the undifferentiated partial derivatives,
    which agrees with the variational form modulo total divergences.
    """
    if form not in ("variational", "partial"):
        raise ValueError("form must be 'variational' or 'partial'")
    out = LocalFunctional.zero(F.fc)
    for k, c in F.terms.items():
        out = out + _laplacian_term(F.fc, k, form).scale(c)
    return out


# equality modulo total divergences ------------------------------------

def _class_vector(fc: FieldContent, m: Mono) -> dict:
    """Image of a monomial density under the quotient by total divergences.

    The map sends a density to its right Euler derivatives together with its
    value on the zero section; its kernel is exactly the trivial densities.
    """
    return _class_vector_cached(fc, m)


@lru_cache(maxsize=200_000)
def _class_vector_cached(fc: FieldContent, m: Mono) -> tuple:
    e = Expr({m: Fraction(1)})
    out = []
    for mm, c in at_zero_section(e).terms.items():
        out.append(((-1, mm.skey), c, m.parity))
    coords = {v.coord for v in m.variables()}
    for coord in sorted(coords, key=lambda c: c.position):
        for mm, c in euler_derivative(e, coord, RIGHT).terms.items():
            out.append(((coord.position, mm.skey), c, m.parity))
    return tuple(out)


def _block_vector(fc: FieldContent, block: Expr) -> dict:
    vec: dict = {}
    for m, c in block.terms.items():
        for basis, bc, _ in _class_vector(fc, m):
            vec[basis] = vec.get(basis, 0) + c * bc
    return {k: v for k, v in vec.items() if v}


class _Span:
    """Incremental exact row reduction; expresses vectors in a growing basis."""

    def __init__(self):
        self.rows: list[tuple[object, dict]] = []

    def coordinates(self, vec: dict) -> dict[int, Fraction]:
        v = dict(vec)
        coords = {}
        for j, (pivot, row) in enumerate(self.rows):
            c = v.get(pivot)
            if not c:
                continue
            c = c / row[pivot]
            coords[j] = c
            for k, x in row.items():
                y = v.get(k, 0) - c * x
                if y:
                    v[k] = y
                else:
                    v.pop(k, None)
        if v:
            coords[len(self.rows)] = Fraction(1)
            self.rows.append((min(v), v))
        return coords


def quotient_image(F: LocalFunctional) -> dict:
    """Graded-symmetric tensor image of ``F`` in the quotient by divergences.

    Block classes are first written in an independent basis (one per parity),
    so products expand over a handful of coordinates instead of full vectors.
    """
    spans = {0: _Span(), 1: _Span()}
    coords: dict = {}
    for key in F.terms:
        for block in key:
            if block not in coords:
                p = block.parity() or 0
                coords[block] = (p, spans[p].coordinates(_block_vector(F.fc, block)))
    acc: dict = {}
    for key, coef in F.terms.items():
        partials = [((), coef, ())]
        for block in key:
            p, vec = coords[block]
            partials = [(head + ((p, j),), hc * c, hp + (p,))
                        for j, c in vec.items() for head, hc, hp in partials]
        for basis_tuple, c, pars in partials:
            order = sorted(range(len(basis_tuple)), key=lambda j: basis_tuple[j])
            sorted_key = tuple(basis_tuple[j] for j in order)
            if any(sorted_key[j] == sorted_key[j + 1] and pars[order[j]] for j in range(len(order) - 1)):
                continue
            acc[sorted_key] = acc.get(sorted_key, 0) + _perm_sign(order, pars) * c
    return {k: v for k, v in acc.items() if v}


def _perm_sign(order: list[int], parities: tuple) -> int:
    sign = 1
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if order[a] > order[b] and parities[order[a]] and parities[order[b]]:
                sign = -sign
    return sign


def is_trivial(F: LocalFunctional) -> bool:
    """True iff ``F`` vanishes modulo total divergences in every block."""
    return not quotient_image(F)


def functional_equal(F: LocalFunctional, G: LocalFunctional) -> bool:
    return is_trivial(F - G)


def split_homogeneous(F: LocalFunctional) -> Iterable[LocalFunctional]:
    ev, od = F.parity_parts()
    return [p for p in (ev, od) if not p.is_zero()]
