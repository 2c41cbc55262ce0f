"""Canonical graded expressions over jet coordinates.

An expression is a finite sum of monomials.  A monomial carries a rational
coefficient, exponents of the formal constants ``i`` and ``hbar``, a sorted
multiset of even factors (even jet variables and sin/cos/exp of even
expressions) and a sorted list of distinct odd jet variables.  Every
constructor returns the canonical form, so structural equality is equality.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Iterable, Iterator

FUNCTIONS = ("sin", "cos", "exp")
LEFT = "left"
RIGHT = "right"
FIELD = "field"
ANTIFIELD = "antifield"


def direction_names(dim: int) -> list[str]:
    if dim <= 3:
        return list("xyz"[:dim])
    return [f"x{k}" for k in range(1, dim + 1)]


class MultiIndex(tuple):
    """Multiset of base directions (1-based), stored as a sorted tuple."""

    __slots__ = ()

    def __new__(cls, dirs: Iterable[int] = ()):
        return super().__new__(cls, sorted(dirs))

    @classmethod
    def from_counts(cls, counts: dict[int, int]) -> "MultiIndex":
        return cls(d for d, k in counts.items() for _ in range(k))

    @property
    def counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for d in self:
            out[d] = out.get(d, 0) + 1
        return out

    @property
    def order(self) -> int:
        return len(self)

    def add(self, i: int) -> "MultiIndex":
        return MultiIndex(tuple(self) + (i,))

    def __add__(self, other):
        return MultiIndex(tuple(self) + tuple(other))

    def key(self) -> tuple:
        # graded lexicographic order
        return (len(self), tuple(self))

    def __repr__(self) -> str:
        return f"MultiIndex{tuple(self)!r}"


EMPTY = MultiIndex()


@dataclass(frozen=True)
class Coordinate:
    name: str
    kind: str
    pair: int
    parity: int
    ghost: int
    position: int
    dim: int


class FieldContent:
    """Declared fiber coordinates: conjugate pairs with opposite parities."""

    def __init__(self, dim: int, coordinates: Iterable[tuple]):
        if dim < 1:
            raise ValueError("base dimension must be positive")
        self.dim = dim
        coords = []
        for pos, (name, kind, pair, parity, ghost) in enumerate(coordinates):
            if kind not in (FIELD, ANTIFIELD):
                raise ValueError(f"unknown coordinate kind {kind!r}")
            coords.append(Coordinate(name, kind, pair, parity % 2, ghost, pos, dim))
        self.coordinates = tuple(coords)
        self._by_name = {c.name: c for c in coords}
        if len(self._by_name) != len(coords):
            raise ValueError("duplicate coordinate names")
        pairs: dict[int, dict[str, Coordinate]] = {}
        for c in coords:
            slot = pairs.setdefault(c.pair, {})
            if c.kind in slot:
                raise ValueError(f"pair {c.pair} has two {c.kind} entries")
            slot[c.kind] = c
        for a, slot in pairs.items():
            if len(slot) != 2:
                raise ValueError(f"pair {a} lacks a field or an antifield")
            if slot[FIELD].parity + slot[ANTIFIELD].parity != 1:
                raise ValueError(f"pair {a} must have opposite parities")
        self._pairs = {a: (s[FIELD], s[ANTIFIELD]) for a, s in sorted(pairs.items())}

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple]) -> "FieldContent":
        """Build from ``(field, parity, antifield[, ghost])`` tuples."""
        rows = []
        for a, entry in enumerate(pairs):
            name, parity, anti = entry[:3]
            ghost = entry[3] if len(entry) > 3 else parity
            rows.append((name, FIELD, a, parity, ghost))
            rows.append((anti, ANTIFIELD, a, 1 - parity, -1 - ghost))
        return cls(dim, rows)

    def __getitem__(self, name: str) -> Coordinate:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    @property
    def pairs(self) -> list[tuple[Coordinate, Coordinate]]:
        return list(self._pairs.values())

    def conjugate(self, c: Coordinate) -> Coordinate:
        f, a = self._pairs[c.pair]
        return a if c.kind == FIELD else f

    def var(self, name: str, sigma: Iterable[int] = (), label: str = "x") -> "Expr":
        return Expr.of_var(JetVar(self[name], MultiIndex(sigma), label))

    def directions(self) -> list[str]:
        return direction_names(self.dim)


class JetVar:
    __slots__ = ("coord", "sigma", "label", "skey", "_hash")

    def __init__(self, coord: Coordinate, sigma: MultiIndex = EMPTY, label: str = "x"):
        self.coord = coord
        self.sigma = sigma if isinstance(sigma, MultiIndex) else MultiIndex(sigma)
        self.label = label
        self.skey = (0, coord.position, coord.name, len(self.sigma), tuple(self.sigma), label,
                     coord.kind, coord.pair, coord.parity, coord.ghost, coord.dim)
        self._hash = hash(self.skey)

    @property
    def parity(self) -> int:
        return self.coord.parity

    def shift(self, i: int) -> "JetVar":
        return JetVar(self.coord, self.sigma.add(i), self.label)

    def relabel(self, label: str) -> "JetVar":
        return JetVar(self.coord, self.sigma, label)

    def __eq__(self, other):
        return isinstance(other, JetVar) and self.skey == other.skey

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.skey < other.skey

    def text(self) -> str:
        dim = self.coord.dim
        if not self.sigma:
            return self.coord.name
        if dim <= 3:
            return self.coord.name + "_" + "".join("xyz"[d - 1] for d in self.sigma)
        out = self.coord.name
        names = direction_names(dim)
        for d, k in sorted(self.sigma.counts.items()):
            out = f"D({out}, {names[d - 1]}, {k})"
        return out

    def __repr__(self) -> str:
        return self.text() if self.label == "x" else f"{self.text()}@{self.label}"


class Func:
    __slots__ = ("name", "arg", "skey", "_hash")

    def __init__(self, name: str, arg: "Expr"):
        self.name = name
        self.arg = arg
        self.skey = (1, name, arg.skey)
        self._hash = hash(self.skey)

    def __eq__(self, other):
        return isinstance(other, Func) and self.skey == other.skey

    def __hash__(self):
        return self._hash

    def derivative(self) -> "Expr":
        if self.name == "sin":
            return Expr.of_func("cos", self.arg)
        if self.name == "cos":
            return -Expr.of_func("sin", self.arg)
        return Expr.of_func("exp", self.arg)

    def text(self) -> str:
        return f"{self.name}({self.arg.text()})"

    __repr__ = text


def _odd_sort(odds: list) -> tuple[int, tuple] | None:
    """Sort odd variables, returning the Koszul sign, or None on a repeat."""
    items = list(odds)
    sign = 1
    for a in range(1, len(items)):
        b = a
        while b > 0 and items[b - 1].skey > items[b].skey:
            items[b - 1], items[b] = items[b], items[b - 1]
            sign = -sign
            b -= 1
        if b > 0 and items[b - 1].skey == items[b].skey:
            return None
    return sign, tuple(items)


class Mono:
    """Coefficient-free monomial in canonical form."""

    __slots__ = ("h", "i", "evens", "odds", "skey", "_hash")

    def __init__(self, h: int, i: int, evens: tuple, odds: tuple):
        self.h = h
        self.i = i
        self.evens = evens
        self.odds = odds
        self.skey = (h, i, tuple((a.skey, p) for a, p in evens), tuple(v.skey for v in odds))
        self._hash = hash(self.skey)

    def __eq__(self, other):
        return self.skey == other.skey

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.skey < other.skey

    @property
    def parity(self) -> int:
        return len(self.odds) % 2

    def times(self, other: "Mono") -> tuple[int, "Mono"] | None:
        sign = 1
        i = self.i + other.i
        if i == 2:
            i = 0
            sign = -1
        if other.odds:
            if self.odds:
                keys = [v.skey for v in self.odds]
                inv = 0
                for v in other.odds:
                    pos = bisect_left(keys, v.skey)
                    if pos < len(keys) and keys[pos] == v.skey:
                        return None
                    inv += len(keys) - pos
                if inv % 2:
                    sign = -sign
                odds = tuple(sorted(self.odds + other.odds, key=_skey))
            else:
                odds = other.odds
        else:
            odds = self.odds
        if not other.evens:
            evens = self.evens
        elif not self.evens:
            evens = other.evens
        else:
            merged = dict(self.evens)
            for a, p in other.evens:
                merged[a] = merged.get(a, 0) + p
            evens = tuple(sorted(merged.items(), key=lambda t: t[0].skey))
        return sign, Mono(self.h + other.h, i, evens, odds)

    def variables(self) -> Iterator[JetVar]:
        for a, _ in self.evens:
            if isinstance(a, JetVar):
                yield a
            else:
                yield from a.arg.variables()
        yield from self.odds

    def text(self) -> str:
        parts = []
        if self.i:
            parts.append("I")
        if self.h:
            parts.append("hbar" if self.h == 1 else f"hbar^{self.h}")
        for a, p in self.evens:
            parts.append(a.text() if p == 1 else f"{a.text()}^{p}")
        parts.extend(v.text() for v in self.odds)
        return "*".join(parts)


def _skey(v):
    return v.skey


UNIT = Mono(0, 0, (), ())


class Expr:
    """Immutable canonical graded expression."""

    __slots__ = ("terms", "_skey", "_hash")

    def __init__(self, terms: dict | None = None):
        self.terms: dict[Mono, Fraction] = {m: c for m, c in (terms or {}).items() if c}
        self._skey = None
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, c) -> "Expr":
        return cls({UNIT: Fraction(c)})

    @classmethod
    def of_var(cls, v: JetVar) -> "Expr":
        if v.parity:
            return cls({Mono(0, 0, (), (v,)): Fraction(1)})
        return cls({Mono(0, 0, ((v, 1),), ()): Fraction(1)})

    @classmethod
    def of_mono(cls, m: Mono, c=1) -> "Expr":
        return cls({m: Fraction(c)})

    @classmethod
    def of_func(cls, name: str, arg: "Expr") -> "Expr":
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        arg = _coerce(arg)
        if arg.odd_part():
            raise ValueError(f"odd argument to {name}")
        if not arg.terms:
            return cls.const(0 if name == "sin" else 1)
        return cls({Mono(0, 0, ((Func(name, arg), 1),), ()): Fraction(1)})

    # inspection -------------------------------------------------------
    @property
    def skey(self) -> tuple:
        if self._skey is None:
            self._skey = tuple(sorted((m.skey, c) for m, c in self.terms.items()))
        return self._skey

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.skey)
        return self._hash

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Expr.const(other)
        return isinstance(other, Expr) and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def variables(self) -> set[JetVar]:
        out: set[JetVar] = set()
        for m in self.terms:
            out.update(m.variables())
        return out

    def labels(self) -> set[str]:
        return {v.label for v in self.variables()}

    def odd_part(self) -> "Expr":
        return Expr({m: c for m, c in self.terms.items() if m.parity})

    def even_part(self) -> "Expr":
        return Expr({m: c for m, c in self.terms.items() if not m.parity})

    def parity(self) -> int | None:
        """0 or 1 for homogeneous expressions, None for mixed ones."""
        ps = {m.parity for m in self.terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def constant_value(self) -> Fraction | None:
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and UNIT in self.terms:
            return self.terms[UNIT]
        return None

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Expr(out)

    __radd__ = __add__

    def __neg__(self):
        return Expr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def scale(self, c) -> "Expr":
        c = Fraction(c)
        return Expr({m: c * k for m, k in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: dict[Mono, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                r = m1.times(m2)
                if r is None:
                    continue
                s, m = r
                out[m] = out.get(m, 0) + s * c1 * c2
        return Expr(out)

    def __rmul__(self, other):
        return _coerce(other) * self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("powers take nonnegative integer exponents")
        if self.odd_part():
            raise ValueError("odd power base")
        out = Expr.const(1)
        for _ in range(n):
            out = out * self
        return out

    def text(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for m in sorted(self.terms, key=_skey):
            c = self.terms[m]
            body = m.text()
            mag = abs(c)
            if not body:
                s = str(mag)
            elif mag == 1:
                s = body
            else:
                s = f"{mag}*{body}"
            pieces.append(("-" if c < 0 else "+", s))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, s in pieces[1:]:
            out += f" {sign} {s}"
        return out

    def __repr__(self):
        return f"Expr({self.text()})"

    __str__ = text


ZERO = Expr()
ONE = Expr.const(1)
I = Expr({Mono(0, 1, (), ()): Fraction(1)})
HBAR = Expr({Mono(1, 0, (), ()): Fraction(1)})


def hbar_power(k: int) -> Expr:
    return Expr({Mono(k, 0, (), ()): Fraction(1)})


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Expr.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as an expression")


def sin(e) -> Expr:
    return Expr.of_func("sin", e)


def cos(e) -> Expr:
    return Expr.of_func("cos", e)


def exp(e) -> Expr:
    return Expr.of_func("exp", e)


def _mono_expr(m: Mono, c: Fraction) -> Expr:
    return Expr({m: c})


def normalize(e: Expr) -> Expr:
    """Rebuild every monomial from its factors; a no-op on canonical input."""
    out = ZERO
    for m, c in e.terms.items():
        piece = Expr.const(c) * Expr({Mono(m.h, m.i, (), ()): Fraction(1)})
        for a, p in m.evens:
            base = Expr.of_var(a) if isinstance(a, JetVar) else Expr.of_func(a.name, normalize(a.arg))
            piece = piece * base ** p
        for v in m.odds:
            piece = piece * Expr.of_var(v)
        out = out + piece
    return out


def parity_split(e: Expr) -> tuple[Expr, Expr]:
    return e.even_part(), e.odd_part()


def _rest(m: Mono, drop: int, power_left: int) -> Mono:
    evens = list(m.evens)
    a, _ = evens[drop]
    if power_left:
        evens[drop] = (a, power_left)
    else:
        del evens[drop]
    return Mono(m.h, m.i, tuple(evens), m.odds)


def total_derivative(e: Expr, i: int, label: str = "x") -> Expr:
    """D_i along base copy ``label``; variables at other labels are constants."""
    out: dict[Mono, Fraction] = {}
    for m, c in e.terms.items():
        for mm, cc in _mono_total_derivative(m, i, label):
            out[mm] = out.get(mm, 0) + c * cc
    return Expr(out)


@lru_cache(maxsize=500_000)
def _mono_total_derivative(m: Mono, i: int, label: str) -> tuple:
    out: dict[Mono, Fraction] = {}

    def acc(expr_terms):
        for mm, cc in expr_terms:
            out[mm] = out.get(mm, 0) + cc

    for k, (a, p) in enumerate(m.evens):
        if isinstance(a, JetVar):
            if a.label != label:
                continue
            base = _rest(m, k, p - 1)
            r = base.times(Mono(0, 0, ((a.shift(i), 1),), ()))
            if r is not None:
                acc([(r[1], r[0] * p)])
        else:
            darg = total_derivative(a.arg, i, label)
            if not darg.terms:
                continue
            piece = Expr({_rest(m, k, p - 1): Fraction(p)}) * a.derivative() * darg
            acc(piece.terms.items())
    for k, v in enumerate(m.odds):
        if v.label != label:
            continue
        odds = list(m.odds)
        odds[k] = v.shift(i)
        res = _odd_sort(odds)
        if res is None:
            continue
        sgn, ordered = res
        acc([(Mono(m.h, m.i, m.evens, ordered), sgn)])
    return tuple((mm, cc) for mm, cc in out.items() if cc)


def total_derivative_multi(e: Expr, sigma: Iterable[int], label: str = "x") -> Expr:
    for d in sigma:
        e = total_derivative(e, d, label)
    return e


def partial_derivative(e: Expr, v: JetVar, side: str = LEFT) -> Expr:
    """Partial derivative by ``v``; odd ``v`` is moved to ``side`` then removed."""
    if side not in (LEFT, RIGHT):
        raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}")
    out = ZERO
    direct: dict[Mono, Fraction] = {}
    for m, c in e.terms.items():
        theta = Mono(m.h, m.i, (), m.odds)
        even_d = ZERO
        for k, (a, p) in enumerate(m.evens):
            if isinstance(a, JetVar):
                if a == v:
                    rest = _rest(m, k, p - 1)
                    even_d = even_d + Expr({Mono(0, 0, rest.evens, ()): c * p})
            else:
                darg = partial_derivative(a.arg, v, side)
                if darg.terms:
                    rest = _rest(m, k, p - 1)
                    even_d = even_d + Expr({Mono(0, 0, rest.evens, ()): c * p}) * a.derivative() * darg
        if even_d.terms:
            th = Expr({theta: Fraction(1)})
            out = out + (even_d * th if side == LEFT else th * even_d)
        if v.parity and v in m.odds:
            k = m.odds.index(v)
            n_before = k if side == LEFT else len(m.odds) - 1 - k
            odds = m.odds[:k] + m.odds[k + 1:]
            nm = Mono(m.h, m.i, m.evens, odds)
            direct[nm] = direct.get(nm, 0) + (-c if n_before % 2 else c)
    return out + Expr(direct)


def jet_variables_of(e: Expr, coord: Coordinate, label: str = "x") -> list[JetVar]:
    vs = [v for v in e.variables() if v.coord == coord and v.label == label]
    return sorted(vs, key=_skey)


def alternating_sum(parts: dict[MultiIndex, Expr], label: str = "x") -> Expr:
    """Sum over sigma of (-D)^sigma applied to ``parts[sigma]``."""
    prefixes = {tuple(s[:k]) for s in parts for k in range(len(s) + 1)}
    keyed = {tuple(s): p for s, p in parts.items()}

    def q(s: tuple) -> Expr:
        acc = keyed.get(s, ZERO)
        children = sorted({p[len(s)] for p in prefixes if len(p) == len(s) + 1 and p[: len(s)] == s})
        for j in children:
            acc = acc - total_derivative(q(s + (j,)), j, label)
        return acc

    return q(())


def euler_derivative(f: Expr, c: Coordinate, side: str = RIGHT, label: str = "x") -> Expr:
    parts = {}
    for v in jet_variables_of(f, c, label):
        d = partial_derivative(f, v, side)
        if d.terms:
            parts[v.sigma] = d
    return alternating_sum(parts, label)


def at_zero_section(e: Expr) -> Expr:
    """Substitute zero for every jet variable."""
    out = ZERO
    for m, c in e.terms.items():
        if m.odds:
            continue
        piece = Expr({Mono(m.h, m.i, (), ()): c})
        for a, p in m.evens:
            if isinstance(a, JetVar):
                piece = ZERO
                break
            piece = piece * Expr.of_func(a.name, at_zero_section(a.arg)) ** p
        out = out + piece
    return out


def is_trivial_density(f: Expr, fc: FieldContent | None = None, label: str = "x") -> bool:
    """True iff the integral of ``f`` is zero modulo total divergences."""
    if at_zero_section(f).terms:
        return False
    coords = fc.coordinates if fc is not None else {v.coord for v in f.variables()}
    for c in coords:
        if euler_derivative(f, c, RIGHT, label).terms:
            return False
    return True


def relabel(e: Expr, mapping: dict[str, str]) -> Expr:
    """Rename base-copy labels of every variable."""
    if not mapping:
        return e
    out = ZERO
    for m, c in e.terms.items():
        piece = Expr({Mono(m.h, m.i, (), ()): c})
        for a, p in m.evens:
            if isinstance(a, JetVar):
                base = Expr.of_var(a.relabel(mapping.get(a.label, a.label)))
            else:
                base = Expr.of_func(a.name, relabel(a.arg, mapping))
            piece = piece * base ** p
        for v in m.odds:
            piece = piece * Expr.of_var(v.relabel(mapping.get(v.label, v.label)))
        out = out + piece
    return out
