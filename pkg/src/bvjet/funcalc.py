"""Functional calculus over distinct base copies.

A term of an extended functional is an ordered graded product of factors.
Each factor is a monomial density living on its own base copy together with
a list of ports.  A port records one functional derivative that fell on the
factor: the coordinate kind and pair index, the multi-index of the tagged
operator (-d/dy)^sigma, and a reference either to a free test-shift slot
(an external label) or to an internal delta coupling shared with exactly
one other port.  Internal couplings are bound names, so canonical forms are
taken up to renaming them and up to graded permutation of the factors.

Only the restriction to the diagonal turns tags into total derivatives, and
each tag acts on its own factor.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product
from typing import Iterable

from .exprcore import (
    FIELD,
    LEFT,
    RIGHT,
    Coordinate,
    Expr,
    FieldContent,
    Mono,
    partial_derivative,
    total_derivative_multi,
)
from .functionals import LocalFunctional

FREE_SLOT_ERROR = "free test-shift slot"


def _kind(c: Coordinate) -> int:
    return 0 if c.kind == FIELD else 1


def _strip(m: Mono) -> tuple[int, int, Mono]:
    if m.h == 0 and m.i == 0:
        return 0, 0, m
    return m.h, m.i, Mono(0, 0, m.evens, m.odds)


def _total_order(ports) -> int:
    return sum(len(p[2]) for p in ports)


class _Term:
    """Mutable working form of one term."""

    __slots__ = ("coef", "h", "i", "factors", "slots")

    def __init__(self, coef, h, i, factors, slots):
        self.coef = coef
        self.h = h
        self.i = i
        self.factors = list(factors)
        self.slots = list(slots)

    def edge_ids(self) -> set:
        return {p[3][1] for _, ports in self.factors for p in ports if p[3][0] == "e"}

    def factor_parity(self) -> int:
        return sum(m.parity for m, _ in self.factors) % 2

    def slot_parity(self) -> int:
        return sum(p for _, p in self.slots) % 2


def _canonical(t: _Term):
    """Return ``(sign, key)`` for a working term, or None when it vanishes."""
    for m, ports in t.factors:
        if not m.evens and not m.odds and _total_order(ports) > 0:
            return None
    sign = 1
    slots = list(t.slots)
    for a in range(1, len(slots)):
        b = a
        while b > 0 and slots[b - 1][0] > slots[b][0]:
            if slots[b - 1][1] and slots[b][1]:
                sign = -sign
            slots[b - 1], slots[b] = slots[b], slots[b - 1]
            b -= 1
    for a in range(1, len(slots)):
        if slots[a - 1][0] == slots[a][0]:
            raise ValueError(f"slot label {slots[a][0][1]!r} used twice")
    factors = t.factors
    n = len(factors)

    def inv(j):
        m, ports = factors[j]
        return (m.skey, tuple(sorted((p[0], p[1], tuple(p[2]), p[3] if p[3][0] == "s" else ("e",)) for p in ports)))

    invs = [inv(j) for j in range(n)]
    base_order = sorted(range(n), key=lambda j: invs[j])
    groups: list[list[int]] = []
    for j in base_order:
        if groups and invs[groups[-1][0]] == invs[j]:
            groups[-1].append(j)
        else:
            groups.append([j])

    best = None
    best_signs: set = set()
    for choice in product(*(permutations(g) for g in groups)):
        order = [j for g in choice for j in g]
        fsign = _perm_sign(order, [factors[j][0].parity for j in order])
        for enc in _edge_encodings(factors, order):
            if best is None or enc < best:
                best = enc
                best_signs = {fsign}
            elif enc == best:
                best_signs.add(fsign)
    if len(best_signs) > 1:
        return None
    sign *= best_signs.pop() if best_signs else 1
    key = (t.h, t.i, best or (), tuple(slots))
    return sign, key


def _perm_sign(order, parities) -> int:
    sign = 1
    for a in range(len(order)):
        if not parities[a]:
            continue
        for b in range(a + 1, len(order)):
            if parities[b] and order[a] > order[b]:
                sign = -sign
    return sign


def _edge_encodings(factors, order):
    results = []

    def rec(pos, mapping, acc):
        if pos == len(order):
            results.append(tuple(acc))
            return
        m, ports = factors[order[pos]]
        fixed = []
        pending: dict = {}
        for p in ports:
            head = (p[0], p[1], tuple(p[2]))
            ref = p[3]
            if ref[0] == "s":
                fixed.append((head, ref))
            elif ref[1] in mapping:
                fixed.append((head, ("e", mapping[ref[1]])))
            else:
                pending.setdefault(head, [])
                if ref[1] not in pending[head]:
                    pending[head].append(ref[1])
        heads = sorted(pending)
        for choice in product(*(permutations(pending[h]) for h in heads)):
            new_map = dict(mapping)
            for edges in choice:
                for e in edges:
                    if e not in new_map:
                        new_map[e] = len(new_map)
            enc_ports = fixed + [(h, ("e", new_map[e])) for h in heads for e in pending[h]]
            rec(pos + 1, new_map, acc + [(m, tuple(sorted(enc_ports)))])

    rec(0, {}, [])
    return [_Enc(r) for r in results]


class _Enc(tuple):
    """Encoded factor list; compares by monomial sort keys then ports."""

    __slots__ = ()

    def __lt__(self, other):
        return self._cmp() < other._cmp()

    def __gt__(self, other):
        return self._cmp() > other._cmp()

    def __le__(self, other):
        return self._cmp() <= other._cmp()

    def __ge__(self, other):
        return self._cmp() >= other._cmp()

    def _cmp(self):
        return tuple((m.skey, ports) for m, ports in self)


class ExtendedFunctional:
    """Formal sum of multi-point terms with tagged derivatives and couplings."""

    __slots__ = ("fc", "terms")

    def __init__(self, fc: FieldContent, terms: dict | None = None):
        self.fc = fc
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, fc: FieldContent) -> "ExtendedFunctional":
        return cls(fc, {})

    @classmethod
    def unit(cls, fc: FieldContent) -> "ExtendedFunctional":
        return cls(fc, {(0, 0, _Enc(()), ()): Fraction(1)})

    @classmethod
    def from_local(cls, F: LocalFunctional) -> "ExtendedFunctional":
        working = []
        for key, coef in F.terms.items():
            partial = [_Term(coef, 0, 0, [], [])]
            for block in key:
                nxt = []
                for t in partial:
                    for m, c in block.terms.items():
                        h, i, mm = _strip(m)
                        nxt.append(_Term(t.coef * c, t.h + h, t.i + i, t.factors + [(mm, ())], []))
                partial = nxt
            working.extend(partial)
        return _collect(F.fc, working)

    # term access ------------------------------------------------------
    def _working(self) -> list[_Term]:
        out = []
        for (h, i, enc, slots), c in self.terms.items():
            factors = [(m, tuple((hd[0], hd[1], hd[2], ref) for hd, ref in ports)) for m, ports in enc]
            out.append(_Term(c, h, i, factors, list(slots)))
        return out

    # arithmetic -------------------------------------------------------
    def __add__(self, other: "ExtendedFunctional") -> "ExtendedFunctional":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return ExtendedFunctional(self.fc, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "ExtendedFunctional":
        c = Fraction(c)
        return ExtendedFunctional(self.fc, {k: c * v for k, v in self.terms.items()})

    def times_constant(self, h: int = 0, i: int = 0, c=1) -> "ExtendedFunctional":
        """Multiply by c * i^i * hbar^h."""
        out: dict = {}
        for (h0, i0, enc, slots), v in self.terms.items():
            ii = i0 + i
            sign = -1 if (ii // 2) % 2 else 1
            key = (h0 + h, ii % 2, enc, slots)
            out[key] = out.get(key, 0) + sign * Fraction(c) * v
        return ExtendedFunctional(self.fc, out)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return ext_multiply(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        return isinstance(other, ExtendedFunctional) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def parity(self) -> int | None:
        ps = {(sum(m.parity for m, _ in enc) + sum(p for _, p in slots)) % 2
              for (_, _, enc, slots) in self.terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def parity_parts(self) -> tuple["ExtendedFunctional", "ExtendedFunctional"]:
        ev, od = {}, {}
        for k, v in self.terms.items():
            _, _, enc, slots = k
            p = (sum(m.parity for m, _ in enc) + sum(q for _, q in slots)) % 2
            (od if p else ev)[k] = v
        return ExtendedFunctional(self.fc, ev), ExtendedFunctional(self.fc, od)

    def hbar_parts(self) -> dict[int, "ExtendedFunctional"]:
        parts: dict[int, dict] = {}
        for (h, i, enc, slots), v in self.terms.items():
            parts.setdefault(h, {})[(0, i, enc, slots)] = v
        return {h: ExtendedFunctional(self.fc, t) for h, t in sorted(parts.items())}

    def free_slots(self) -> set:
        return {s for (_, _, _, slots) in self.terms for s, _ in slots}

    def text(self) -> str:
        if not self.terms:
            return "0"
        names = {c.pair * 2 + _kind(c): c.name for c in self.fc.coordinates}
        lines = []
        for key in sorted(self.terms, key=_term_sort_key):
            h, i, enc, slots = key
            c = self.terms[key]
            pieces = []
            for m, ports in enc:
                dens = Expr({m: Fraction(1)}).text()
                tags = []
                for (kind, pair, sigma), ref in ports:
                    tag = names[pair * 2 + kind]
                    if sigma:
                        tag += "_" + "".join(_dir_letter(d, self.fc.dim) for d in sigma)
                    where = f"e{ref[1]}" if ref[0] == "e" else ref[1]
                    tags.append(f"{tag}@{where}")
                pieces.append(f"<{dens}|{', '.join(tags)}>" if tags else f"<{dens}>")
            const = []
            if i:
                const.append("I")
            if h:
                const.append("hbar" if h == 1 else f"hbar^{h}")
            head = "*".join([str(c)] + const)
            slot_txt = "".join(f" d{self.fc.coordinates[ref[2]].name}({ref[1]})" for ref, _ in slots)
            lines.append(f"{head} * " + " * ".join(pieces) + slot_txt if pieces else head + slot_txt)
        return "\n".join(lines)

    __str__ = text

    def __repr__(self):
        return f"ExtendedFunctional({len(self.terms)} terms)"


def _dir_letter(d: int, dim: int) -> str:
    return "xyz"[d - 1] if dim <= 3 else f"[{d}]"


def _term_sort_key(key):
    h, i, enc, slots = key
    return (len(enc), h, i, enc._cmp(), slots)


def _collect(fc: FieldContent, working: Iterable[_Term], log: list | None = None) -> ExtendedFunctional:
    """Canonicalize and sum; cancelled classes are appended to ``log``."""
    out: dict = {}
    seen: dict = {}
    for t in working:
        if not t.coef:
            continue
        if t.i >= 2:
            t.coef *= (-1) ** (t.i // 2)
            t.i %= 2
        res = _canonical(t)
        if res is None:
            continue
        s, key = res
        out[key] = out.get(key, 0) + s * t.coef
        if log is not None:
            seen[key] = seen.get(key, 0) + 1
    if log is not None:
        log.extend((key, n) for key, n in seen.items() if n > 1 and not out[key])
    return ExtendedFunctional(fc, out)


def _offset_edges(t: _Term, offset: int) -> _Term:
    if not offset:
        return t
    factors = [(m, tuple((p[0], p[1], p[2], ("e", p[3][1] + offset) if p[3][0] == "e" else p[3]) for p in ports))
               for m, ports in t.factors]
    return _Term(t.coef, t.h, t.i, factors, list(t.slots))


def _product(a: _Term, b: _Term) -> _Term:
    b = _offset_edges(b, max(a.edge_ids(), default=-1) + 1)
    sign = -1 if a.slot_parity() and b.factor_parity() else 1
    ii = a.i + b.i
    if ii >= 2:
        ii -= 2
        sign = -sign
    return _Term(sign * a.coef * b.coef, a.h + b.h, ii, a.factors + b.factors, a.slots + b.slots)


def ext_multiply(F: ExtendedFunctional, G: ExtendedFunctional) -> ExtendedFunctional:
    working = [_product(a, b) for a in F._working() for b in G._working()]
    return _collect(F.fc, working)


def _derive(t: _Term, coord: Coordinate, side: str, ref) -> list[_Term]:
    """Functional derivative of one term; the new slot is appended at the end."""
    pc = coord.parity
    out = []
    pars = [m.parity for m, _ in t.factors]
    total_after = t.factor_parity() + pc
    slot_par = t.slot_parity()
    for k, (m, ports) in enumerate(t.factors):
        vs = [v for v in m.variables() if v.coord == coord]
        if not vs:
            continue
        if side == LEFT:
            sign = -1 if pc and sum(pars[:k]) % 2 else 1
            if pc and (total_after + slot_par) % 2:
                sign = -sign
        else:
            sign = -1 if pc and sum(pars[k + 1:]) % 2 else 1
        dens = Expr({m: Fraction(1)})
        for v in sorted(set(vs), key=lambda v: v.skey):
            d = partial_derivative(dens, v, side)
            for mm, c in d.terms.items():
                h, i, mm = _strip(mm)
                port = (_kind(coord), coord.pair, tuple(v.sigma), ref)
                factors = list(t.factors)
                factors[k] = (mm, ports + (port,))
                sg = sign
                ii = t.i + i
                if ii >= 2:
                    ii -= 2
                    sg = -sg
                out.append(_Term(sg * c * t.coef, t.h + h, ii, factors, t.slots + [(ref, pc)]))
    return out


def _derive_coef(t: _Term, coord: Coordinate, side: str, ref) -> list[_Term]:
    """Coefficient of a functional derivative; the port stays, no slot is kept."""
    pc = coord.parity
    out = []
    for d in _derive(t, coord, side, ref):
        d.slots.pop()
        if side == LEFT and pc and (t.factor_parity() + pc) % 2:
            d.coef = -d.coef
        out.append(d)
    return out


def _link(t: _Term, a, b, coupling: int) -> _Term:
    """Join the ports referencing ``a`` and ``b`` into a fresh coupling."""
    eid = max(t.edge_ids(), default=-1) + 1
    factors = [(m, tuple((p[0], p[1], p[2], ("e", eid) if p[3] in (a, b) else p[3]) for p in ports))
               for m, ports in t.factors]
    return _Term(coupling * t.coef, t.h, t.i, factors, t.slots)


def functional_derivative(F: ExtendedFunctional, coord: Coordinate, label: str,
                          side: str = RIGHT) -> ExtendedFunctional:
    """Derivative along a test shift of ``coord`` supported on base copy ``label``."""
    ref = ("s", label, coord.position)
    if any(s[1] == label for s in F.free_slots()):
        raise ValueError(f"label {label!r} is not fresh")
    working = []
    for t in F._working():
        working.extend(_derive(t, coord, side, ref))
    return _collect(F.fc, working)


_Y1 = ("s", "#1", -1)
_Y2 = ("s", "#2", -1)


def _require_closed(*Fs: ExtendedFunctional) -> None:
    for F in Fs:
        if F.free_slots():
            raise ValueError(f"operand carries a {FREE_SLOT_ERROR}")


def functional_schouten(F: ExtendedFunctional, G: ExtendedFunctional,
                        log: list | None = None) -> ExtendedFunctional:
    """Couple right derivatives of F with left derivatives of G through fresh deltas."""
    _require_closed(F, G)
    fc = F.fc
    working = []
    ft, gt = F._working(), G._working()
    for q, qd in fc.pairs:
        for first, second, coupling in ((q, qd, 1), (qd, q, -1)):
            rs = [d for t in ft for d in _derive_coef(t, first, RIGHT, _Y1)]
            if not rs:
                continue
            ls = [d for t in gt for d in _derive_coef(t, second, LEFT, _Y2)]
            for r in rs:
                for l in ls:
                    working.append(_link(_product(r, l), _Y1, _Y2, coupling))
    return _collect(fc, working, log)


def functional_laplacian(F: ExtendedFunctional, log: list | None = None) -> ExtendedFunctional:
    """Left q-derivative of the left q-dagger derivative, coupled with +1.

    Pairs with an odd field pick up a minus sign from moving the q-dagger
    variation past the odd q-variation.
    """
    _require_closed(F)
    fc = F.fc
    working = []
    for t in F._working():
        for q, qd in fc.pairs:
            for d1 in _derive_coef(t, qd, LEFT, _Y2):
                for d2 in _derive_coef(d1, q, LEFT, _Y1):
                    working.append(_link(d2, _Y1, _Y2, -1 if q.parity else 1))
    return _collect(fc, working, log)


def restrict_to_diagonal(F: ExtendedFunctional, normalize: bool = False) -> LocalFunctional:
    """Merge base copies along couplings; tags become total derivatives."""
    acc: dict = {}
    for t in F._working():
        if t.slots and not normalize:
            raise ValueError(FREE_SLOT_ERROR)
        dens = []
        for m, ports in t.factors:
            sigma = [d for p in ports for d in p[2]]
            e = total_derivative_multi(Expr({m: Fraction(1)}), sigma)
            dens.append(e.scale(-1) if len(sigma) % 2 else e)
        parent = list(range(len(t.factors)))

        def find(j):
            while parent[j] != j:
                parent[j] = parent[parent[j]]
                j = parent[j]
            return j

        owners: dict = {}
        for j, (_, ports) in enumerate(t.factors):
            for p in ports:
                if p[3][0] == "e":
                    owners.setdefault(p[3][1], []).append(j)
        for js in owners.values():
            for j in js[1:]:
                parent[find(j)] = find(js[0])
        comps: dict = {}
        for j in range(len(t.factors)):
            comps.setdefault(find(j), []).append(j)
        order = [j for js in comps.values() for j in js]
        sign = _perm_sign(order, [t.factors[j][0].parity for j in order])
        blocks = []
        for js in comps.values():
            b = Expr.const(1)
            for j in js:
                b = b * dens[j]
            blocks.append(b)
        const = Expr({Mono(t.h, t.i, (), ()): Fraction(1)})
        if t.h or t.i:
            if not blocks:
                raise ValueError("hbar or i on a block-free term has no local form")
            blocks[0] = const * blocks[0]
        key = tuple(blocks)
        acc[key] = acc.get(key, 0) + sign * t.coef
    return LocalFunctional(F.fc, acc)


def lift(F: LocalFunctional) -> ExtendedFunctional:
    return ExtendedFunctional.from_local(F)


def term_text(fc: FieldContent, key) -> str:
    return ExtendedFunctional(fc, {key: Fraction(1)}).text()


def diagonal_equal(F: ExtendedFunctional, G: ExtendedFunctional) -> bool:
    from .functionals import is_trivial

    return is_trivial(restrict_to_diagonal(F - G))
