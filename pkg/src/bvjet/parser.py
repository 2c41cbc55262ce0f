"""Text syntax for densities and field-content headers.

Grammar::

    expr   := ('+'|'-')? term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' '-'? NUMBER)?
    atom   := NUMBER | NAME suffix? | func '(' expr ')'
            | 'D' '(' expr ',' NAME ',' NUMBER ')' | '(' expr ')'
    suffix := '_' [x-z]+

NUMBER may be a ratio ``3/2``.  ``I`` is the imaginary unit and ``hbar`` the
formal Planck constant; only ``hbar`` accepts a negative exponent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .exprcore import (
    FUNCTIONS,
    HBAR,
    I,
    Expr,
    FieldContent,
    JetVar,
    MultiIndex,
    direction_names,
    hbar_power,
    total_derivative,
)

RESERVED = {"D", "I", "hbar"} | set(FUNCTIONS)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Span:
    line: int
    col: int


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span


_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z]+)?)
  | (?P<op>[-+*^(),])
""", re.VERBOSE)


def tokenize(text: str, line: int = 1) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), Span(line, pos + 1)))
        pos = m.end()
    out.append(Token("end", "", Span(line, len(text) + 1)))
    return out


# syntax tree ----------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Fraction
    span: Span


@dataclass(frozen=True)
class Name:
    name: str
    suffix: str
    span: Span


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    span: Span


@dataclass(frozen=True)
class Deriv:
    arg: object
    direction: str
    count: int
    span: Span


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int
    span: Span


@dataclass(frozen=True)
class Product:
    factors: tuple
    span: Span


@dataclass(frozen=True)
class Sum:
    terms: tuple  # of (sign, node)
    span: Span


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def take(self, kind: str, text: str | None = None) -> Token:
        t = self.cur
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", t.span.line, t.span.col)
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.cur.kind == "op" and self.cur.text == text

    def expr(self):
        span = self.cur.span
        terms = []
        sign = 1
        if self.at("+") or self.at("-"):
            sign = -1 if self.take("op").text == "-" else 1
        terms.append((sign, self.term()))
        while self.at("+") or self.at("-"):
            sign = -1 if self.take("op").text == "-" else 1
            terms.append((sign, self.term()))
        return Sum(tuple(terms), span)

    def term(self):
        span = self.cur.span
        factors = [self.factor()]
        while self.at("*"):
            self.take("op", "*")
            factors.append(self.factor())
        return Product(tuple(factors), span)

    def factor(self):
        node = self.atom()
        while self.at("^"):
            span = self.take("op", "^").span
            neg = False
            if self.at("-"):
                self.take("op", "-")
                neg = True
            t = self.take("number")
            if "/" in t.text:
                raise ParseError("exponent must be an integer", t.span.line, t.span.col)
            node = Power(node, -int(t.text) if neg else int(t.text), span)
        return node

    def atom(self):
        t = self.cur
        if t.kind == "number":
            self.pos += 1
            return Num(Fraction(t.text), t.span)
        if self.at("("):
            self.take("op", "(")
            inner = self.expr()
            self.take("op", ")")
            return inner
        if t.kind == "name":
            self.pos += 1
            base, _, suffix = t.text.partition("_")
            if base in FUNCTIONS and not suffix:
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                return Call(base, arg, t.span)
            if base == "D" and not suffix:
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ",")
                d = self.take("name")
                self.take("op", ",")
                n = self.take("number")
                self.take("op", ")")
                return Deriv(arg, d.text, int(Fraction(n.text)), t.span)
            return Name(base, suffix, t.span)
        got = t.text or "end of input"
        raise ParseError(f"unexpected {got!r}", t.span.line, t.span.col)


def parse_ast(text: str, line: int = 1):
    p = _Parser(tokenize(text, line))
    node = p.expr()
    if p.cur.kind != "end":
        t = p.cur
        raise ParseError(f"unexpected {t.text!r}", t.span.line, t.span.col)
    return node


def elaborate(node, fc: FieldContent) -> Expr:
    dirs = direction_names(fc.dim)
    letters = "xyz"[: fc.dim] if fc.dim <= 3 else ""

    def err(msg, span):
        return ParseError(msg, span.line, span.col)

    def go(n) -> Expr:
        if isinstance(n, Num):
            return Expr.const(n.value)
        if isinstance(n, Name):
            if n.name == "I" and not n.suffix:
                return I
            if n.name == "hbar" and not n.suffix:
                return HBAR
            if n.name not in fc:
                raise err(f"unknown field {n.name!r}", n.span)
            sigma = []
            for ch in n.suffix:
                if ch not in letters:
                    raise err(f"direction {ch!r} not available in dimension {fc.dim}", n.span)
                sigma.append(letters.index(ch) + 1)
            return Expr.of_var(JetVar(fc[n.name], MultiIndex(sigma)))
        if isinstance(n, Call):
            arg = go(n.arg)
            try:
                return Expr.of_func(n.func, arg)
            except ValueError as exc:
                raise err(str(exc), n.span) from None
        if isinstance(n, Deriv):
            if n.direction not in dirs:
                raise err(f"unknown direction {n.direction!r}", n.span)
            out = go(n.arg)
            for _ in range(n.count):
                out = total_derivative(out, dirs.index(n.direction) + 1)
            return out
        if isinstance(n, Power):
            base = go(n.base)
            if n.exponent < 0:
                if base != HBAR:
                    raise err("negative exponents are only allowed on hbar", n.span)
                return hbar_power(n.exponent)
            if base == HBAR:
                return hbar_power(n.exponent)
            try:
                return base ** n.exponent
            except ValueError as exc:
                raise err(str(exc), n.span) from None
        if isinstance(n, Product):
            out = Expr.const(1)
            for f in n.factors:
                out = out * go(f)
            return out
        if isinstance(n, Sum):
            out = Expr()
            for sign, t in n.terms:
                v = go(t)
                out = out + (v if sign > 0 else -v)
            return out
        raise TypeError(n)

    return go(node)


def parse_density(text: str, fc: FieldContent, line: int = 1) -> Expr:
    return elaborate(parse_ast(text, line), fc)


def print_density(e: Expr) -> str:
    return e.text()


# headers ------------------------------------------------------------

def parse_fields(text: str, dim: int = 1, line: int = 1) -> FieldContent:
    """``q parity 0; p antifield_of q`` with an optional ``ghost G`` on fields."""
    fields: dict[str, tuple[int, int]] = {}
    antis: dict[str, str] = {}
    for chunk in text.split(";"):
        words = chunk.split()
        if not words:
            continue
        name = words[0]
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", name) or name in RESERVED:
            raise ParseError(f"invalid field name {name!r}", line)
        if name in fields or name in antis:
            raise ParseError(f"field {name!r} declared twice", line)
        rest = words[1:]
        if len(rest) >= 2 and rest[0] == "parity":
            if rest[1] not in ("0", "1"):
                raise ParseError(f"parity of {name!r} must be 0 or 1", line)
            ghost = 0
            if len(rest) == 4 and rest[2] == "ghost":
                ghost = int(rest[3])
            elif len(rest) != 2:
                raise ParseError(f"cannot read declaration {chunk.strip()!r}", line)
            fields[name] = (int(rest[1]), ghost)
        elif len(rest) == 2 and rest[0] == "antifield_of":
            antis[name] = rest[1]
        else:
            raise ParseError(f"cannot read declaration {chunk.strip()!r}", line)
    by_field = {}
    for anti, f in antis.items():
        if f not in fields:
            raise ParseError(f"antifield {anti!r} refers to undeclared field {f!r}", line)
        if f in by_field:
            raise ParseError(f"field {f!r} has two antifields", line)
        by_field[f] = anti
    missing = [f for f in fields if f not in by_field]
    if missing:
        raise ParseError(f"field {missing[0]!r} has no antifield", line)
    try:
        return FieldContent.from_pairs(dim, [(f, p, by_field[f], g) for f, (p, g) in fields.items()])
    except ValueError as exc:
        raise ParseError(str(exc), line) from None


DEFAULT_FIELDS_TEXT = "q parity 0; p antifield_of q"


def parse_document(text: str, fields: str | None = None, dim: int | None = None):
    """Split an input file into its field content and density lines.

    Header lines ``fields: ...`` and ``dim: N`` may appear anywhere; explicit
    arguments override them.  Returns ``(fc, [(line_number, Expr), ...])``.
    """
    header_fields, header_dim = None, None
    bodies = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("fields:"):
            header_fields = (line[len("fields:"):].strip(), lineno)
        elif line.startswith("dim:"):
            try:
                header_dim = int(line[len("dim:"):].strip())
            except ValueError:
                raise ParseError("dim must be an integer", lineno) from None
        else:
            bodies.append((lineno, line))
    d = dim if dim is not None else (header_dim or 1)
    if fields is not None:
        fc = parse_fields(fields, d)
    elif header_fields is not None:
        fc = parse_fields(header_fields[0], d, header_fields[1])
    else:
        fc = parse_fields(DEFAULT_FIELDS_TEXT, d)
    return fc, [(n, parse_density(line, fc, n)) for n, line in bodies]
