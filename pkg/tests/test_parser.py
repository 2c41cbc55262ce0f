from __future__ import annotations

import random
from fractions import Fraction

import pytest

from bvjet.exprcore import HBAR, I, FieldContent, cos, hbar_power, total_derivative
from bvjet.parser import ParseError, parse_density, parse_document, parse_fields, print_density
from bvjet.randgen import DEFAULT_FIELDS, TWO_FIELDS, random_density

FC = DEFAULT_FIELDS


def roundtrip_cases(count):
    rng = random.Random(2024)
    contents = [
        DEFAULT_FIELDS,
        TWO_FIELDS,
        FieldContent.from_pairs(2, [("q", 0, "p"), ("c", 1, "b")]),
        FieldContent.from_pairs(4, [("u", 0, "us")]),
    ]
    for k in range(count):
        fc = contents[k % len(contents)]
        e = random_density(rng, fc, 3, 3)
        if k % 7 == 0:
            e = e * HBAR
        if k % 11 == 0:
            e = e * I
        yield fc, e


def test_thousand_densities_round_trip():
    failures = [(fc, e) for fc, e in roundtrip_cases(1000) if parse_density(print_density(e), fc) != e]
    assert failures == []


def test_basic_syntax():
    q, p = FC.var("q"), FC.var("p")
    assert parse_density("p*q*q_xx", FC) == p * q * FC.var("q", (1, 1))
    assert parse_density("-3/2*q^2 + cos(q)", FC) == q.scale(-1) * q.scale(Fraction(3, 2)) + cos(q)
    assert parse_density("D(q*p, x, 1)", FC) == total_derivative(q * p, 1)
    assert parse_density("hbar^-2*I*q", FC) == hbar_power(-2) * I * q


def test_higher_dimension_nested_derivatives():
    fc = FieldContent.from_pairs(4, [("u", 0, "us")])
    e = parse_density("D(D(u, x4, 2), x1, 1)", fc)
    assert e == fc.var("u", (1, 4, 4))
    assert print_density(e) == "D(D(u, x1, 1), x4, 2)"


@pytest.mark.parametrize("text, message, col", [
    ("p*q*", "unexpected 'end of input'", 5),
    ("p*r", "unknown field 'r'", 3),
    ("q_w", "direction 'w' not available", 1),
    ("sin(p)", "", 1),
    ("p^2", "", 2),
    ("q^-1", "negative exponents", 2),
    ("D(q, t, 1)", "unknown direction 't'", 1),
    ("q $ p", "unexpected character '$'", 3),
    ("q^1/2", "exponent must be an integer", 3),
])
def test_errors_carry_positions(text, message, col):
    with pytest.raises(ParseError) as info:
        parse_density(text, FC)
    assert info.value.col == col
    assert message in str(info.value)
    assert str(info.value).startswith(f"line 1, column {col}:")


def test_field_declarations():
    fc = parse_fields("q parity 0; p antifield_of q; c parity 1 ghost 1; cs antifield_of c")
    assert [c.name for c in fc.coordinates] == ["q", "p", "c", "cs"]
    assert fc["cs"].parity == 0 and fc["c"].ghost == 1


@pytest.mark.parametrize("text, message", [
    ("q parity 0", "has no antifield"),
    ("q parity 2; p antifield_of q", "must be 0 or 1"),
    ("q parity 0; p antifield_of r", "undeclared field"),
    ("sin parity 0; p antifield_of sin", "invalid field name"),
    ("q parity 0; q antifield_of q", "declared twice"),
    ("q frobnicate", "cannot read"),
])
def test_bad_field_declarations(text, message):
    with pytest.raises(ParseError, match=message):
        parse_fields(text)


def test_document_headers_and_comments():
    doc = "# a comment\nfields: u parity 0; us antifield_of u\ndim: 2\n\nus*u_xy  # trailing\nu^2\n"
    fc, lines = parse_document(doc)
    assert fc.dim == 2 and [c.name for c in fc.coordinates] == ["u", "us"]
    assert [n for n, _ in lines] == [5, 6]
    assert lines[0][1] == fc.var("us") * fc.var("u", (1, 2))


def test_document_errors_report_their_line():
    with pytest.raises(ParseError, match="^line 3, column 3"):
        parse_document("q\np\nq*\n")
