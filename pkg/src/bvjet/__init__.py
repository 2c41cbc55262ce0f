"""Schouten bracket and BV Laplacian on jet spaces, with multi-point functionals."""

from .exprcore import Expr, FieldContent
from .functionals import LocalFunctional, functional_equal, integral, is_trivial, laplacian_jet, schouten_jet
from .funcalc import ExtendedFunctional, functional_laplacian, functional_schouten, lift, restrict_to_diagonal
from .parser import parse_density, parse_fields

__all__ = [
    "Expr",
    "ExtendedFunctional",
    "FieldContent",
    "LocalFunctional",
    "functional_equal",
    "functional_laplacian",
    "functional_schouten",
    "integral",
    "is_trivial",
    "laplacian_jet",
    "lift",
    "parse_density",
    "parse_fields",
    "restrict_to_diagonal",
    "schouten_jet",
]
