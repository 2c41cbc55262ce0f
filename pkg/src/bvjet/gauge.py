"""Yang-Mills BV action for a user-supplied Lie algebra.

Structure constants are stored as ``f[(a, b, c)] = f^c_{ab}`` with 1-based
indices.  The base metric is the Euclidean delta, so index placement on the
base is immaterial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path

from .exprcore import Expr, FieldContent, total_derivative
from .functionals import LocalFunctional, integral, is_trivial, laplacian_jet, schouten_jet
from .funcalc import functional_laplacian, lift, restrict_to_diagonal


@dataclass
class LieAlgebraSpec:
    dim: int
    f: dict = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        self.f = {k: Fraction(v) for k, v in self.f.items() if v}
        for (a, b, c), v in list(self.f.items()):
            if not all(1 <= x <= self.dim for x in (a, b, c)):
                raise ValueError(f"index out of range in f^{c}_{a}{b}")
            partner = self.f.get((b, a, c))
            if partner is None:
                self.f[(b, a, c)] = -v
            elif partner != -v:
                raise ValueError(f"structure constants not antisymmetric at f^{c}_{a}{b}")

    def const(self, a: int, b: int, c: int) -> Fraction:
        """f^c_{ab}."""
        return self.f.get((a, b, c), Fraction(0))

    def jacobi_defects(self) -> list[tuple]:
        r = range(1, self.dim + 1)
        bad = []
        for a, b, c, e in product(r, r, r, r):
            s = sum(self.const(a, b, d) * self.const(d, c, e)
                    + self.const(b, c, d) * self.const(d, a, e)
                    + self.const(c, a, d) * self.const(d, b, e) for d in r)
            if s:
                bad.append((a, b, c, e, s))
        return bad

    def validate(self) -> "LieAlgebraSpec":
        bad = self.jacobi_defects()
        if bad:
            a, b, c, e, s = bad[0]
            raise ValueError(f"Jacobi identity fails at (a,b,c,e)=({a},{b},{c},{e}): {s}")
        return self

    def metric_defects(self) -> list[tuple]:
        """Index triples where the delta metric fails to be ad-invariant: f^c_ab + f^b_ac."""
        r = range(1, self.dim + 1)
        return [(a, b, c, self.const(a, b, c) + self.const(a, c, b))
                for a, b, c in product(r, r, r) if self.const(a, b, c) + self.const(a, c, b)]

    def traces(self) -> dict[int, Fraction]:
        """tr ad_c = f^d_{dc} for each c."""
        r = range(1, self.dim + 1)
        return {c: sum((self.const(d, c, d) for d in r), Fraction(0)) for c in r}


def abelian(dim: int) -> LieAlgebraSpec:
    return LieAlgebraSpec(dim, {}, name=f"abelian({dim})")


def su2() -> LieAlgebraSpec:
    f = {}
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        f[(a, b, c)] = 1
    return LieAlgebraSpec(3, f, name="su2").validate()


def solvable2() -> LieAlgebraSpec:
    """Two-dimensional non-abelian algebra [e1, e2] = e2; not traceless."""
    return LieAlgebraSpec(2, {(1, 2, 2): 1}, name="solvable2").validate()


PRESETS = {"su2": su2, "solvable2": solvable2}


def parse_algebra(text: str, name: str = "file") -> LieAlgebraSpec:
    """Read ``dim N`` followed by lines ``f a b c value`` meaning f^c_{ab}."""
    dim = None
    f = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "dim" and len(parts) == 2:
                dim = int(parts[1])
            elif parts[0] == "f" and len(parts) == 5:
                a, b, c = (int(x) for x in parts[1:4])
                f[(a, b, c)] = Fraction(parts[4])
            else:
                raise ValueError("expected 'dim N' or 'f a b c value'")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if dim is None or dim < 1:
        raise ValueError("missing 'dim N' line")
    return LieAlgebraSpec(dim, f, name=name).validate()


def load_algebra(spec: str) -> LieAlgebraSpec:
    if spec in PRESETS:
        return PRESETS[spec]()
    if spec.startswith("abelian"):
        tail = spec[len("abelian"):].strip("():")
        return abelian(int(tail) if tail else 1)
    path = Path(spec)
    if not path.exists():
        raise ValueError(f"unknown algebra {spec!r}: not a preset and no such file")
    return parse_algebra(path.read_text(), name=path.name)


class YangMillsModel:
    """Gauge field A^a_i, ghost gamma^a and their antifields on an n-dimensional base."""

    __slots__ = ("algebra", "n", "fc")

    def __init__(self, algebra: LieAlgebraSpec, n: int):
        if not 1 <= n <= 9 or algebra.dim > 9:
            raise ValueError("base dimension and algebra dimension must be at most 9")
        self.algebra = algebra
        self.n = n
        rows = []
        for a in range(1, algebra.dim + 1):
            for i in range(1, n + 1):
                rows.append((f"A{a}{i}", 0, f"As{a}{i}", 0))
        for a in range(1, algebra.dim + 1):
            rows.append((f"c{a}", 1, f"cs{a}", 1))
        self.fc = FieldContent.from_pairs(n, rows)

    def gauge(self, a: int, i: int) -> Expr:
        return self.fc.var(f"A{a}{i}")

    def gauge_star(self, a: int, i: int) -> Expr:
        return self.fc.var(f"As{a}{i}")

    def ghost(self, a: int) -> Expr:
        return self.fc.var(f"c{a}")

    def ghost_star(self, a: int) -> Expr:
        return self.fc.var(f"cs{a}")


def build_field_strength(m: YangMillsModel, a: int, i: int, j: int) -> Expr:
    f = m.algebra
    out = total_derivative(m.gauge(a, j), i) - total_derivative(m.gauge(a, i), j)
    r = range(1, f.dim + 1)
    for b, c in product(r, r):
        k = f.const(b, c, a)
        if k:
            out = out + (m.gauge(b, i) * m.gauge(c, j)).scale(k)
    return out


def action_density(m: YangMillsModel) -> Expr:
    f = m.algebra
    r = range(1, f.dim + 1)
    dirs = range(1, m.n + 1)
    dens = Expr()
    for a in r:
        for i, j in product(dirs, dirs):
            if i != j:
                fs = build_field_strength(m, a, i, j)
                dens = dens + (fs * fs).scale(Fraction(1, 4))
    for a, i in product(r, dirs):
        cov = total_derivative(m.ghost(a), i)
        for b, c in product(r, r):
            k = f.const(b, c, a)
            if k:
                cov = cov + (m.gauge(b, i) * m.ghost(c)).scale(k)
        dens = dens + m.gauge_star(a, i) * cov
    # ghost self-coupling; its sign is the one for which [[S, S]] vanishes
    # with the bracket orientation used throughout
    for a, b, c in product(r, r, r):
        k = f.const(a, b, c)
        if k:
            dens = dens + (m.ghost(a) * m.ghost(b) * m.ghost_star(c)).scale(k / 2)
    return dens


def build_bv_action(m: YangMillsModel) -> LocalFunctional:
    return integral(m.fc, action_density(m))


def laplacian_sectors(m: YangMillsModel) -> dict[str, Expr]:
    """Per-sector jet Laplacian densities of the action: gauge pairs and ghost pairs."""
    from .functionals import _block_laplacian

    dens = action_density(m)
    sectors = {}
    for label, keep in (("gauge", "A"), ("ghost", "c")):
        sectors[label] = _block_laplacian(_Restricted(m.fc, keep), dens, "variational")
    return sectors


class _Restricted:
    """Field content view exposing only the pairs whose field name starts with a prefix."""

    def __init__(self, fc: FieldContent, prefix: str):
        self.pairs = [(q, qd) for q, qd in fc.pairs if q.name.startswith(prefix)]


def verify_laplacian_zero(m: YangMillsModel) -> dict:
    S = build_bv_action(m)
    sectors = laplacian_sectors(m)
    jet = laplacian_jet(S)
    functional = restrict_to_diagonal(functional_laplacian(lift(S)))
    traces = m.algebra.traces()
    jet_ok, functional_ok = is_trivial(jet), is_trivial(functional)
    return {
        "traces": {f"f^d_d{c}": str(v) for c, v in traces.items()},
        "gauge_sector": sectors["gauge"].text(),
        "ghost_sector": sectors["ghost"].text(),
        "jet": jet_ok,
        "functional": functional_ok,
        "passed": jet_ok and functional_ok,
    }


def verify_classical_master(m: YangMillsModel) -> dict:
    S = build_bv_action(m)
    return {"passed": is_trivial(schouten_jet(S, S)), "metric_defects": len(m.algebra.metric_defects())}
