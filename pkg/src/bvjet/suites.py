"""Verification suites shared by the command line and the test-suite.

Each suite is an ordered list of named checks.  A check returns
``(ok, detail)``; the runner turns that into a verdict and records timing.
"""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .exprcore import LEFT, RIGHT, Expr, FieldContent, cos, euler_derivative, total_derivative_multi
from .functionals import (
    LocalFunctional,
    functional_equal,
    integral,
    is_trivial,
    laplacian_jet,
    multiply,
    schouten_jet,
)
from .funcalc import (
    ExtendedFunctional,
    diagonal_equal,
    functional_derivative,
    functional_laplacian,
    functional_schouten,
    lift,
    restrict_to_diagonal,
    term_text,
)
from .randgen import (
    DEFAULT_FIELDS,
    TWO_FIELDS,
    random_active_block,
    random_block,
)

RTOL = 1e-6


@dataclass
class Check:
    name: str
    anchor: str
    verdict: str
    detail: str = ""
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class Context:
    fc: FieldContent | None = DEFAULT_FIELDS
    seed: int = 0
    cases: int = 100
    derivation_cases: int = 50
    grassmann_cases: int = 20
    yang_mills_dims: tuple = (2, 4)
    algebra: str = "su2"
    extra: dict = field(default_factory=dict)

    def rng(self, tag: str) -> random.Random:
        return random.Random(f"{self.seed}:{tag}")

    def np_rng(self, tag: str) -> np.random.Generator:
        return np.random.default_rng(self.rng(tag).getrandbits(64))


def _sign(p: int) -> int:
    return -1 if p % 2 else 1


def _parity(F) -> int:
    p = F.parity()
    return 0 if p is None else p


def _run_cases(n: int, body: Callable[[int], tuple[bool, bool]]) -> tuple[bool, str]:
    passed = nontrivial = 0
    first_fail = None
    for k in range(n):
        ok, nz = body(k)
        passed += ok
        nontrivial += nz
        if not ok and first_fail is None:
            first_fail = k
    detail = f"{passed}/{n} cases, {nontrivial} with a nonzero side"
    if first_fail is not None:
        detail += f"; first failure at case {first_fail}"
    return passed == n, detail


# numeric oracle helpers -----------------------------------------------

def _numeric_close(section, lhs: LocalFunctional, rhs: LocalFunctional, ref: LocalFunctional | None = None) -> bool:
    """Compare values relative to the largest single-term magnitude involved."""
    a, b = section.evaluate(lhs), section.evaluate(rhs)
    scale = max(_magnitude(section, lhs), _magnitude(section, rhs), 1e-12)
    if ref is not None:
        scale = max(scale, _magnitude(section, ref))
    return bool(np.all(np.abs(a.coeffs - b.coeffs) <= RTOL * scale))


def _magnitude(section, F: LocalFunctional) -> float:
    """Largest term size, measured by integrals of absolute densities."""
    best = 0.0
    for key, coef in F.terms.items():
        size = float(abs(coef))
        for block in key:
            vals = np.abs(section.density_values(block).coeffs)
            size *= 2 * np.pi * float(np.max(vals.mean(axis=-1) if vals.ndim == 2 else vals))
        best = max(best, size)
    return best


def _grassmann(ctx: Context, tag: str, body) -> tuple[bool, str]:
    """Run ``body(rng, section)`` on random polynomial cases over the circle."""
    from .oracle import PeriodicSection

    if ctx.fc.dim != 1:
        return None, "numeric oracle needs a one-dimensional base"
    rng = ctx.rng(tag)
    nrng = ctx.np_rng(tag)

    def one(k):
        section = PeriodicSection(ctx.fc, nrng)
        return body(rng, section)

    return _run_cases(ctx.grassmann_cases, one)


def _poly_functional(rng, fc, parity=None, max_blocks=2):
    """Polynomial counterpart of the active functionals, for the numeric oracle."""
    if rng.randint(1, max_blocks) == 1:
        return random_active_block(rng, fc, parity, 2, functions=False)
    p1 = rng.randint(0, 1)
    p2 = None if parity is None else (parity - p1) % 2
    return (random_active_block(rng, fc, p1, 2, 1, functions=False)
            * random_active_block(rng, fc, p2, 2, 1, functions=False))


def _poly_block(rng, fc, parity=None):
    return _poly_functional(rng, fc, parity, 1)


# bracket ---------------------------------------------------------------

def _skew_sides(F, G):
    pF, pG = _parity(F), _parity(G)
    return schouten_jet(F, G), schouten_jet(G, F).scale(-_sign((pF - 1) * (pG - 1)))


def _jacobi_sides(F, G, H):
    pF, pG = _parity(F), _parity(G)
    lhs = schouten_jet(F, schouten_jet(G, H))
    rhs = schouten_jet(schouten_jet(F, G), H) + schouten_jet(G, schouten_jet(F, H)).scale(_sign((pF - 1) * (pG - 1)))
    return lhs, rhs


def _leibniz_second_sides(F, G, H):
    """Left side through couplings of the product, right side from block brackets."""
    pF, pG = _parity(F), _parity(G)
    lhs = restrict_to_diagonal(functional_schouten(lift(F), lift(multiply(G, H))))
    rhs = multiply(schouten_jet(F, G), H) + multiply(G, schouten_jet(F, H)).scale(_sign((pF - 1) * pG))
    return lhs, rhs


def _leibniz_first_sides(F, G, H):
    pG, pH = _parity(G), _parity(H)
    lhs = restrict_to_diagonal(functional_schouten(lift(multiply(F, G)), lift(H)))
    rhs = multiply(F, schouten_jet(G, H)) + multiply(schouten_jet(F, H), G).scale(_sign(pG * (pH - 1)))
    return lhs, rhs


def _active_functional(rng, fc, parity=None, size=2):
    """One or two blocks, each with a nonvanishing extended Laplacian or self-bracket."""
    if rng.random() < 0.5:
        return random_active_block(rng, fc, parity, size)
    p1 = rng.randint(0, 1)
    p2 = None if parity is None else (parity - p1) % 2
    return random_active_block(rng, fc, p1, size, 1) * random_active_block(rng, fc, p2, size, 1)


def _active_block(rng, fc, parity=None, size=2):
    return random_active_block(rng, fc, parity, size)


def _laplacian_active_block(rng, fc, tries: int = 50):
    """A block with a nontrivial jet Laplacian when one turns up within ``tries`` draws."""
    for _ in range(tries):
        H = random_active_block(rng, fc, size=3)
        if not is_trivial(laplacian_jet(H)):
            return H
    return H


def _homogeneous(rng, fc, n, maker=_active_functional):
    return [(maker(rng, fc, p), p) for p in (rng.randint(0, 1) for _ in range(n))]


def check_skew(ctx: Context):
    rng = ctx.rng("skew")

    def body(k):
        (F, _), (G, _) = _homogeneous(rng, ctx.fc, 2)
        lhs, rhs = _skew_sides(F, G)
        return functional_equal(lhs, rhs), not is_trivial(lhs)

    return _run_cases(ctx.cases, body)


def check_jacobi(ctx: Context):
    rng = ctx.rng("jacobi")

    def body(k):
        (F, _), (G, _), (H, _) = _homogeneous(rng, ctx.fc, 3, _active_functional)
        lhs, rhs = _jacobi_sides(F, G, H)
        return functional_equal(lhs, rhs), not is_trivial(lhs)

    return _run_cases(ctx.cases, body)


def check_leibniz_bracket(ctx: Context):
    rng = ctx.rng("leibniz-bracket")

    def body(k):
        (F, _), (G, _), (H, _) = _homogeneous(rng, ctx.fc, 3, _active_block)
        l2, r2 = _leibniz_second_sides(F, G, H)
        l1, r1 = _leibniz_first_sides(F, G, H)
        return functional_equal(l2, r2) and functional_equal(l1, r1), not (is_trivial(l2) and is_trivial(l1))

    return _run_cases(ctx.cases, body)


def _numeric_case(section, lhs, rhs, ref=None) -> tuple[bool, bool]:
    active = ref if ref is not None else lhs
    return _numeric_close(section, lhs, rhs, ref), not (lhs.is_zero() and rhs.is_zero() and active.is_zero())


def numeric_skew(ctx):
    def body(rng, s):
        F, G = (F for F, _ in _homogeneous(rng, ctx.fc, 2, _poly_functional))
        return _numeric_case(s, *_skew_sides(F, G))

    return _grassmann(ctx, "num-skew", body)


def numeric_jacobi(ctx):
    def body(rng, s):
        F, G, H = (F for F, _ in _homogeneous(rng, ctx.fc, 3, _poly_block))
        return _numeric_case(s, *_jacobi_sides(F, G, H))

    return _grassmann(ctx, "num-jacobi", body)


def numeric_leibniz_bracket(ctx):
    def body(rng, s):
        F, G, H = (F for F, _ in _homogeneous(rng, ctx.fc, 3, _poly_block))
        ok2, nz2 = _numeric_case(s, *_leibniz_second_sides(F, G, H))
        ok1, nz1 = _numeric_case(s, *_leibniz_first_sides(F, G, H))
        return ok1 and ok2, nz1 or nz2

    return _grassmann(ctx, "num-leibniz-bracket", body)


# Laplacians --------------------------------------------------------------

def _product_rule_sides(A, R):
    """Left side: couplings of the lifted product; right side: the jet rule."""
    pA = _parity(A)
    lhs = restrict_to_diagonal(functional_laplacian(lift(multiply(A, R))))
    rhs = (multiply(laplacian_jet(A), R) + schouten_jet(A, R).scale(_sign(pA))
           + multiply(A, laplacian_jet(R)).scale(_sign(pA)))
    return lhs, rhs


def _derivation_sides(F, G):
    pF = _parity(F)
    EF, EG = lift(F), lift(G)
    lhs = functional_laplacian(functional_schouten(EF, EG))
    rhs = (functional_schouten(functional_laplacian(EF), EG)
           + functional_schouten(EF, functional_laplacian(EG)).scale(_sign(pF - 1)))
    return lhs, rhs


def check_square_jet(ctx):
    rng = ctx.rng("square-jet")

    def body(k):
        H = _laplacian_active_block(rng, ctx.fc)
        once = laplacian_jet(H)
        return is_trivial(laplacian_jet(once)), not once.is_zero()

    return _run_cases(ctx.cases, body)


def check_product_rule(ctx):
    rng = ctx.rng("product-rule")

    def body(k):
        (A, _), (R, _) = _homogeneous(rng, ctx.fc, 2, _active_block)
        lhs, rhs = _product_rule_sides(A, R)
        return functional_equal(lhs, rhs), not is_trivial(lhs)

    return _run_cases(ctx.cases, body)


def check_square_functional(ctx):
    rng = ctx.rng("square-functional")

    def body(k):
        F = lift(_active_functional(rng, ctx.fc))
        once = functional_laplacian(F)
        twice = functional_laplacian(once)
        return twice.is_zero() and is_trivial(restrict_to_diagonal(twice)), not once.is_zero()

    return _run_cases(ctx.cases, body)


def _commutativity_sides(rng, fc, F):
    a, b = rng.choice(fc.coordinates), rng.choice(fc.coordinates)
    sa, sb = rng.choice((LEFT, RIGHT)), rng.choice((LEFT, RIGHT))
    E = lift(F)
    one = functional_derivative(functional_derivative(E, a, "y1", sa), b, "y2", sb)
    two = functional_derivative(functional_derivative(E, b, "y2", sb), a, "y1", sa)
    # a right derivative taken second passes the slot of the first one
    if sa != sb:
        fix = _sign(a.parity * b.parity)
        two = two.scale(fix)
    return one, two


def check_commutativity(ctx):
    rng = ctx.rng("commutativity")

    def body(k):
        F = _active_functional(rng, ctx.fc)
        one, two = _commutativity_sides(rng, ctx.fc, F)
        return one == two, not one.is_zero()

    return _run_cases(ctx.cases, body)


def check_derivation(ctx):
    rng = ctx.rng("derivation")

    def body(k):
        (F, _), (G, _) = _homogeneous(rng, ctx.fc, 2)
        lhs, rhs = _derivation_sides(F, G)
        ok = lhs == rhs and diagonal_equal(lhs, rhs)
        return ok, not lhs.is_zero()

    return _run_cases(ctx.derivation_cases, body)


def check_consistency(ctx):
    rng = ctx.rng("consistency")

    def body(k):
        H = _laplacian_active_block(rng, ctx.fc)
        jet = laplacian_jet(H)
        return functional_equal(restrict_to_diagonal(functional_laplacian(lift(H))), jet), not is_trivial(jet)

    return _run_cases(ctx.derivation_cases, body)


def numeric_square_jet(ctx):
    def body(rng, s):
        once = laplacian_jet(_poly_block(rng, ctx.fc))
        return _numeric_case(s, laplacian_jet(once), LocalFunctional.zero(ctx.fc), once)

    return _grassmann(ctx, "num-square-jet", body)


def numeric_product_rule(ctx):
    def body(rng, s):
        A, R = (F for F, _ in _homogeneous(rng, ctx.fc, 2, _poly_block))
        return _numeric_case(s, *_product_rule_sides(A, R))

    return _grassmann(ctx, "num-product-rule", body)


def numeric_square_functional(ctx):
    def body(rng, s):
        once = functional_laplacian(lift(_poly_functional(rng, ctx.fc)))
        twice = restrict_to_diagonal(functional_laplacian(once))
        return _numeric_case(s, twice, LocalFunctional.zero(ctx.fc), restrict_to_diagonal(once))

    return _grassmann(ctx, "num-square-functional", body)


def numeric_derivation(ctx):
    def body(rng, s):
        F, G = (F for F, _ in _homogeneous(rng, ctx.fc, 2, _poly_functional))
        lhs, rhs = _derivation_sides(F, G)
        return _numeric_case(s, restrict_to_diagonal(lhs), restrict_to_diagonal(rhs))

    return _grassmann(ctx, "num-derivation", body)


def numeric_consistency(ctx):
    def body(rng, s):
        H = _poly_block(rng, ctx.fc)
        return _numeric_case(s, restrict_to_diagonal(functional_laplacian(lift(H))), laplacian_jet(H))

    return _grassmann(ctx, "num-consistency", body)


def numeric_commutativity(ctx):
    from .oracle import evaluate_extended, shift_function

    nrng = ctx.np_rng("num-commutativity-shifts")

    def body(rng, s):
        F = _poly_functional(rng, ctx.fc)
        one, two = _commutativity_sides(rng, ctx.fc, F)
        shifts = {"y1": shift_function(nrng, s), "y2": shift_function(nrng, s)}
        v1, v2 = evaluate_extended(s, one, shifts), evaluate_extended(s, two, shifts)
        keys = set(v1) | set(v2)
        for key in keys:
            a = v1.get(key)
            b = v2.get(key)
            if a is None or b is None:
                return False, True
            scale = max(np.max(np.abs(a.coeffs)), np.max(np.abs(b.coeffs)), 1e-12)
            if np.any(np.abs(a.coeffs - b.coeffs) > RTOL * scale):
                return False, True
        return True, not one.is_zero()

    return _grassmann(ctx, "num-commutativity", body)


# fixed examples ----------------------------------------------------------

def counterexample_pair():
    fc = DEFAULT_FIELDS
    v = fc.var
    F = integral(fc, v("p") * v("q") * v("q", (1, 1)))
    G = integral(fc, v("p", (1, 1)) * cos(v("q")))
    return fc, F, G


def counterexample_report() -> dict:
    fc, F, G = counterexample_pair()
    v = fc.var
    q, p = fc["q"], fc["p"]
    f = F.single_density()
    g = G.single_density()
    derivs = {
        "right d f / d q": euler_derivative(f, q, RIGHT),
        "right d f / d p": euler_derivative(f, p, RIGHT),
        "left d g / d q": euler_derivative(g, q, LEFT),
        "left d g / d p": euler_derivative(g, p, LEFT),
    }
    expected = {
        "right d f / d q": v("p") * v("q", (1, 1)).scale(2) + v("p", (1, 1)) * v("q") + (v("p", (1,)) * v("q", (1,))).scale(2),
        "right d f / d p": v("q") * v("q", (1, 1)),
        "left d g / d q": -(v("p", (1, 1)) * Expr.of_func("sin", v("q"))),
        "left d g / d p": -(v("q", (1, 1)) * Expr.of_func("sin", v("q"))) - v("q", (1,)) ** 2 * cos(v("q")),
    }
    lapF = laplacian_jet(F)
    lapG = laplacian_jet(G)
    lb = laplacian_jet(schouten_jet(F, G))
    reference = integral(fc, (v("q", (1, 1)) ** 2 * cos(v("q"))
                              - v("q", (1, 1)) * v("q", (1,)) ** 2 * Expr.of_func("sin", v("q"))).scale(-2))
    rhs = schouten_jet(lapF, G) + schouten_jet(F, lapG).scale(_sign(_parity(F) - 1))
    return {
        "derivatives": {k: (d.text(), d == expected[k]) for k, d in derivs.items()},
        "laplacian_F": (lapF.text(), is_trivial(lapF)),
        "laplacian_F_partial": laplacian_jet(F, form="partial").text(),
        "laplacian_G": (lapG.text(), lapG.is_zero()),
        "laplacian_bracket": (lb.text(), functional_equal(lb, reference)),
        "reference": reference.text(),
        "laplacian_bracket_nontrivial": not is_trivial(lb),
        "derivation_violated": not functional_equal(lb, rhs),
    }


def check_counterexample_derivatives(ctx):
    r = counterexample_report()["derivatives"]
    return all(ok for _, ok in r.values()), "; ".join(f"{k} = {t}" for k, (t, _) in r.items())


def check_counterexample_laplacians(ctx):
    r = counterexample_report()
    ok = r["laplacian_F"][1] and r["laplacian_G"][1]
    return ok, f"Delta F = {r['laplacian_F'][0]} (pointwise form {r['laplacian_F_partial']}); Delta G = {r['laplacian_G'][0]}"


def check_counterexample_bracket(ctx):
    r = counterexample_report()
    ok = r["laplacian_bracket"][1] and r["laplacian_bracket_nontrivial"]
    return ok, f"Delta [[F,G]] = {r['laplacian_bracket'][0]}, equal to {r['reference']} modulo divergences"


def check_counterexample_violation(ctx):
    r = counterexample_report()
    return r["derivation_violated"], "derivation identity VIOLATED in jet mode" if r["derivation_violated"] else "identity unexpectedly holds"


def excounter2_report() -> dict:
    fc, F, G = counterexample_pair()
    v = fc.var
    EF, EG = lift(F), lift(G)
    B = functional_schouten(EF, EG)
    log: list = []
    LB = functional_laplacian(B, log)
    LF, LG = functional_laplacian(EF), functional_laplacian(EG)
    left = functional_schouten(LF, EG)
    right = functional_schouten(EF, LG)
    target = integral(fc, v("q") * v("q", (1, 1)) * total_derivative_multi(cos(v("q")), (1, 1)))
    diag = restrict_to_diagonal(LB)
    return {
        "Delta F": LF.text(),
        "Delta G": LG.text(),
        "Delta F diagonal trivial": is_trivial(restrict_to_diagonal(LF)),
        "Delta G diagonal trivial": is_trivial(restrict_to_diagonal(LG)),
        "Delta G nonzero": not LG.is_zero(),
        "Delta [[F,G]]": LB.text(),
        "[[Delta F, G]]": left.text(),
        "[[F, Delta G]]": right.text(),
        "cancelled": [(term_text(fc, key), n) for key, n in log],
        "derivation exact": LB == left + right,
        "[[Delta F, G]] trivial": is_trivial(restrict_to_diagonal(left)),
        "diagonal": diag.text(),
        "diagonal matches": functional_equal(diag, target),
        "diagonal sides match": functional_equal(diag, restrict_to_diagonal(left + right)),
    }


def check_excounter2_laplacians(ctx):
    r = excounter2_report()
    ok = r["Delta F diagonal trivial"] and r["Delta G diagonal trivial"] and r["Delta G nonzero"]
    return ok, f"Delta F = {r['Delta F']}; Delta G = {r['Delta G']}"


def check_excounter2_cancellation(ctx):
    r = excounter2_report()
    ok = len(r["cancelled"]) >= 1 and r["derivation exact"]
    return ok, f"{len(r['cancelled'])} cancelled term classes; Delta [[F,G]] = {r['Delta [[F,G]]']}"


def check_excounter2_sides(ctx):
    r = excounter2_report()
    ok = r["[[Delta F, G]] trivial"] and r["diagonal matches"] and r["diagonal sides match"]
    return ok, f"diagonal = {r['diagonal']}; [[Delta F, G]] = {r['[[Delta F, G]]']}"


# Yang-Mills ---------------------------------------------------------------

def _ym_model(ctx, n):
    from .gauge import YangMillsModel, load_algebra

    key = ("ym", ctx.algebra, n)
    if key not in ctx.extra:
        ctx.extra[key] = YangMillsModel(load_algebra(ctx.algebra), n)
    return ctx.extra[key]


def _ym_laplacian(n):
    def check(ctx):
        from .gauge import verify_laplacian_zero

        lap = verify_laplacian_zero(_ym_model(ctx, n))
        detail = (f"traces {lap['traces']}; gauge sector {lap['gauge_sector']}; "
                  f"ghost sector {lap['ghost_sector']}; jet {lap['jet']}; functional {lap['functional']}")
        return lap["passed"], detail
    return check


def _ym_master(n):
    def check(ctx):
        from .gauge import verify_classical_master

        cme = verify_classical_master(_ym_model(ctx, n))
        if cme["passed"]:
            return True, "[[S,S]] vanishes modulo divergences"
        return False, f"[[S,S]] is not trivial; delta metric fails ad-invariance at {cme['metric_defects']} index triples"
    return check


# quantum layer --------------------------------------------------------------

def check_power_lemmas(ctx):
    from .qme import power_lemmas

    rng = ctx.rng("power-lemmas")
    results = []
    for n in range(1, 6):
        F = random_active_block(rng, ctx.fc, 0, size=3)
        G = random_active_block(rng, ctx.fc, size=2)
        r = power_lemmas(G, F, n)
        results.append((n, all(r.values())))
    return all(ok for _, ok in results), ", ".join(f"n={n}: {'ok' if ok else 'FAIL'}" for n, ok in results)


def check_exp_identity(ctx):
    from .qme import exp_identity_residual

    rng = ctx.rng("exp-identity")

    def body(k):
        F0 = random_active_block(rng, ctx.fc, 0, size=3)
        r = exp_identity_residual(lift(F0).times_constant(h=1), 3)
        return r.is_zero() and all(r.diagonal_zero().values()), True

    return _run_cases(min(ctx.cases, 10), body)


def check_qme_ym(ctx):
    from .gauge import YangMillsModel, build_bv_action, load_algebra
    from .qme import check_qme

    S = build_bv_action(YangMillsModel(load_algebra(ctx.algebra), 2))
    r = check_qme(S)
    return r["passed"], f"per-order verdicts {r['orders']}"


def qme_reference_action() -> LocalFunctional:
    """A gauge-fixed-free abelian action whose residual vanishes identically."""
    fc = TWO_FIELDS
    return integral(fc, fc.var("p") * fc.var("c", (1,)))


def check_omega_squared(ctx):
    from .qme import omega, omega_squared, qme_residual

    S = qme_reference_action()
    fc = S.fc
    rng = ctx.rng("omega")
    if not qme_residual(S).is_zero():
        return False, "reference action does not satisfy the quantum master equation"

    def body(k):
        O = random_active_block(rng, fc, size=3)
        w2 = omega_squared(S, O)
        return w2.is_zero() and all(w2.diagonal_zero().values()), not omega(S, O).is_zero()

    return _run_cases(20, body)


def check_omega_unit(ctx):
    from .qme import omega

    S = qme_reference_action()
    return omega(S, ExtendedFunctional.unit(S.fc)).is_zero(), "Omega(1) = 0"


def check_laplace_closed(ctx):
    rng = ctx.rng("laplace-closed")

    def draw():
        for _ in range(200):
            F = lift(random_block(rng, ctx.fc, size=2))
            if functional_laplacian(F).is_zero():
                return F
        raise RuntimeError("no Laplace-closed sample found")

    def body(k):
        F, G = draw(), draw()
        B = functional_schouten(F, G)
        return functional_laplacian(B).is_zero(), not B.is_zero()

    return _run_cases(min(ctx.cases, 20), body)


# registry -----------------------------------------------------------------

def _yang_mills_checks():
    out = []
    for n in (2, 4):
        out.append((f"yangmills.laplacian.n{n}", "Delta S = 0 through vanishing traces f^d_dc", _ym_laplacian(n)))
        out.append((f"yangmills.master.n{n}", "[[S,S]] = 0", _ym_master(n)))
    return out


SUITES: dict[str, list] = {
    "schouten": [
        ("schouten.skew", "[[F,G]] = -(-1)^((pF-1)(pG-1)) [[G,F]]", check_skew),
        ("schouten.jacobi", "[[F,[[G,H]]]] = [[[[F,G]],H]] + (-1)^((pF-1)(pG-1)) [[G,[[F,H]]]]", check_jacobi),
        ("schouten.leibniz", "[[F,GH]] = [[F,G]]H + (-1)^((pF-1)pG) G[[F,H]], and the rule in the first slot", check_leibniz_bracket),
        ("schouten.skew.numeric", "skew-symmetry on periodic sections", numeric_skew),
        ("schouten.jacobi.numeric", "Jacobi identity on periodic sections", numeric_jacobi),
        ("schouten.leibniz.numeric", "Leibniz rules on periodic sections", numeric_leibniz_bracket),
    ],
    "laplacian": [
        ("laplacian.square.jet", "Delta(Delta H) = 0 on blocks", check_square_jet),
        ("laplacian.product_rule", "Delta(AR) = Delta A R + (-1)^pA [[A,R]] + (-1)^pA A Delta R", check_product_rule),
        ("laplacian.square.functional", "Delta(Delta F) = 0 on extended functionals", check_square_functional),
        ("laplacian.commutativity", "functional derivatives commute up to the Koszul sign", check_commutativity),
        ("laplacian.derivation", "Delta[[F,G]] = [[Delta F,G]] + (-1)^(pF-1) [[F,Delta G]]", check_derivation),
        ("laplacian.consistency", "diagonal of functional Delta = jet Delta on blocks", check_consistency),
        ("laplacian.square.jet.numeric", "jet Delta squared on periodic sections", numeric_square_jet),
        ("laplacian.product_rule.numeric", "product rule on periodic sections", numeric_product_rule),
        ("laplacian.square.functional.numeric", "functional Delta squared on periodic sections", numeric_square_functional),
        ("laplacian.commutativity.numeric", "second functional derivatives paired with test shifts", numeric_commutativity),
        ("laplacian.derivation.numeric", "derivation property on periodic sections", numeric_derivation),
        ("laplacian.consistency.numeric", "consistency on periodic sections", numeric_consistency),
    ],
    "counterexample": [
        ("counterexample.derivatives", "four variational derivatives of f and g", check_counterexample_derivatives),
        ("counterexample.laplacians", "Delta F = int q_xx = 0 mod divergences, Delta G = 0", check_counterexample_laplacians),
        ("counterexample.bracket", "Delta[[F,G]] = -2 int(q_xx^2 cos q - q_xx q_x^2 sin q)", check_counterexample_bracket),
        ("counterexample.violation", "jet Delta is not a derivation of [[,]]", check_counterexample_violation),
    ],
    "excounter2": [
        ("excounter2.laplacians", "functional Delta F and Delta G restrict to trivial densities", check_excounter2_laplacians),
        ("excounter2.cancellation", "paired terms of Delta[[F,G]] cancel in canonical form", check_excounter2_cancellation),
        ("excounter2.sides", "Delta[[F,G]] = [[Delta F,G]] + [[F,Delta G]] with [[Delta F,G]] = 0", check_excounter2_sides),
    ],
    "yangmills": _yang_mills_checks(),
    "qme": [
        ("qme.power_lemmas", "[[G,F^n]] = n[[G,F]]F^(n-1) and Delta(F^n) for n <= 5", check_power_lemmas),
        ("qme.exp_identity", "Delta(exp F) = (Delta F + 1/2[[F,F]]) exp F through hbar^3", check_exp_identity),
        ("qme.yang_mills", "1/2[[S,S]] - i hbar Delta S = 0 for Yang-Mills", check_qme_ym),
        ("qme.omega_unit", "Omega(1) = 0", check_omega_unit),
        ("qme.omega_squared", "Omega(Omega(O)) = 0 for a solution of the master equation", check_omega_squared),
        ("qme.laplace_closed", "Delta F = Delta G = 0 implies Delta[[F,G]] = 0", check_laplace_closed),
    ],
}

SUITE_NAMES = list(SUITES) + ["all"]


def run_suite(name: str, ctx: Context, skip: bool = False) -> list[Check]:
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise KeyError(name)
    out = []
    for suite in names:
        for check_name, anchor, fn in SUITES[suite]:
            if skip:
                out.append(Check(check_name, anchor, "skipped", "no field content declared"))
                continue
            t = time.perf_counter()
            ok, detail = fn(ctx)
            ms = (time.perf_counter() - t) * 1000
            verdict = "skipped" if ok is None else ("pass" if ok else "fail")
            out.append(Check(check_name, anchor, verdict, detail.replace("\n", "; "), round(ms, 1)))
    return out
