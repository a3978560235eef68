from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from edsym.symexpr import (
    I,
    AssumptionLedger,
    ConjugationPairing,
    DegenerateSubstitution,
    Expr,
    Fn,
    GaussianRational,
    NonPolynomial,
    Var,
    canonicalize,
    collect,
    conjugate,
    const,
    diff,
    fn,
    is_zero,
    substitute,
    var,
)

x, t, u, w, r = (var(n) for n in "xtuwr")
HEAT = ("x", "t", "u", "w")


def test_polynomial_derivative():
    assert diff(u**2 + x, "x") == const(1)


def test_function_dependency_rule():
    f = fn("f", ("u",))
    assert diff(f, "u").to_text() == "f_,u"
    assert diff(f, "x").is_zero()


def test_generator_partial_atom():
    assert diff(fn("v^t", HEAT), "w").to_text() == "v^t_,w"


def test_partials_commute():
    v = fn("v^x", HEAT)
    assert diff(diff(v, "x"), "u") == diff(diff(v, "u"), "x")
    assert diff(v, "x", 2).to_text() == "v^x_,xx"


def test_quotient_and_chain_rules():
    e = u / (x + 1)
    assert diff(e, "x") == -u / (x + 1) ** 2
    assert diff((x**2 + u) ** 3, "u") == 3 * (x**2 + u) ** 2


def test_substitute_examples():
    vx = fn("v^x", HEAT)
    Fw = diff(fn("F", HEAT), "w")
    assert substitute(w * vx, {vx.atoms().__iter__().__next__(): Fw}) == w * Fw
    ux = fn("u_,x", ("x", "t"))
    assert substitute(ux - w, {Var("w"): ux}).is_zero()
    assert substitute(4 * u / r, {Var("r"): const(2)}) == 2 * u


def test_substitution_is_simultaneous():
    assert substitute(x + 2 * t, {Var("x"): t, Var("t"): x}) == t + 2 * x


def test_degenerate_substitution():
    with pytest.raises(DegenerateSubstitution):
        substitute(u / (r - 1), {Var("r"): const(1)})


@pytest.mark.parametrize("e", [x * t - t * x, (w**2 - w**2) * fn("v^x", HEAT)])
def test_cancels_to_zero(e):
    assert is_zero(e)


def test_reduced_quotient():
    e = (4 * u * r) / r**2
    assert e == 4 * u / r
    assert e.to_text() == "4*u/r"


def test_gaussian_constants():
    assert (I * I) == const(-1)
    assert const(Fraction(1, 2), 3).constant_value() == GaussianRational(Fraction(1, 2), Fraction(3))
    assert (1 / (1 + I)) == const(Fraction(1, 2), Fraction(-1, 2))


def test_conjugate_examples():
    p = ConjugationPairing([("A", "A*")])
    A = var("A")
    e = I * A
    assert conjugate(e, p) == -I * var("A*")
    assert conjugate(conjugate(e, p), p) == e


def test_pairing_is_involution():
    p = ConjugationPairing([("A", "A*"), ("B", "B*")])
    for n in ("A", "A*", "B", "x"):
        assert p(p(n)) == n
    with pytest.raises(ValueError):
        ConjugationPairing([("A", "B"), ("A", "C")])


def test_collect_examples():
    vars_ = ("x", "t", "u")
    vu_u = fn("v^u", vars_, (0, 0, 1))
    vx_u = fn("v^x", vars_, (0, 0, 1))
    got = collect(-w * vu_u + w**2 * vx_u, ["w"])
    assert got == {w: -vu_u, w**2: vx_u}
    assert collect(const(5), ["w"]) == {const(1): const(5)}
    assert collect(4 * u / r, ["u"]) == {u: 4 / r}


def test_collect_rejects_dependent_functions():
    with pytest.raises(NonPolynomial):
        collect(w * fn("v^u", HEAT), ["w"])
    with pytest.raises(NonPolynomial):
        collect(u / w, ["w"])


def test_ledger_records_denominators():
    ledger = AssumptionLedger()
    ledger.note_denominators(4 * u / r + x / (r**2))
    assert ledger.nonzero == [r]
    assert ledger.lines() == ["r != 0"]


def test_rendering_is_deterministic():
    e = -I * x + w**2 * fn("v^x", HEAT) - 3
    assert e.to_text() == canonicalize(e).to_text()
    assert "+ -" not in e.to_text()


# --- properties ------------------------------------------------------------

NAMES = ["x", "t", "u", "w"]


@st.composite
def exprs(draw, depth=2):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        kind = draw(st.sampled_from(["const", "var", "fn"]))
        if kind == "const":
            return const(draw(st.integers(-4, 4)), draw(st.sampled_from([0, 0, 1, -1])))
        if kind == "var":
            return var(draw(st.sampled_from(NAMES)))
        deps = tuple(n for n in NAMES if draw(st.booleans())) or ("x",)
        return fn(draw(st.sampled_from("fg")), deps)
    a = draw(exprs(depth=depth - 1))
    b = draw(exprs(depth=depth - 1))
    op = draw(st.sampled_from(["+", "-", "*", "pow"]))
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return a ** draw(st.integers(0, 2))


def rational_exprs():
    def build(pair):
        a, b = pair
        den = b + 7
        return a if den.is_zero() else a / den

    return st.tuples(exprs(), exprs()).map(build)


PROPS = settings(max_examples=200, deadline=None)


@PROPS
@given(rational_exprs())
def test_canonicalize_idempotent(e):
    assert canonicalize(canonicalize(e)) == canonicalize(e)


@PROPS
@given(rational_exprs(), st.sampled_from(NAMES), st.sampled_from(NAMES))
def test_mixed_partials_commute(e, a, b):
    assert diff(diff(e, a), b) == diff(diff(e, b), a)


@PROPS
@given(exprs(), exprs(), st.sampled_from(NAMES))
def test_product_rule(a, b, n):
    assert diff(a * b, n) == diff(a, n) * b + a * diff(b, n)


@PROPS
@given(exprs(), exprs())
def test_conjugate_involutive_homomorphism(a, b):
    p = ConjugationPairing([("u", "w")])
    assert conjugate(conjugate(a, p), p) == a
    assert conjugate(a * b, p) == conjugate(a, p) * conjugate(b, p)
    assert conjugate(a + b, p) == conjugate(a, p) + conjugate(b, p)


@PROPS
@given(exprs())
def test_collect_reexpands(e):
    free = [n for n in ("w",) if not any(f.depends_on(n) for f in e.fns())]
    if not free:
        return
    parts = collect(e, free)
    total = sum((m * c for m, c in parts.items()), const(0))
    assert total == e
    assert all(not c.depends_on("w") for c in parts.values())
