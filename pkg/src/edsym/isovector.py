"""Isovector fields: determining equations for the symmetries of an ideal.

A generic vector field has one formal function per chart variable.  Requiring
``lie(v, g)`` to lie in the ideal for every generator ``g`` gives linear
homogeneous equations in those functions and their partials.  Two routes are
offered: eliminating generic multipliers, and rewriting with a substitution
table.  For a single contact 1-form, :func:`contact_reduce` writes every
component in terms of one function ``F = v⌟γ``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import gcd
from typing import Iterable, Mapping, Sequence

from .eds import Ideal, NoTable, SubstitutionTable, _columns, multiplier_basis, reduce_mod
from .extalg import Chart, Form, VectorField, contract, ext_d, lie
from .linalg import MONOMIAL, SYMBOLIC, EliminationStall, Row, eliminate, solve_combination
from .symexpr import (
    AssumptionLedger,
    Expr,
    Fn,
    GaussianRational,
    NonPolynomial,
    Var,
    ZERO,
    collect,
    diff,
    linear_coefficients,
    substitute,
    _display_key,
)

__all__ = [
    "GenericVector",
    "generic_vector",
    "MultiplierAnsatz",
    "multiplier_ansatz",
    "DeterminingSystem",
    "ContactReduction",
    "determine_multipliers",
    "determine_substitution",
    "contact_reduce",
    "split_and_simplify",
    "normalize_equation",
    "equivalent_systems",
    "UnknownVariable",
    "OpenIdeal",
    "NoUnitContactCoefficient",
    "NotLinearHomogeneous",
    "EliminationStall",
]


class UnknownVariable(KeyError):
    pass


class OpenIdeal(ValueError):
    pass


class NoUnitContactCoefficient(ValueError):
    pass


class NotLinearHomogeneous(AssertionError):
    pass


# --------------------------------------------------------------------------
# generic vector
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GenericVector:
    """One formal component per chart variable, ``v^x(deps)``."""

    chart: Chart
    components: Mapping[str, Fn]
    assumptions: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def field(self) -> VectorField:
        return VectorField(self.chart, {n: Expr.atom(f) for n, f in self.components.items()})

    @property
    def function_names(self) -> set[str]:
        return {f.name for f in self.components.values()}

    def component(self, name: str) -> Fn:
        return self.components[name]


def generic_vector(chart: Chart, assumptions: Mapping[str, Sequence[str]] | None = None,
                   prefix: str = "v^") -> GenericVector:
    """Build ``v`` with maximal dependency lists unless ``assumptions`` says otherwise.

    Keys of ``assumptions`` may be chart variables (``"t"``) or component names
    (``"v^t"``); values list the variables that component depends on.
    """
    restricted: dict[str, tuple[str, ...]] = {}
    for key, deps in dict(assumptions or {}).items():
        name = key[len(prefix):] if key.startswith(prefix) else key
        if name not in chart:
            raise UnknownVariable(f"no chart variable {name!r}")
        deps = tuple(deps)
        for d in deps:
            if d not in chart:
                raise UnknownVariable(f"no chart variable {d!r}")
        restricted[name] = tuple(sorted(set(deps), key=chart.index))
    comps = {n: Fn(prefix + n, restricted.get(n, chart.names)) for n in chart.names}
    return GenericVector(chart, comps, restricted)


# --------------------------------------------------------------------------
# multiplier ansatz
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiplierAnsatz:
    """Which multiplier coefficients appear for each target generator.

    ``slots[j]`` lists ``(k, monomial)`` pairs: the coefficient of
    ``monomial`` in the multiplier of generator ``k`` for target ``j``.
    """

    ideal: Ideal
    slots: tuple[tuple[tuple[int, tuple[int, ...]], ...], ...]
    pruned: bool

    def count(self, j: int) -> int:
        return len(self.slots[j])

    @property
    def counts(self) -> list[int]:
        return [len(s) for s in self.slots]

    def multiplier_forms(self, j: int) -> dict[int, Form]:
        """The ansatz itself, with fresh formal coefficients ``lam<j>_<k>_<m>``."""
        chart = self.ideal.chart
        out: dict[int, Form] = {}
        for k, m in self.slots[j]:
            c = Expr.atom(Fn(f"lam{j}_{k}_" + "".join(chart.names[i] for i in m), chart.names))
            prev = out.get(k, Form(chart, len(m)))
            out[k] = prev + Form(chart, len(m), {m: c})
        return out


def multiplier_ansatz(I: Ideal, prune: bool | None = None) -> MultiplierAnsatz:
    if prune is None:
        prune = I.table is not None
    table = I.table
    if prune and table is None:
        table = SubstitutionTable.build(I.chart, I.generators)
    slots = []
    for g in I.generators:
        bases = multiplier_basis(I.chart, I.generators, g.rank, table, prune)
        cols = _columns(g.rank, I.chart, I.generators, bases)
        slots.append(tuple(cols))
    return MultiplierAnsatz(I, tuple(slots), bool(prune))


# --------------------------------------------------------------------------
# determining systems
# --------------------------------------------------------------------------

@dataclass
class DeterminingSystem:
    chart: Chart
    equations: list[Expr]
    vector: GenericVector
    unknowns: dict[str, Fn]                       # function name -> current base atom
    ledger: AssumptionLedger = field(default_factory=AssumptionLedger)
    sources: list[tuple[str, str]] = field(default_factory=list)
    solved: dict[str, Expr] = field(default_factory=dict)   # function name -> expression
    notices: list[str] = field(default_factory=list)
    substitutions: dict[str, Expr] = field(default_factory=dict)   # component -> formula
    strategy: str = "multipliers"
    raw_counts: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.equations)

    def unknown_atoms(self, e: Expr) -> set[Fn]:
        names = set(self.unknowns)
        return {at for at in e.atoms() if isinstance(at, Fn) and at.name in names}

    def lines(self) -> list[str]:
        order = self.chart.order
        return [f"{e.to_text(order)} = 0" for e in self.equations]

    def to_text(self) -> str:
        return "\n".join(self.lines())

    def check_linear(self, max_order: int | None = 1):
        for e in self.equations:
            _assert_linear(e, set(self.unknowns), max_order)


def _unknown_set(names):
    return set(names)


def _assert_linear(e: Expr, names: set[str], max_order: int | None):
    if e.den and any(isinstance(at, Fn) and at.name in names
                     for f, _ in e.den for m, _c in f for at, _k in m):
        raise NotLinearHomogeneous(f"unknown in a denominator: {e}")
    for m in e.num:
        hits = [(at, k) for at, k in m if isinstance(at, Fn) and at.name in names]
        if len(hits) != 1 or hits[0][1] != 1:
            raise NotLinearHomogeneous(f"not linear homogeneous: {e}")
        if max_order is not None and hits[0][0].order > max_order:
            raise NotLinearHomogeneous(f"order exceeds {max_order}: {e}")


def normalize_equation(e: Expr, ledger: AssumptionLedger | None = None,
                       order: Mapping[str, int] | None = None) -> Expr:
    """Canonical representative of ``e == 0``.

    Denominators and common monomial factors in chart variables are dropped
    (and recorded as nonvanishing); the first displayed term gets a positive
    coefficient and the Gaussian-integer coefficients are made coprime.
    """
    e = Expr.lift(e)
    if e.is_zero():
        return e
    if ledger is not None:
        ledger.note_denominators(e)
    num = dict(e.num)
    common = None
    for m in num:
        vs = {at: k for at, k in m if isinstance(at, Var)}
        if common is None:
            common = vs
        else:
            common = {at: min(k, vs[at]) for at, k in common.items() if at in vs}
    if common:
        if ledger is not None:
            for at in common:
                ledger.assume_nonzero(Expr.atom(at))
        stripped = {}
        for m, c in num.items():
            stripped[tuple((at, k - common.get(at, 0)) for at, k in m
                           if k - common.get(at, 0))] = c
        num = stripped
    lead = min(num, key=lambda m: _display_key(m, order))
    c0 = num[lead]
    num = {m: c / c0 for m, c in num.items()}
    den = 1
    for c in num.values():
        for q in (c.re, c.im):
            den = den * q.denominator // gcd(den, q.denominator)
    g = 0
    for c in num.values():
        for q in (c.re, c.im):
            g = gcd(g, int(q * den))
    factor = GaussianRational(den, 0) / GaussianRational(g, 0)
    return Expr({m: c * factor for m, c in num.items()})


def _finish(chart, raw: list[tuple[Expr, tuple[str, str]]], ledger) -> tuple[list[Expr], list]:
    """Normalize, order (generator, then size, then basis position) and dedupe."""
    order = chart.order
    gen_rank: dict[str, int] = {}
    keyed = []
    for pos, (e, src) in enumerate(raw):
        n = normalize_equation(e, ledger, order)
        if n.is_zero():
            continue
        g = gen_rank.setdefault(src[0], len(gen_rank))
        keyed.append(((g, len(n.num), pos), n, src))
    keyed.sort(key=lambda t: t[0])
    eqs, srcs, seen = [], [], set()
    for _k, n, src in keyed:
        if n in seen:
            continue
        seen.add(n)
        eqs.append(n)
        srcs.append(src)
    return eqs, srcs


def _vector_field(v: GenericVector, substitutions: Mapping[str, Expr] | None) -> VectorField:
    comps = {n: Expr.atom(f) for n, f in v.components.items()}
    for n, e in dict(substitutions or {}).items():
        comps[n] = Expr.lift(e)
    return VectorField(v.chart, comps)


def _unknowns_for(v: GenericVector, substitutions: Mapping[str, Expr] | None) -> dict[str, Fn]:
    out = {f.name: f for n, f in v.components.items() if n not in (substitutions or {})}
    for e in dict(substitutions or {}).values():
        for at in Expr.lift(e).atoms():
            if isinstance(at, Fn) and at.name not in out:
                out[at.name] = at.base
    return out


def determine_multipliers(I: Ideal, v: GenericVector, *, prune: bool | None = None,
                          allow_symbolic_pivots: bool = False,
                          substitutions: Mapping[str, Expr] | None = None,
                          mode: str = "cartan") -> DeterminingSystem:
    """Determining equations by eliminating generic multipliers.

    For each generator ``g`` the coefficients of ``lie(v, g) - sum(m_k ^ g_k)``
    over all basis monomials of rank(g) are set to zero, the multiplier
    coefficients are eliminated, and whatever remains is returned.
    """
    if not I.closed:
        raise OpenIdeal("ideal is not known to be closed; run close() first")
    if v.chart != I.chart:
        raise ValueError("vector and ideal live on different charts")
    chart = I.chart
    ledger = AssumptionLedger()
    vf = _vector_field(v, substitutions)
    ansatz = multiplier_ansatz(I, prune)
    raw = []
    counts = []
    for j, (g, name) in enumerate(zip(I.generators, I.names)):
        target = lie(vf, g, mode)
        slots = ansatz.slots[j]
        cols = {}
        for k, m in slots:
            cols[(k, m)] = _slot_form(chart, I.generators[k], m)
        basis = chart.basis(g.rank)
        counts.append(len(basis))
        rows = []
        for m in basis:
            coeffs = {u: f.terms[m] for u, f in cols.items() if m in f.terms}
            rows.append(Row(coeffs, target.terms.get(m, ZERO)))
        try:
            el = eliminate(rows, list(cols), max_rank=SYMBOLIC if allow_symbolic_pivots else MONOMIAL,
                           ledger=ledger)
        except EliminationStall as exc:
            raise EliminationStall(exc.unknown, exc.coefficient) from None
        for row, ri in zip(el.residual, el.residual_sources):
            if not row.const.is_zero():
                raw.append((row.const, (name, chart.monomial_text(basis[ri]))))
    eqs, srcs = _finish(chart, raw, ledger)
    D = DeterminingSystem(chart, eqs, v, _unknowns_for(v, substitutions), ledger, srcs,
                          substitutions=dict(substitutions or {}), strategy="multipliers",
                          raw_counts=counts)
    D.check_linear(1 if not substitutions else None)
    return D


def _slot_form(chart, g, m):
    from .extalg import wedge

    return wedge(Form(chart, len(m), {m: Expr.constant(1)}), g)


def determine_substitution(I: Ideal, v: GenericVector, *,
                           substitutions: Mapping[str, Expr] | None = None,
                           mode: str = "cartan") -> DeterminingSystem:
    """Determining equations by rewriting ``lie(v, g)`` with the substitution table."""
    if I.table is None:
        raise NoTable("substitution strategy needs a substitution table")
    chart = I.chart
    ledger = AssumptionLedger()
    if I.table.excluded:
        names = ", ".join(I.names[k] for k in I.table.excluded)
        ledger.note(f"generators without a table entry: {names}")
    vf = _vector_field(v, substitutions)
    raw = []
    counts = []
    for g, name in zip(I.generators, I.names):
        r = reduce_mod(lie(vf, g, mode), I)
        basis = chart.basis(g.rank)
        counts.append(len(basis))
        for m in basis:
            c = r.terms.get(m)
            if c is not None and not c.is_zero():
                raw.append((c, (name, chart.monomial_text(m))))
    eqs, srcs = _finish(chart, raw, ledger)
    D = DeterminingSystem(chart, eqs, v, _unknowns_for(v, substitutions), ledger, srcs,
                          substitutions=dict(substitutions or {}), strategy="substitution",
                          raw_counts=counts)
    D.check_linear(1 if not substitutions else None)
    return D


# --------------------------------------------------------------------------
# contact reduction
# --------------------------------------------------------------------------

@dataclass
class ContactReduction:
    F: Fn
    components: dict[str, Expr]
    multiplier: Expr
    conditions: list[Expr]
    free: list[str]
    ledger: AssumptionLedger
    pivot: str

    def substitutions(self) -> dict[str, Expr]:
        return {n: e for n, e in self.components.items() if n not in self.free}


def contact_reduce(gamma: Form, v: GenericVector | None = None, *, name: str = "F",
                   pivot: str | None = None) -> ContactReduction:
    """Solve ``lie(v, γ) = λγ`` for the components of ``v`` in terms of ``F = v⌟γ``.

    By Cartan's formula the condition reads ``dF + v⌟dγ = λγ``; together with
    ``F = v⌟γ`` it is linear in the components and λ.  Whatever cannot be
    solved for is returned as conditions on ``F`` (and on components left free).
    """
    chart = gamma.chart
    if gamma.rank != 1:
        raise ValueError("contact reduction needs a 1-form")
    if v is None:
        v = generic_vector(chart)
    names = chart.names
    coef = {names[m[0]]: c for m, c in gamma.terms.items()}
    units = [n for n in names if n in coef and coef[n].is_constant()]
    if pivot is not None:
        if pivot not in units:
            raise NoUnitContactCoefficient(f"d{pivot} does not have a constant coefficient")
    else:
        dep = [n for n in units if chart.role(n) == "dependent"]
        if not (dep or units):
            raise NoUnitContactCoefficient("no differential in the 1-form has a constant coefficient")
        pivot = (dep or units)[0]
    F = Fn(name, names)
    Fe = Expr.atom(F)
    dg = ext_d(gamma)
    lam = "lambda"
    rows = []
    # F - v⌟γ = 0
    rows.append(Row({n: -coef[n] for n in names if n in coef}, Fe))
    # dF + v⌟dγ - λγ = 0, one row per differential
    pieces = {}
    for n in names:
        e = VectorField(chart, {n: Expr.constant(1)})
        pieces[n] = contract(e, dg) if dg.rank > 0 and not dg.is_zero() else Form(chart, 1)
    for k, x in enumerate(names):
        coeffs = {}
        for n in names:
            c = pieces[n].terms.get((k,))
            if c is not None and not c.is_zero():
                coeffs[n] = c
        if x in coef:
            coeffs[lam] = -coef[x]
        rows.append(Row(coeffs, diff(Fe, x)))
    ledger = AssumptionLedger()
    order = [lam] + [n for n in names]
    # solve the unit-coefficient variable last so that it absorbs F
    order.remove(pivot)
    order.append(pivot)
    el = eliminate(rows, order, max_rank=MONOMIAL, ledger=ledger)
    comps: dict[str, Expr] = {}
    multiplier = ZERO
    free_atoms = {n: Expr.atom(v.components[n]) for n in el.free if n != lam}
    for u, row in el.pivots:
        val = -row.const
        for w, c in row.coeffs.items():
            if w != u:
                val = val - c * free_atoms.get(w, ZERO)
        if u == lam:
            multiplier = val
        else:
            comps[u] = val
    for n in el.free:
        if n != lam:
            comps[n] = free_atoms[n]
    for e in list(comps.values()) + [multiplier]:
        ledger.note_denominators(e)
    conds_raw = [(r.const, ("contact", "")) for r in el.residual if not r.const.is_zero()]
    conds, _ = _finish(chart, conds_raw, ledger)
    comps = {n: comps[n] for n in names}
    return ContactReduction(F, comps, multiplier, conds, [n for n in el.free if n != lam],
                            ledger, pivot)


# --------------------------------------------------------------------------
# post-processing
# --------------------------------------------------------------------------

def _single_atom(e: Expr, names: set[str]):
    """If ``e`` is a single unknown atom (up to a constant), return it."""
    if len(e.num) != 1 or e.den:
        return None
    (m, _c), = e.num.items()
    if len(m) != 1 or m[0][1] != 1:
        return None
    at = m[0][0]
    if isinstance(at, Fn) and at.name in names:
        return at
    return None


def _solvable(e: Expr, unknowns: Mapping[str, Fn]):
    """A base unknown appearing once, linearly, with a constant coefficient and no partials."""
    atoms = [at for at in e.atoms() if isinstance(at, Fn) and at.name in unknowns]
    by_name: dict[str, list[Fn]] = {}
    for at in atoms:
        by_name.setdefault(at.name, []).append(at)
    for name in sorted(by_name):
        ats = by_name[name]
        base = unknowns[name]
        if ats != [base]:
            continue
        try:
            coeffs, rest = linear_coefficients(e, [base])
        except ValueError:
            continue
        c = coeffs.get(base)
        if c is None or not c.is_constant():
            continue
        return base, -rest / c
    return None


def split_and_simplify(D: DeterminingSystem, split_vars: Iterable[str] = (),
                       cap: int = 25) -> DeterminingSystem:
    """Split equations on ``split_vars`` and forward-substitute trivial results.

    An equation is split on the split variables it is polynomial in and that
    no formal function in it depends on; anything else is left alone.  The
    patterns ``v_{,a} = 0`` (drop ``a`` from the dependency list) and
    ``v = expression`` (substitute) are applied until nothing changes.
    """
    chart = D.chart
    order = chart.order
    split_vars = [s for s in split_vars]
    ledger = AssumptionLedger()
    ledger.merge(D.ledger)
    notices = list(D.notices)
    unknowns = dict(D.unknowns)
    solved = dict(D.solved)
    eqs = list(D.equations)
    skipped: set[Expr] = set()

    def rewrite(bindings):
        nonlocal eqs, solved
        eqs = [substitute(e, bindings) for e in eqs]
        solved = {k: substitute(e, bindings) for k, e in solved.items()}

    def tidy():
        nonlocal eqs
        out, seen = [], set()
        for e in eqs:
            n = normalize_equation(e, ledger, order)
            if not n.is_zero() and n not in seen:
                seen.add(n)
                out.append(n)
        eqs = out

    iterations = 0
    changed = True
    tidy()
    while changed:
        if iterations >= cap:
            notices.append(f"iteration cap {cap} reached; system may simplify further")
            break
        iterations += 1
        changed = False

        # narrow dependencies
        narrowed = {}
        for e in eqs:
            at = _single_atom(e, set(unknowns))
            if at is None or at.order != 1:
                continue
            base = unknowns[at.name]
            if at.base != base or at.name in narrowed:
                continue
            x = at.derivative_vars()[0]
            narrowed[at.name] = (base, x)
        if narrowed:
            bindings = {}
            for name, (base, x) in narrowed.items():
                new = Fn(name, tuple(d for d in base.deps if d != x))
                unknowns[name] = new
                bindings[base] = Expr.atom(new)
                ledger.note(f"{name} independent of {x}")
            rewrite(bindings)
            tidy()
            changed = True

        # solve for undifferentiated unknowns
        k = 0
        while k < len(eqs):
            hit = _solvable(eqs[k], unknowns)
            if hit is None:
                k += 1
                continue
            base, expr = hit
            eqs.pop(k)
            extra = [x for x in sorted(expr.free_vars(), key=lambda n: order.get(n, len(order)))
                     if x not in base.deps]
            compat = [diff(expr, x) for x in extra]
            solved[base.name] = expr
            del unknowns[base.name]
            rewrite({base: expr})
            eqs.extend(compat)
            tidy()
            changed = True
            k = 0

        # split
        out = []
        did_split = False
        splittable_names = set(split_vars)
        for e in eqs:
            usable = [s for s in split_vars
                      if not any(isinstance(at, Fn) and s in at.deps for at in e.atoms())]
            if not usable:
                out.append(e)
                if splittable_names and e.free_vars() & splittable_names:
                    skipped.add(e)
                continue
            try:
                parts = collect(e, usable)
            except NonPolynomial:
                out.append(e)
                skipped.add(e)
                continue
            if len(parts) > 1:
                did_split = True
                out.extend(parts.values())
            else:
                out.append(e)
        if did_split:
            eqs = out
            tidy()
            changed = True

    live = set(eqs)
    skipped &= live
    if skipped:
        notices.append(f"{len(skipped)} equation(s) not split: a formal function depends on a split "
                       f"variable or it appears in a denominator")
    R = DeterminingSystem(chart, eqs, D.vector, unknowns, ledger, [("simplified", "")] * len(eqs),
                          solved, notices, dict(D.substitutions), D.strategy, list(D.raw_counts))
    R.check_linear(None)
    return R


# --------------------------------------------------------------------------
# comparison
# --------------------------------------------------------------------------

def _as_vector(e: Expr, names: set[str]) -> dict:
    """Coefficient vector of ``e`` over unknown atoms times chart-variable monomials."""
    coeffs, rest = linear_coefficients(e, [at for at in e.atoms()
                                           if isinstance(at, Fn) and at.name in names])
    if not rest.is_zero():
        raise NotLinearHomogeneous(str(e))
    out = {}
    for at, c in coeffs.items():
        out[at] = c
    return out


def equivalent_systems(A: Sequence[Expr], B: Sequence[Expr], names: set[str]) -> tuple[bool, bool]:
    """Whether every equation of A is a combination of B's, and vice versa.

    Combination coefficients may be any expressions free of the unknowns.
    """
    va = [_as_vector(e, names) for e in A]
    vb = [_as_vector(e, names) for e in B]
    a_in_b = all(solve_combination(x, vb) is not None for x in va)
    b_in_a = all(solve_combination(x, va) is not None for x in vb)
    return a_in_b, b_in_a
