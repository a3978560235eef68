"""Exterior differential systems: ideals of forms and membership."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .extalg import Chart, ChartMismatch, Form, ext_d, mono_key, sort_sign, wedge, _merge_sign
from .linalg import Row, eliminate
from .symexpr import AssumptionLedger, Expr, Fn, ONE, ZERO, linear_coefficients

__all__ = [
    "Ideal",
    "TableEntry",
    "SubstitutionTable",
    "MembershipCertificate",
    "NoTable",
    "NotQuasiLinear",
    "DuplicateProlongation",
    "close",
    "member",
    "reduce_mod",
    "multiplier_basis",
    "contact_forms",
    "equation_form",
]


class NoTable(ValueError):
    pass


class NotQuasiLinear(ValueError):
    pass


class DuplicateProlongation(ValueError):
    pass


@dataclass(frozen=True)
class TableEntry:
    """Rewrite rule ``leading -> replacement`` read off an element of the ideal."""

    generator: int
    leading: tuple[int, ...]
    coefficient: Expr
    source: Form
    replacement: Form

    @property
    def rank(self) -> int:
        return len(self.leading)


@dataclass(frozen=True)
class SubstitutionTable:
    entries: tuple[TableEntry, ...]
    excluded: tuple[int, ...] = ()

    def leading_monomials(self) -> list[tuple[int, ...]]:
        return [e.leading for e in self.entries]

    def find(self, mono: tuple[int, ...]) -> TableEntry | None:
        s = set(mono)
        for e in self.entries:
            if s.issuperset(e.leading):
                return e
        return None

    @classmethod
    def build(cls, chart: Chart, generators: Sequence[Form],
              overrides: Mapping[int, tuple[int, ...] | None] | None = None) -> "SubstitutionTable":
        """Pick one leading monomial per generator.

        Each generator is first reduced by the entries already chosen; its
        greatest remaining monomial becomes the rule when that coefficient is a
        nonzero constant.  Generators without such a monomial are excluded.
        An override may name a different monomial (it must still be the
        greatest of the reduced generator) or ``None`` to exclude.
        """
        overrides = dict(overrides or {})
        entries: list[TableEntry] = []
        excluded: list[int] = []
        for k, g in enumerate(generators):
            table = cls(tuple(entries))
            h = _reduce(g, table) if entries else g
            if h.is_zero() or (k in overrides and overrides[k] is None):
                excluded.append(k)
                continue
            ordered = sorted(h.terms, key=mono_key, reverse=True)
            lead = ordered[0]
            if k in overrides:
                want = tuple(sorted(overrides[k]))
                if want not in h.terms:
                    raise ValueError(f"override monomial {chart.monomial_text(want)} "
                                     f"does not occur in generator {k}")
                if want != lead:
                    raise ValueError(f"override {chart.monomial_text(want)} is not the greatest "
                                     f"monomial of generator {k} ({chart.monomial_text(lead)})")
            c = h.terms[lead]
            if not c.is_constant() or lead in {e.leading for e in entries}:
                excluded.append(k)
                continue
            tail = Form(chart, h.rank, {m: v for m, v in h.terms.items() if m != lead})
            entries.append(TableEntry(k, lead, c, h, tail.scale(-c.reciprocal())))
        return cls(tuple(entries), tuple(excluded))


@dataclass(frozen=True)
class Ideal:
    """Ordered generators with closure status and an optional rewriting table."""

    chart: Chart
    generators: tuple[Form, ...]
    names: tuple[str, ...] = ()
    closed: bool = False
    table: SubstitutionTable | None = None

    def __post_init__(self):
        gens = tuple(self.generators)
        for g in gens:
            if g.chart != self.chart:
                raise ChartMismatch("generator on a different chart")
            if g.is_zero():
                raise ValueError("ideal generators must be nonzero")
        object.__setattr__(self, "generators", gens)
        names = tuple(self.names) or tuple(f"g{k}" for k in range(len(gens)))
        if len(names) != len(gens):
            raise ValueError("one name per generator")
        object.__setattr__(self, "names", names)

    def with_table(self, overrides: Mapping[int, tuple[int, ...] | None] | None = None) -> "Ideal":
        return replace(self, table=SubstitutionTable.build(self.chart, self.generators, overrides))

    @property
    def ranks(self) -> list[int]:
        return [g.rank for g in self.generators]

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


# --------------------------------------------------------------------------
# membership
# --------------------------------------------------------------------------

@dataclass
class MembershipCertificate:
    """``target = sum(multipliers[k] ^ generators[k]) + residual``."""

    target: Form
    generators: tuple[Form, ...]
    multipliers: list[Form | None]
    residual: Form
    ledger: AssumptionLedger = field(default_factory=AssumptionLedger)

    @property
    def is_member(self) -> bool:
        return self.residual.is_zero()

    def recombine(self) -> Form:
        total = Form(self.target.chart, self.target.rank)
        for m, g in zip(self.multipliers, self.generators):
            if m is not None:
                total = total + wedge(m, g)
        return total

    def verify(self) -> bool:
        return self.recombine() + self.residual == self.target


def multiplier_basis(chart: Chart, generators: Sequence[Form], rank: int,
                     table: SubstitutionTable | None = None, prune: bool = False):
    """Complementary monomials available to each generator's multiplier.

    With ``prune``, monomials containing the leading differential of a rank-1
    table entry are dropped: such terms can be rewritten through that 1-form.
    """
    banned = set()
    if prune and table is not None:
        banned = {e.leading[0] for e in table.entries if e.rank == 1}
    out = []
    for g in generators:
        p = rank - g.rank
        if p < 0:
            out.append([])
            continue
        out.append([m for m in chart.basis(p) if not banned.intersection(m)])
    return out


def _columns(target_rank, chart, generators, bases):
    cols = {}
    for j, (g, basis) in enumerate(zip(generators, bases)):
        for m in basis:
            f = wedge(Form(chart, len(m), {m: ONE}), g)
            if not f.is_zero():
                cols[(j, m)] = f
    return cols


def member(a: Form, I: Ideal, *, prune: bool = False) -> MembershipCertificate:
    """Decide ``a ∈ I`` by solving for generic multipliers exactly."""
    if a.chart != I.chart:
        raise ChartMismatch("form and ideal live on different charts")
    bases = multiplier_basis(I.chart, I.generators, a.rank, I.table, prune)
    cols = _columns(a.rank, I.chart, I.generators, bases)
    ledger = AssumptionLedger()
    monos = set(a.terms)
    for f in cols.values():
        monos.update(f.terms)
    rows = []
    for m in sorted(monos):
        coeffs = {u: f.terms[m] for u, f in cols.items() if m in f.terms}
        rows.append(Row(coeffs, -a.terms.get(m, ZERO)))
    el = eliminate(rows, list(cols), ledger=ledger)
    sol = el.solution()
    multipliers: list[Form | None] = []
    for j, g in enumerate(I.generators):
        p = a.rank - g.rank
        if p < 0:
            multipliers.append(None)
            continue
        terms = {m: sol[(j, m)] for (jj, m) in cols if jj == j and not sol[(j, m)].is_zero()}
        multipliers.append(Form(I.chart, p, terms))
    cert = MembershipCertificate(a, I.generators, multipliers, Form(a.chart, a.rank), ledger)
    if el.consistent:
        for mlt in multipliers:
            if mlt is not None:
                for c in mlt.terms.values():
                    ledger.note_denominators(c)
        residual = a - cert.recombine()
        if not residual.is_zero():
            raise ArithmeticError("elimination produced an inconsistent certificate")
    else:
        residual = a - cert.recombine()
    cert.residual = residual
    return cert


def close(I: Ideal) -> Ideal:
    """Append exterior derivatives of generators until d(I) ⊂ I."""
    gens = list(I.generators)
    names = list(I.names)
    k = 0
    while k < len(gens):
        dg = ext_d(gens[k])
        if not dg.is_zero() and dg.rank <= I.chart.dim:
            trial = Ideal(I.chart, tuple(gens), tuple(names))
            if not member(dg, trial).is_member:
                gens.append(dg)
                names.append(f"d{names[k]}")
        k += 1
    table = I.table
    if len(gens) != len(I.generators) and table is not None:
        table = SubstitutionTable.build(I.chart, gens)
    return Ideal(I.chart, tuple(gens), tuple(names), True, table)


# --------------------------------------------------------------------------
# rewriting
# --------------------------------------------------------------------------

def _reduce(a: Form, table: SubstitutionTable) -> Form:
    terms = dict(a.terms)
    chart = a.chart
    while True:
        target = None
        for m in sorted(terms, key=mono_key, reverse=True):
            e = table.find(m)
            if e is not None:
                target = (m, e)
                break
        if target is None:
            return Form(chart, a.rank, terms)
        m, e = target
        c = terms.pop(m)
        rest = tuple(k for k in m if k not in e.leading)
        sign, merged = _merge_sign(e.leading, rest)
        assert merged == m
        piece = wedge(e.replacement, Form(chart, len(rest), {rest: ONE}))
        scale = c if sign > 0 else -c
        for mm, cc in piece.terms.items():
            v = terms.get(mm, ZERO) + cc * scale
            if v.is_zero():
                terms.pop(mm, None)
            else:
                terms[mm] = v


def reduce_mod(a: Form, I: Ideal) -> Form:
    """Normal form of ``a`` under the ideal's substitution table."""
    if I.table is None:
        raise NoTable("ideal has no substitution table")
    if a.chart != I.chart:
        raise ChartMismatch("form and ideal live on different charts")
    return _reduce(a, I.table)


# --------------------------------------------------------------------------
# standard constructions
# --------------------------------------------------------------------------

def contact_forms(chart: Chart, pairs, *, sign: str = "negative") -> list[Form]:
    """Contact 1-forms ``-du + sum z_i dx_i`` (or ``du - sum z_i dx_i``).

    ``pairs`` is a sequence of ``(u, {x_i: z_i})``; each ``z_i`` is a chart
    variable name or an expression.
    """
    if sign not in ("negative", "positive"):
        raise ValueError("sign must be 'negative' or 'positive'")
    seen_dep, seen_prol = set(), set()
    out = []
    for u, slots in pairs:
        if u in seen_dep:
            raise DuplicateProlongation(f"{u} prolonged twice")
        seen_dep.add(u)
        form = -Form.d(chart, u)
        for x, z in dict(slots).items():
            if isinstance(z, str):
                if z in seen_prol:
                    raise DuplicateProlongation(f"{z} used for two derivatives")
                seen_prol.add(z)
                chart.index(z)
                z = Expr.atom(_var(z))
            form = form + Form.d(chart, x).scale(z)
        out.append(form if sign == "negative" else -form)
    return out


def _var(name):
    from .symexpr import Var

    return Var(name)


def _volume(chart: Chart, indep: Sequence[str]) -> Form:
    return Form.from_terms(chart, [(tuple(indep), ONE)])


def equation_form(chart: Chart, eq: Expr, indep: Sequence[str]) -> Form:
    """Form whose section-and-annul gives back ``eq == 0``.

    ``eq`` is quasi-linear in first-order derivative atoms ``z_{,x}`` (as made
    by :func:`~edsym.extalg.deriv_atom` over ``indep``) with coefficients
    free of derivatives.
    """
    indep = tuple(indep)
    eq = Expr.lift(eq)
    derivs = []
    for at in eq.atoms():
        if isinstance(at, Fn) and at.deps == indep and at.name in chart and at.name not in indep:
            if at.order != 1:
                raise NotQuasiLinear(f"{at.to_text()} is not a first-order derivative")
            derivs.append(at)
    if not derivs:
        raise NotQuasiLinear("equation contains no derivative atoms")
    try:
        coeffs, rest = linear_coefficients(eq, derivs)
    except ValueError as exc:
        raise NotQuasiLinear(str(exc)) from None
    dset = set(derivs)
    for c in list(coeffs.values()) + [rest]:
        if any(isinstance(at, Fn) and at.name in chart and at.deps == indep for at in c.atoms()):
            raise NotQuasiLinear("derivative atoms appear in a coefficient")
    omega = _volume(chart, indep)
    out = omega.scale(rest)
    for at, c in sorted(coeffs.items(), key=lambda p: p[0].key):
        if at not in dset:
            continue
        x = at.deps[at.orders.index(1)]
        slot = _drop(chart, indep, x)
        out = out + wedge(Form.d(chart, at.name), slot).scale(c)
    return out


def _drop(chart: Chart, indep: Sequence[str], x: str) -> Form:
    """∂_x ⌟ (dx_1 ^ ... ^ dx_n)."""
    pos = list(indep).index(x)
    rest = [n for n in indep if n != x]
    sign = -1 if pos % 2 else 1
    return Form.from_terms(chart, [(tuple(rest), Expr.constant(sign))])
