"""Exterior algebra over a coordinate chart.

Forms are rank-homogeneous maps from strictly increasing index tuples to
:class:`~edsym.symexpr.Expr` coefficients.  The chart fixes the index of each
coordinate, and therefore the basis order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Iterable, Mapping, Sequence

from .symexpr import (
    ConjugationPairing,
    Expr,
    Fn,
    ONE,
    ZERO,
    conjugate,
    diff,
    substitute,
)

__all__ = [
    "Chart",
    "Form",
    "VectorField",
    "RankZero",
    "ChartMismatch",
    "UnsectionedVariable",
    "wedge",
    "ext_d",
    "contract",
    "lie",
    "section",
    "annul",
    "sort_sign",
    "deriv_atom",
    "mono_key",
]

ROLES = ("independent", "dependent", "prolonged")


class RankZero(ValueError):
    """Contraction of a vector field with a 0-form."""


class ChartMismatch(ValueError):
    pass


class UnsectionedVariable(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """Ordered coordinates of the extended manifold, with optional role tags."""

    names: tuple[str, ...]
    roles: tuple[tuple[str, str], ...] = ()
    pairing: ConjugationPairing | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate chart variable in {names}")
        roles = tuple(dict(self.roles).items()) if not isinstance(self.roles, tuple) else self.roles
        object.__setattr__(self, "roles", roles)
        if roles:
            tagged = dict(roles)
            missing = [n for n in names if n not in tagged]
            if missing:
                raise ValueError(f"role partition does not cover {missing}")
            bad = [r for r in tagged.values() if r not in ROLES]
            if bad:
                raise ValueError(f"unknown roles {bad}")
        object.__setattr__(self, "_index", {n: k for k, n in enumerate(names)})

    @classmethod
    def of(cls, *names: str, roles: Mapping[str, str] | None = None,
           pairing: ConjugationPairing | None = None) -> "Chart":
        if len(names) == 1 and not isinstance(names[0], str):
            names = tuple(names[0])
        return cls(tuple(names), tuple((roles or {}).items()), pairing)

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def order(self) -> dict[str, int]:
        return self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"{name} is not a chart variable") from None

    def __contains__(self, name) -> bool:
        return name in self._index

    def role(self, name: str) -> str | None:
        return dict(self.roles).get(name)

    def with_role(self, role: str) -> list[str]:
        tagged = dict(self.roles)
        return [n for n in self.names if tagged.get(n) == role]

    @property
    def independent(self) -> list[str]:
        return self.with_role("independent")

    def basis(self, rank: int) -> list[tuple[int, ...]]:
        """Basis monomials of the given rank, lexicographic on index tuples."""
        return list(combinations(range(self.dim), rank))

    def basis_count(self, rank: int) -> int:
        return comb(self.dim, rank)

    def monomial_text(self, mono: Sequence[int]) -> str:
        return "^".join("d" + self.names[k] for k in mono)

    def monomial_latex(self, mono: Sequence[int]) -> str:
        from .symexpr import Var

        return " \\wedge ".join("d" + Var(self.names[k]).to_latex() for k in mono)

    def restrict(self, names: Sequence[str]) -> "Chart":
        keep = [n for n in self.names if n in set(names)]
        roles = tuple((n, r) for n, r in self.roles if n in set(keep))
        return Chart(tuple(keep), roles, self.pairing)


def sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...] | None]:
    """Sign of the permutation sorting ``idx``; ``(0, None)`` if an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


def _merge_sign(a: tuple[int, ...], b: tuple[int, ...]):
    if set(a) & set(b):
        return 0, None
    # count inversions between a and b: pairs (x in a, y in b) with x > y
    inv = 0
    for x in a:
        for y in b:
            if x > y:
                inv += 1
    return (-1 if inv & 1 else 1), tuple(sorted(a + b))


class Form:
    """A homogeneous differential form of rank ``p`` on ``chart``."""

    __slots__ = ("chart", "rank", "terms", "_hash")

    def __init__(self, chart: Chart, rank: int, terms: Mapping[tuple[int, ...], Expr] | None = None):
        self.chart = chart
        self.rank = rank
        clean = {}
        for mono, c in (terms or {}).items():
            c = Expr.lift(c)
            if c.is_zero():
                continue
            if len(mono) != rank:
                raise ValueError(f"monomial {mono} does not have rank {rank}")
            clean[tuple(mono)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def zero(cls, chart: Chart, rank: int) -> "Form":
        return cls(chart, rank)

    @classmethod
    def scalar(cls, chart: Chart, e) -> "Form":
        return cls(chart, 0, {(): Expr.lift(e)})

    @classmethod
    def d(cls, chart: Chart, name: str) -> "Form":
        return cls(chart, 1, {(chart.index(name),): ONE})

    @classmethod
    def from_terms(cls, chart: Chart, items: Iterable[tuple[Sequence[str], object]]) -> "Form":
        """Build from ``[(('u', 't'), coeff), ...]``; names in any order, signs applied."""
        acc: dict = {}
        rank = None
        for names, c in items:
            sign, mono = sort_sign([chart.index(n) for n in names])
            if rank is None:
                rank = len(names)
            elif rank != len(names):
                raise ValueError("mixed-rank terms")
            if not sign:
                continue
            acc[mono] = acc.get(mono, ZERO) + Expr.lift(c) * sign
        return cls(chart, rank or 0, acc)

    # algebra ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, mono: Sequence[int] | Sequence[str]) -> Expr:
        if mono and isinstance(next(iter(mono)), str):
            sign, m = sort_sign([self.chart.index(n) for n in mono])
        else:
            sign, m = sort_sign(list(mono))
        if not sign:
            return ZERO
        return self.terms.get(m, ZERO) * sign

    def _check(self, other: "Form"):
        if other.chart != self.chart:
            raise ChartMismatch("forms live on different charts")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        if other.rank != self.rank:
            if other.is_zero():
                return self
            if self.is_zero():
                return other
            raise ValueError("cannot add forms of different rank")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, ZERO) + c
        return Form(self.chart, self.rank, out)

    def __neg__(self) -> "Form":
        return Form(self.chart, self.rank, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, e) -> "Form":
        e = Expr.lift(e)
        return Form(self.chart, self.rank, {m: c * e for m, c in self.terms.items()})

    def __mul__(self, e) -> "Form":
        if isinstance(e, Form):
            return wedge(self, e)
        return self.scale(e)

    __rmul__ = scale

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def map_coefficients(self, f) -> "Form":
        return Form(self.chart, self.rank, {m: f(c) for m, c in self.terms.items()})

    def substitute(self, bindings) -> "Form":
        return self.map_coefficients(lambda c: substitute(c, bindings))

    def conjugate(self, pairing: ConjugationPairing | None = None) -> "Form":
        p = pairing or self.chart.pairing or ConjugationPairing()
        acc: dict = {}
        for m, c in self.terms.items():
            sign, mono = sort_sign([self.chart.index(p(self.chart.names[k])) for k in m])
            acc[mono] = acc.get(mono, ZERO) + conjugate(c, p) * sign
        return Form(self.chart, self.rank, acc)

    def as_scalar(self) -> Expr:
        if self.rank != 0:
            raise ValueError("not a 0-form")
        return self.terms.get((), ZERO)

    def sorted_terms(self):
        """Terms in descending monomial order (greatest trailing index first)."""
        return sorted(self.terms.items(), key=lambda mc: mono_key(mc[0]), reverse=True)

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        if self.chart != other.chart:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.rank == other.rank and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, self.rank, frozenset(self.terms.items())))
        return self._hash

    def _display_terms(self):
        items = [(list(m), c) for m, c in self.sorted_terms()]
        # write the leading term with a positive sign by swapping its first two factors
        if self.rank >= 2 and items:
            m, c = items[0]
            if _atomic(c) and _leading_negative(c):
                items[0] = ([m[1], m[0]] + m[2:], -c)
        return items

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        order = self.chart.order
        out = []
        for k, (m, c) in enumerate(self._display_terms()):
            if self.rank == 0:
                body, sign = c.to_text(order), "+"
                if body.startswith("-"):
                    sign, body = "-", body[1:]
            else:
                mono = self.chart.monomial_text(m)
                sign, body = _signed(c, c.to_text(order))
                body = mono if body == "1" else f"{body}*{mono}" if _atomic(c) else f"({body})*{mono}"
            if k == 0:
                out.append(body if sign == "+" else f"-{body}")
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    def to_latex(self) -> str:
        if not self.terms:
            return "0"
        order = self.chart.order
        out = []
        for k, (m, c) in enumerate(self._display_terms()):
            mono = self.chart.monomial_latex(m)
            sign, body = _signed(c, c.to_latex(order))
            if self.rank == 0:
                pass
            elif body == "1":
                body = mono
            elif _atomic(c):
                body = f"{body}\\, {mono}"
            else:
                body = f"\\left({body}\\right) {mono}"
            if k == 0:
                out.append(body if sign == "+" else f"-{body}")
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    def __repr__(self):
        return f"Form[{self.rank}]({self.to_text()})"

    def __str__(self):
        return self.to_text()


def mono_key(m: Sequence[int]) -> tuple[int, ...]:
    """Monomial order: compare by the largest differing index.

    Multiplicative: if a > b then a^c > b^c whenever both are nonzero.
    """
    return tuple(sorted(m, reverse=True))


def _leading_negative(c: Expr) -> bool:
    (m, q), = c.num.items()
    return (q.re < 0) if q.re else (q.im < 0)


def _atomic(c: Expr) -> bool:
    return c.is_monomial() or (len(c.num) == 1 and len(c.den) > 0)


def _signed(c: Expr, text: str):
    if _atomic(c) and text.startswith("-"):
        return "-", text[1:]
    return "+", text


def wedge(a: Form, b: Form) -> Form:
    """Exterior product; vanishes silently beyond the chart dimension."""
    a._check(b)
    rank = a.rank + b.rank
    if rank > a.chart.dim:
        return Form(a.chart, rank)
    acc: dict = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            sign, m = _merge_sign(ma, mb)
            if not sign:
                continue
            term = ca * cb
            acc[m] = acc.get(m, ZERO) + (term if sign > 0 else -term)
    return Form(a.chart, rank, acc)


def _d_scalar(chart: Chart, e: Expr) -> Form:
    return Form(chart, 1, {(k,): diff(e, n) for k, n in enumerate(chart.names)})


def ext_d(a: Form) -> Form:
    """Exterior derivative."""
    chart = a.chart
    acc: dict = {}
    for m, c in a.terms.items():
        for k, name in enumerate(chart.names):
            if k in m:
                continue
            dc = diff(c, name)
            if dc.is_zero():
                continue
            # dx_k ^ dx_m: sign from moving dx_k past the smaller indices of m
            before = sum(1 for j in m if j < k)
            mono = tuple(sorted(m + (k,)))
            acc[mono] = acc.get(mono, ZERO) + (dc if before % 2 == 0 else -dc)
    return Form(chart, a.rank + 1, acc)


@dataclass(frozen=True)
class VectorField:
    """Map from chart variable name to component; absent entries are zero."""

    chart: Chart
    components: Mapping[str, Expr]

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.components).items():
            if k not in self.chart:
                raise KeyError(f"{k} is not a chart variable")
            v = Expr.lift(v)
            if not v.is_zero():
                clean[k] = v
        object.__setattr__(self, "components", clean)

    def __getitem__(self, name: str) -> Expr:
        if name not in self.chart:
            raise KeyError(name)
        return self.components.get(name, ZERO)

    def apply(self, e) -> Expr:
        """Directional derivative v(e)."""
        e = Expr.lift(e)
        total = ZERO
        for n, c in self.components.items():
            de = diff(e, n)
            if not de.is_zero():
                total = total + c * de
        return total

    def __add__(self, other: "VectorField") -> "VectorField":
        keys = set(self.components) | set(other.components)
        return VectorField(self.chart, {k: self[k] + other[k] for k in keys})

    def scale(self, e) -> "VectorField":
        e = Expr.lift(e)
        return VectorField(self.chart, {k: v * e for k, v in self.components.items()})

    def substitute(self, bindings) -> "VectorField":
        return VectorField(self.chart, {k: substitute(v, bindings) for k, v in self.components.items()})

    def bracket(self, other: "VectorField") -> "VectorField":
        """Commutator [self, other]^i = self(other^i) - other(self^i)."""
        return VectorField(self.chart, {n: self.apply(other[n]) - other.apply(self[n])
                                        for n in self.chart.names})

    def to_text(self) -> str:
        order = self.chart.order
        parts = [f"{n}: {self.components[n].to_text(order)}" for n in self.chart.names
                 if n in self.components]
        return "{" + ", ".join(parts) + "}"

    def __repr__(self):
        return f"VectorField({self.to_text()})"


def contract(v: VectorField, a: Form) -> Form:
    """Interior product ``v ⌟ a``."""
    if a.rank == 0:
        raise RankZero("cannot contract a vector field with a 0-form")
    if v.chart != a.chart:
        raise ChartMismatch("vector field and form live on different charts")
    acc: dict = {}
    names = a.chart.names
    for m, c in a.terms.items():
        for pos, k in enumerate(m):
            comp = v[names[k]]
            if comp.is_zero():
                continue
            rest = m[:pos] + m[pos + 1:]
            term = comp * c
            acc[rest] = acc.get(rest, ZERO) + (term if pos % 2 == 0 else -term)
    return Form(a.chart, a.rank - 1, acc)


def lie(v: VectorField, a: Form, mode: str = "cartan") -> Form:
    """Lie derivative of a form along v.

    ``cartan`` uses d(v⌟a) + v⌟da; ``leibniz`` differentiates coefficients
    and replaces each dx^i factor in turn by dv^i.
    """
    if v.chart != a.chart:
        raise ChartMismatch("vector field and form live on different charts")
    if a.rank == 0:
        return Form.scalar(a.chart, v.apply(a.as_scalar()))
    if mode == "cartan":
        return ext_d(contract(v, a)) + contract(v, ext_d(a))
    if mode != "leibniz":
        raise ValueError(f"unknown mode {mode!r}")
    chart = a.chart
    dv = {n: _d_scalar(chart, v[n]) for n in chart.names}
    out = Form(chart, a.rank)
    for m, c in a.terms.items():
        out = out + Form(chart, a.rank, {m: v.apply(c)})
        for pos, k in enumerate(m):
            left = Form(chart, pos, {m[:pos]: ONE})
            right = Form(chart, len(m) - pos - 1, {m[pos + 1:]: ONE})
            out = out + wedge(wedge(left, dv[chart.names[k]]), right).scale(c)
    return out


def deriv_atom(name: str, indep: Sequence[str], x: str) -> Fn:
    """Formal partial ``name_{,x}`` of a function of the independent variables."""
    indep = tuple(indep)
    orders = [0] * len(indep)
    orders[indep.index(x)] = 1
    return Fn(name, indep, orders)


def section(a: Form, dep: Mapping[str, Sequence[str]] | None = None) -> Form:
    """Pull back to a graph: each dz becomes sum_i z_{,x_i} dx_i.

    ``dep`` maps each non-independent variable to the independent variables
    it is a function of.  Defaults to the chart's role tags.
    """
    chart = a.chart
    if dep is None:
        indep = chart.independent
        if not indep:
            raise UnsectionedVariable("chart has no independent variables and no dep map given")
        dep = {n: indep for n in chart.names if n not in indep}
    dep = {k: tuple(v) for k, v in dep.items()}
    dependent = set(dep)
    for k, vs in dep.items():
        if k not in chart:
            raise KeyError(f"{k} is not a chart variable")
        if k in vs:
            raise ValueError(f"{k} cannot depend on itself")
        for x in vs:
            if x in dependent:
                raise ValueError(f"{x} is listed as dependent and independent")
    ones: dict[str, Form] = {}
    for n in chart.names:
        if n in dep:
            ones[n] = Form(chart, 1, {(chart.index(x),): Expr.atom(deriv_atom(n, dep[n], x))
                                      for x in dep[n]})
        else:
            ones[n] = Form.d(chart, n)
    out = Form(chart, a.rank)
    for m, c in a.terms.items():
        names = [chart.names[k] for k in m]
        term = Form.scalar(chart, c)
        for n in names:
            term = wedge(term, ones[n])
        out = out + term
    horizontal = {x for vs in dep.values() for x in vs}
    for m in out.terms:
        for k in m:
            if chart.names[k] not in horizontal:
                raise UnsectionedVariable(f"d{chart.names[k]} has no dependency entry")
    return out


def annul(a: Form) -> list[Expr]:
    """Coefficient equations (each ≡ 0) of a sectioned form."""
    return [c for _, c in a.sorted_terms()]
