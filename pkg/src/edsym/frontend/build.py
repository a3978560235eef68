"""Resolve a parsed problem into charts, forms, ideals and candidates."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..eds import Ideal, close
from ..extalg import Chart, Form, wedge
from ..isovector import generic_vector, GenericVector
from ..symexpr import ConjugationPairing, Expr, Fn, I, Var, const, diff
from ..verify import CandidateGenerator
from .syntax import (
    Assume,
    BinOp,
    Call,
    CandidateDef,
    ConjugateDecl,
    Derivative,
    Differential,
    Directive,
    FormDef,
    FunctionDecl,
    IdealDef,
    Imag,
    Name,
    Neg,
    Node,
    Num,
    Power,
    ProblemAST,
    RoleDecl,
    SyntaxDiagnostic,
    parse_problem,
)

__all__ = ["Problem", "build_problem", "load_problem", "evaluate"]


class _Resolve(SyntaxDiagnostic):
    def __init__(self, message, node: Node | None, length: int = 1):
        sp = getattr(node, "span", None)
        line, col = (sp.line, sp.col) if sp is not None else (0, 0)
        super().__init__("resolution", message, line, col, (), length)


@dataclass
class Problem:
    ast: ProblemAST
    chart: Chart
    forms: dict[str, Form]
    functions: dict[str, Fn]
    ideals: dict[str, tuple[str, ...]]
    assumptions: dict[str, tuple[str, ...]] = field(default_factory=dict)
    candidates: dict[str, CandidateGenerator] = field(default_factory=dict)
    strategy: str | None = None
    split: tuple[str, ...] = ()
    simplify: bool = False
    leading: dict[str, tuple[str, ...] | None] = field(default_factory=dict)
    contact: tuple[str, str | None] | None = None

    def ideal_name(self, name: str | None = None) -> str:
        if name is None:
            if not self.ideals:
                raise KeyError("problem defines no ideal")
            return next(iter(self.ideals))
        if name not in self.ideals:
            raise KeyError(f"no ideal named {name!r}")
        return name

    def raw_ideal(self, name: str | None = None) -> Ideal:
        name = self.ideal_name(name)
        members = self.ideals[name]
        return Ideal(self.chart, tuple(self.forms[m] for m in members), members)

    def ideal(self, name: str | None = None) -> Ideal:
        """The named ideal closed under d, with its substitution table."""
        J = close(self.raw_ideal(name))
        overrides = {}
        for gen, mono in self.leading.items():
            if gen in J.names:
                k = J.names.index(gen)
                overrides[k] = None if mono is None else tuple(self.chart.index(n) for n in mono)
        return J.with_table(overrides)

    def vector(self, extra: dict[str, tuple[str, ...]] | None = None) -> GenericVector:
        a = dict(self.assumptions)
        a.update(extra or {})
        return generic_vector(self.chart, a)


def _differential_target(name: str, chart_names) -> str | None:
    if name.startswith("d") and name[1:] in chart_names:
        return name[1:]
    return None


def evaluate(node: Node, chart: Chart, forms: dict[str, Form], functions: dict[str, Fn]) -> Form:
    """Evaluate an expression AST to a form (0-forms for scalars)."""
    names = set(chart.names)

    def scalar(f: Form, where: Node) -> Expr:
        if f.rank != 0:
            raise _Resolve("expected a 0-form here", where)
        return f.as_scalar()

    def go(n: Node) -> Form:
        if isinstance(n, Num):
            return Form.scalar(chart, const(n.value))
        if isinstance(n, Imag):
            return Form.scalar(chart, I)
        if isinstance(n, Name):
            if n.id in names:
                return Form.scalar(chart, Expr.atom(Var(n.id)))
            if n.id in forms:
                return forms[n.id]
            if n.id in functions:
                return Form.scalar(chart, Expr.atom(functions[n.id]))
            target = _differential_target(n.id, names)
            if target is not None:
                return Form.d(chart, target)
            raise _Resolve(f"undeclared name {n.id!r}", n, len(n.id))
        if isinstance(n, Call):
            if n.func not in functions:
                raise _Resolve(f"undeclared function {n.func!r}", n, len(n.func))
            f = functions[n.func]
            if tuple(n.args) != f.deps:
                raise _Resolve(f"{n.func} is declared as {n.func}({', '.join(f.deps)})", n,
                               len(n.func))
            return Form.scalar(chart, Expr.atom(f))
        if isinstance(n, Differential):
            from ..extalg import ext_d

            return ext_d(go(n.arg))
        if isinstance(n, Derivative):
            if n.var not in names:
                raise _Resolve(f"undeclared variable {n.var!r}", n)
            e = scalar(go(n.arg), n)
            return Form.scalar(chart, diff(e, n.var, n.times))
        if isinstance(n, Neg):
            return -go(n.arg)
        if isinstance(n, Power):
            base = scalar(go(n.base), n)
            try:
                return Form.scalar(chart, base ** n.exp)
            except ZeroDivisionError:
                raise _Resolve("negative power of zero", n) from None
        if isinstance(n, BinOp):
            a, b = go(n.left), go(n.right)
            if n.op in "+-":
                if a.rank != b.rank:
                    raise _Resolve(f"cannot add a {a.rank}-form and a {b.rank}-form", n)
                return a + b if n.op == "+" else a - b
            if n.op == "^":
                return wedge(a, b)
            if n.op == "*":
                if a.rank and b.rank:
                    raise _Resolve("use ^ to multiply two forms", n)
                return wedge(a, b)
            if n.op == "/":
                d = scalar(b, n.right)
                if d.is_zero():
                    raise _Resolve("division by zero", n)
                return a.scale(d.reciprocal())
        raise _Resolve(f"cannot evaluate {type(n).__name__}", n)

    return go(node)


def build_problem(ast: ProblemAST) -> Problem:
    names: list[str] = []
    roles: dict[str, str] = {}
    pairs: list[tuple[str, str]] = []
    reserved = {"d", "i"}
    for s in ast.statements:
        if isinstance(s, RoleDecl):
            for n in s.names:
                if n in reserved:
                    raise _Resolve(f"{n!r} is reserved", s)
                if n in roles:
                    raise _Resolve(f"variable {n!r} declared twice", s, len(n))
                names.append(n)
                roles[n] = s.role
    seen = set(names)
    for s in ast.statements:
        if isinstance(s, ConjugateDecl):
            for n in (s.left, s.right):
                if n not in seen:
                    raise _Resolve(f"undeclared variable {n!r}", s, len(n))
            pairs.append((s.left, s.right))
    if not names:
        raise SyntaxDiagnostic("resolution", "no variables declared", 1, 1)
    try:
        pairing = ConjugationPairing(pairs)
    except ValueError as exc:
        raise _Resolve(str(exc), None) from None
    chart = Chart.of(*names, roles=roles, pairing=pairing)
    forms: dict[str, Form] = {}
    functions: dict[str, Fn] = {}
    ideals: dict[str, tuple[str, ...]] = {}
    prob = Problem(ast, chart, forms, functions, ideals)
    for s in ast.statements:
        if isinstance(s, (RoleDecl, ConjugateDecl)):
            continue
        if isinstance(s, FunctionDecl):
            for d in s.deps:
                if d not in seen:
                    raise _Resolve(f"undeclared variable {d!r}", s, len(d))
            if s.name in seen or s.name in forms or s.name in functions:
                raise _Resolve(f"name {s.name!r} already in use", s, len(s.name))
            functions[s.name] = Fn(s.name, s.deps)
        elif isinstance(s, FormDef):
            if s.name in seen or s.name in functions:
                raise _Resolve(f"name {s.name!r} already in use", s, len(s.name))
            forms[s.name] = evaluate(s.expr, chart, forms, functions)
        elif isinstance(s, IdealDef):
            for m in s.members:
                if m not in forms:
                    raise _Resolve(f"undeclared form {m!r}", s, len(m))
                if forms[m].is_zero():
                    raise _Resolve(f"form {m!r} is zero", s, len(m))
            ideals[s.name] = s.members
        elif isinstance(s, Assume):
            for d in (s.var,) + s.deps:
                if d not in seen:
                    raise _Resolve(f"undeclared variable {d!r}", s, len(d))
            prob.assumptions[s.var] = s.deps
        elif isinstance(s, CandidateDef):
            comps = {}
            for v, e in s.components:
                if v not in seen:
                    raise _Resolve(f"undeclared variable {v!r}", s, len(v))
                f = evaluate(e, chart, {}, functions)
                if f.rank != 0:
                    raise _Resolve(f"component {v} must be a 0-form", e)
                comps[v] = f.as_scalar()
            prob.candidates[s.name] = CandidateGenerator.of(chart, comps, s.name, "problem file")
        elif isinstance(s, Directive):
            if s.kind == "strategy":
                if s.args[0] not in ("multipliers", "substitution"):
                    raise _Resolve(f"unknown strategy {s.args[0]!r}", s)
                prob.strategy = s.args[0]
            elif s.kind == "split":
                for d in s.args:
                    if d not in seen:
                        raise _Resolve(f"undeclared variable {d!r}", s, len(d))
                prob.split = tuple(s.args)
                prob.simplify = True
            elif s.kind == "simplify":
                prob.simplify = True
            elif s.kind == "leading":
                gen, mono = s.args
                if mono is not None:
                    bad = [m for m in mono if _differential_target(m, seen) is None]
                    if bad:
                        raise _Resolve(f"{bad[0]!r} is not a differential", s, len(bad[0]))
                    mono = tuple(m[1:] for m in mono)
                prob.leading[gen] = mono
            elif s.kind == "contact":
                form, pivot = s.args
                if form not in forms:
                    raise _Resolve(f"undeclared form {form!r}", s, len(form))
                if pivot is not None and pivot not in seen:
                    raise _Resolve(f"undeclared variable {pivot!r}", s, len(pivot))
                prob.contact = (form, pivot)
    return prob


def load_problem(text: str) -> Problem:
    return build_problem(parse_problem(text))
