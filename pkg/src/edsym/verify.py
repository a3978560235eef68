"""Certified checks of candidate generators, plus randomized identity suites."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .eds import Ideal, MembershipCertificate, member
from .extalg import Chart, ChartMismatch, Form, VectorField, contract, ext_d, lie, wedge
from .isovector import DeterminingSystem, OpenIdeal
from .symexpr import AssumptionLedger, Expr, Fn, Var, ZERO, const, diff, fn, substitute, var

__all__ = [
    "CandidateGenerator",
    "CheckReport",
    "DeterminingReport",
    "MissingComponent",
    "check_generator",
    "check_determining",
    "commutator",
    "random_expr",
    "random_form",
    "random_vector",
    "IDENTITIES",
    "run_identity_suite",
]


class MissingComponent(KeyError):
    pass


@dataclass(frozen=True)
class CandidateGenerator:
    """An explicit vector field offered as a symmetry; absent components are zero."""

    field: VectorField
    name: str = "candidate"
    provenance: str = ""

    @classmethod
    def of(cls, chart: Chart, components: Mapping[str, object], name: str = "candidate",
           provenance: str = "") -> "CandidateGenerator":
        return cls(VectorField(chart, {k: Expr.lift(v) for k, v in components.items()}),
                   name, provenance)

    @property
    def chart(self) -> Chart:
        return self.field.chart

    def __getitem__(self, name: str) -> Expr:
        return self.field[name]


def _as_field(v) -> VectorField:
    return v.field if isinstance(v, CandidateGenerator) else v


@dataclass
class CheckReport:
    candidate: str
    names: tuple[str, ...]
    certificates: list[MembershipCertificate]
    ledger: AssumptionLedger = field(default_factory=AssumptionLedger)

    @property
    def passed(self) -> bool:
        return all(c.is_member for c in self.certificates)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def check_generator(v, I: Ideal) -> CheckReport:
    """Certify ``lie(v, g) ∈ I`` for every generator ``g``."""
    vf = _as_field(v)
    if vf.chart != I.chart:
        raise ChartMismatch("candidate and ideal live on different charts")
    if not I.closed:
        raise OpenIdeal("ideal is not known to be closed; run close() first")
    ledger = AssumptionLedger()
    certs = []
    for g in I.generators:
        cert = member(lie(vf, g), I)
        if cert.is_member and not cert.verify():
            raise ArithmeticError("certificate failed re-expansion")
        ledger.merge(cert.ledger)
        certs.append(cert)
    name = v.name if isinstance(v, CandidateGenerator) else "candidate"
    return CheckReport(name, I.names, certs, ledger)


@dataclass
class DeterminingReport:
    candidate: str
    residuals: list[Expr]
    violations: list[str]

    @property
    def passed(self) -> bool:
        return not self.violations and all(r.is_zero() for r in self.residuals)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def check_determining(D: DeterminingSystem, v, extra: Mapping[str, object] | None = None
                      ) -> DeterminingReport:
    """Substitute a candidate into a determining system.

    Unknown functions named after a component (``v^x``) take the candidate's
    component; any other unknown (such as a contact function ``F``) must be
    given in ``extra``.  Components the system solved for are compared
    against the candidate as additional residuals.
    """
    vf = _as_field(v)
    if vf.chart != D.chart:
        raise ChartMismatch("candidate and system live on different charts")
    extra = {k: Expr.lift(e) for k, e in dict(extra or {}).items()}
    by_function = {f.name: n for n, f in D.vector.components.items()}
    bindings = {}
    violations = []
    for name, base in D.unknowns.items():
        if name in extra:
            value = extra[name]
        elif name in by_function:
            value = vf[by_function[name]]
        else:
            raise MissingComponent(f"no value for unknown function {name}")
        outside = sorted(value.free_vars() - set(base.deps))
        if outside:
            violations.append(f"{name} depends on {', '.join(outside)}")
        bindings[base] = value
    residuals = [substitute(e, bindings) for e in D.equations]
    for name, expr in D.solved.items():
        comp = by_function.get(name)
        given = extra[name] if name in extra else (vf[comp] if comp else None)
        if given is None:
            raise MissingComponent(f"no value for solved function {name}")
        residuals.append(given - substitute(expr, bindings))
    for comp, expr in D.substitutions.items():
        residuals.append(vf[comp] - substitute(expr, bindings))
    label = v.name if isinstance(v, CandidateGenerator) else "candidate"
    return DeterminingReport(label, residuals, violations)


def commutator(v, w) -> CandidateGenerator:
    a, b = _as_field(v), _as_field(w)
    na = v.name if isinstance(v, CandidateGenerator) else "v"
    nb = w.name if isinstance(w, CandidateGenerator) else "w"
    return CandidateGenerator(a.bracket(b), f"[{na}, {nb}]", "commutator")


# --------------------------------------------------------------------------
# randomized identity suites
# --------------------------------------------------------------------------

def random_expr(rng: random.Random, chart: Chart, terms: int = 3, max_deg: int = 2,
                with_fn: bool = True) -> Expr:
    """Small random polynomial over the chart, occasionally with a formal function."""
    names = chart.names
    e = ZERO
    for _ in range(rng.randint(0, terms)):
        c = const(rng.randint(-3, 3), rng.choice((0, 0, 0, 1)))
        m = c
        for _ in range(rng.randint(0, max_deg)):
            m = m * var(rng.choice(names))
        if with_fn and rng.random() < 0.2:
            deps = tuple(sorted(rng.sample(names, rng.randint(1, min(2, len(names)))),
                                key=chart.index))
            m = m * fn(rng.choice("fgh"), deps)
        e = e + m
    if rng.random() < 0.1:
        e = e / (var(rng.choice(names)) + const(rng.randint(1, 3)))
    return e


def random_form(rng: random.Random, chart: Chart, rank: int, density: float = 0.5) -> Form:
    terms = {}
    for m in chart.basis(rank):
        if rng.random() < density:
            terms[m] = random_expr(rng, chart)
    return Form(chart, rank, terms)


def random_vector(rng: random.Random, chart: Chart) -> VectorField:
    return VectorField(chart, {n: random_expr(rng, chart) for n in chart.names
                               if rng.random() < 0.7})


def _ranks(rng, chart, k):
    return [rng.randint(0, chart.dim) for _ in range(k)]


def _dd(rng, chart):
    a = random_form(rng, chart, rng.randint(0, chart.dim))
    return ext_d(ext_d(a)).is_zero()


def _leibniz(rng, chart):
    p, q = rng.randint(0, chart.dim), rng.randint(0, chart.dim)
    a, b = random_form(rng, chart, p), random_form(rng, chart, q)
    lhs = ext_d(wedge(a, b))
    rhs = wedge(ext_d(a), b) + wedge(a, ext_d(b)).scale(const((-1) ** p))
    return lhs == rhs


def _assoc(rng, chart):
    a, b, c = (random_form(rng, chart, rng.randint(0, 2)) for _ in range(3))
    return wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


def _anticomm(rng, chart):
    p, q = rng.randint(0, chart.dim), rng.randint(0, chart.dim)
    a, b = random_form(rng, chart, p), random_form(rng, chart, q)
    return wedge(a, b) == wedge(b, a).scale(const((-1) ** (p * q)))


def _cartan_leibniz(rng, chart):
    a = random_form(rng, chart, rng.randint(1, chart.dim))
    v = random_vector(rng, chart)
    return lie(v, a, "cartan") == lie(v, a, "leibniz")


def _lie_d(rng, chart):
    a = random_form(rng, chart, rng.randint(1, chart.dim - 1))
    v = random_vector(rng, chart)
    return lie(v, ext_d(a)) == ext_d(lie(v, a))


def _contract(rng, chart):
    p, q = rng.randint(1, chart.dim), rng.randint(1, chart.dim)
    a, b = random_form(rng, chart, p), random_form(rng, chart, q)
    v = random_vector(rng, chart)
    lhs = contract(v, wedge(a, b)) if p + q <= chart.dim else Form(chart, p + q - 1)
    if p + q > chart.dim:
        return True
    rhs = wedge(contract(v, a), b) + wedge(a, contract(v, b)).scale(const((-1) ** p))
    return lhs == rhs


IDENTITIES: dict[str, Callable[[random.Random, Chart], bool]] = {
    "d(d a) = 0": _dd,
    "d(a^b) = da^b + (-1)^p a^db": _leibniz,
    "(a^b)^c = a^(b^c)": _assoc,
    "a^b = (-1)^(pq) b^a": _anticomm,
    "cartan = leibniz": _cartan_leibniz,
    "lie(v, da) = d(lie(v, a))": _lie_d,
    "v⌟(a^b) = (v⌟a)^b + (-1)^p a^(v⌟b)": _contract,
}


def run_identity_suite(cases: int = 200, seed: int = 0,
                       charts: Sequence[Chart] | None = None) -> dict[str, int]:
    """Run each identity on ``cases`` random instances; returns failure counts."""
    rng = random.Random(seed)
    charts = list(charts or [Chart.of("x", "y", "z"), Chart.of("x", "t", "u", "w")])
    failures = {}
    for name, check in IDENTITIES.items():
        bad = 0
        for _ in range(cases):
            if not check(rng, rng.choice(charts)):
                bad += 1
        failures[name] = bad
    return failures
