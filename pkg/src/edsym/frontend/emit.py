"""Deterministic text, LaTeX and JSON renderings of domain values."""

from __future__ import annotations

import json
from functools import singledispatch

from ..eds import Ideal, MembershipCertificate
from ..extalg import Chart, Form, VectorField
from ..isovector import ContactReduction, DeterminingSystem
from ..symexpr import Expr
from ..verify import CandidateGenerator, CheckReport, DeterminingReport

__all__ = ["emit", "render", "to_json", "SCHEMAS", "FORMAT_VERSION"]

FORMAT_VERSION = 1


def emit(obj, fmt: str = "text") -> bytes:
    """Render ``obj`` as UTF-8 bytes; equal inputs give identical bytes."""
    return render(obj, fmt).encode("utf-8")


def render(obj, fmt: str = "text") -> str:
    if fmt == "text":
        return _text(obj)
    if fmt == "latex":
        return _latex(obj)
    if fmt == "json":
        return json.dumps(to_json(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _order(chart: Chart):
    return chart.order


# --------------------------------------------------------------------------
# text
# --------------------------------------------------------------------------

@singledispatch
def _text(obj) -> str:
    raise TypeError(f"cannot render {type(obj).__name__}")


@_text.register
def _(e: Expr) -> str:
    return e.to_text()


@_text.register
def _(f: Form) -> str:
    return f.to_text()


@_text.register
def _(v: VectorField) -> str:
    return v.to_text()


@_text.register
def _(c: CandidateGenerator) -> str:
    return f"{c.name} = {c.field.to_text()}"


@_text.register
def _(I: Ideal) -> str:
    out = [f"ideal ({'closed' if I.closed else 'not closed'})"]
    for n, g in zip(I.names, I.generators):
        out.append(f"  {n} = {g.to_text()}")
    if I.table is not None:
        out.append("substitutions:")
        for e in I.table.entries:
            out.append(f"  {I.names[e.generator]}: {I.chart.monomial_text(e.leading)} -> "
                       f"{e.replacement.to_text()}")
        for k in I.table.excluded:
            out.append(f"  {I.names[k]}: (no rule)")
    return "\n".join(out) + "\n"


def _ledger_lines(ledger, order) -> list[str]:
    out = [f"assuming {e.to_text(order)} != 0" for e in ledger.nonzero]
    return out + [f"note: {n}" for n in ledger.notes]


@_text.register
def _(D: DeterminingSystem) -> str:
    order = _order(D.chart)
    out = list(D.lines())
    for name, e in D.solved.items():
        out.append(f"{name} = {e.to_text(order)}")
    for comp, e in D.substitutions.items():
        out.append(f"v^{comp} = {e.to_text(order)}")
    out.extend(_ledger_lines(D.ledger, order))
    out.extend(f"note: {n}" for n in D.notices)
    return "\n".join(out) + "\n"


@_text.register
def _(R: ContactReduction) -> str:
    chart_order = {n: k for k, n in enumerate(R.F.deps)}
    out = [f"{R.F.name} = {R.F.name}({', '.join(R.F.deps)})"]
    for n, e in R.components.items():
        out.append(f"v^{n} = {e.to_text(chart_order)}")
    out.append(f"lambda = {R.multiplier.to_text(chart_order)}")
    for c in R.conditions:
        out.append(f"{c.to_text(chart_order)} = 0")
    out.extend(_ledger_lines(R.ledger, chart_order))
    if R.free:
        out.append("free: " + ", ".join(f"v^{n}" for n in R.free))
    return "\n".join(out) + "\n"


def _mult_text(m) -> str:
    return "-" if m is None else m.to_text()


@_text.register
def _(c: MembershipCertificate) -> str:
    head = "member" if c.is_member else "not a member"
    mults = ", ".join(_mult_text(m) for m in c.multipliers)
    s = f"{head}; multipliers: {mults}"
    if not c.is_member:
        s += f"; residual: {c.residual.to_text()}"
    return s


@_text.register
def _(r: CheckReport) -> str:
    out = [f"{r.candidate}: {r.verdict}"]
    for n, c in zip(r.names, r.certificates):
        out.append(f"  {n}: {_text(c)}")
    return "\n".join(out) + "\n"


@_text.register
def _(r: DeterminingReport) -> str:
    out = [f"{r.candidate}: {r.verdict}"]
    out.extend(f"  violates: {v}" for v in r.violations)
    for k, e in enumerate(r.residuals):
        if not e.is_zero():
            out.append(f"  residual {k}: {e.to_text()}")
    return "\n".join(out) + "\n"


@_text.register
def _(items: list) -> str:
    return "".join(_text(x) for x in items)


# --------------------------------------------------------------------------
# latex
# --------------------------------------------------------------------------

@singledispatch
def _latex(obj) -> str:
    return _text(obj)


@_latex.register
def _(e: Expr) -> str:
    return e.to_latex()


@_latex.register
def _(f: Form) -> str:
    return f.to_latex()


@_latex.register
def _(I: Ideal) -> str:
    rows = [f"{_latex_name(n)} &= {g.to_latex()}" for n, g in zip(I.names, I.generators)]
    return "\\begin{align*}\n" + " \\\\\n".join(rows) + "\n\\end{align*}\n"


@_latex.register
def _(D: DeterminingSystem) -> str:
    order = _order(D.chart)
    rows = [f"{e.to_latex(order)} &= 0" for e in D.equations]
    for name, e in D.solved.items():
        rows.append(f"{_latex_name(name)} &= {e.to_latex(order)}")
    return "\\begin{align*}\n" + " \\\\\n".join(rows) + "\n\\end{align*}\n"


@_latex.register
def _(R: ContactReduction) -> str:
    order = {n: k for k, n in enumerate(R.F.deps)}
    rows = [f"v^{{{n}}} &= {e.to_latex(order)}" for n, e in R.components.items()]
    rows.append(f"\\lambda &= {R.multiplier.to_latex(order)}")
    rows.extend(f"{c.to_latex(order)} &= 0" for c in R.conditions)
    return "\\begin{align*}\n" + " \\\\\n".join(rows) + "\n\\end{align*}\n"


_GREEK = {"alpha", "beta", "gamma", "delta", "epsilon", "lambda", "mu", "tau", "omega", "sigma"}


def _latex_name(name: str) -> str:
    head = name.rstrip("*")
    star = "^*" if name.endswith("*") else ""
    prefix = ""
    if head.startswith("d") and head[1:] in _GREEK:
        prefix, head = "d", head[1:]
    if head in _GREEK:
        return prefix + "\\" + head + star
    if head.startswith("v^"):
        return f"v^{{{head[2:]}}}" + star
    return prefix + head + star


# --------------------------------------------------------------------------
# json
# --------------------------------------------------------------------------

def _chart_json(chart: Chart) -> dict:
    return {
        "variables": [{"name": n, "role": chart.role(n)} for n in chart.names],
        "pairing": [list(p) for p in chart.pairing.pairs()] if chart.pairing else [],
    }


def _form_json(f: Form) -> dict:
    order = f.chart.order
    return {
        "rank": f.rank,
        "text": f.to_text(),
        "latex": f.to_latex(),
        "terms": [{"monomial": [f.chart.names[i] for i in m], "coefficient": c.to_text(order)}
                  for m, c in sorted(f.terms.items())],
    }


def _envelope(kind: str, body: dict) -> dict:
    return {"schema": f"edsym/{kind}", "version": FORMAT_VERSION, **body}


@singledispatch
def to_json(obj) -> dict:
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@to_json.register
def _(f: Form) -> dict:
    return _envelope("form", {"chart": _chart_json(f.chart), "form": _form_json(f)})


@to_json.register
def _(I: Ideal) -> dict:
    table = None
    if I.table is not None:
        table = {
            "rules": [{"generator": I.names[e.generator],
                       "leading": [I.chart.names[i] for i in e.leading],
                       "replacement": e.replacement.to_text()} for e in I.table.entries],
            "excluded": [I.names[k] for k in I.table.excluded],
        }
    return _envelope("ideal", {
        "chart": _chart_json(I.chart),
        "closed": I.closed,
        "generators": [{"name": n, **_form_json(g)} for n, g in zip(I.names, I.generators)],
        "table": table,
    })


@to_json.register
def _(D: DeterminingSystem) -> dict:
    order = _order(D.chart)
    return _envelope("determining-system", {
        "chart": _chart_json(D.chart),
        "strategy": D.strategy,
        "equations": [{"text": e.to_text(order), "latex": e.to_latex(order),
                       "source": {"generator": s[0], "monomial": s[1]}}
                      for e, s in zip(D.equations, D.sources)],
        "unknowns": {n: list(f.deps) for n, f in sorted(D.unknowns.items())},
        "solved": {n: e.to_text(order) for n, e in D.solved.items()},
        "substitutions": {n: e.to_text(order) for n, e in D.substitutions.items()},
        "assumptions": D.ledger.lines(order),
        "notices": list(D.notices),
        "raw_equation_counts": list(D.raw_counts),
    })


def _cert_json(name: str, c: MembershipCertificate) -> dict:
    return {
        "generator": name,
        "member": c.is_member,
        "multipliers": [None if m is None else m.to_text() for m in c.multipliers],
        "residual": c.residual.to_text(),
    }


@to_json.register
def _(r: CheckReport) -> dict:
    return _envelope("check-report", {
        "candidate": r.candidate,
        "verdict": r.verdict,
        "certificates": [_cert_json(n, c) for n, c in zip(r.names, r.certificates)],
        "assumptions": r.ledger.lines(),
    })


@to_json.register
def _(r: ContactReduction) -> dict:
    order = {n: k for k, n in enumerate(r.F.deps)}
    return _envelope("contact-reduction", {
        "function": {"name": r.F.name, "deps": list(r.F.deps)},
        "components": {n: e.to_text(order) for n, e in r.components.items()},
        "multiplier": r.multiplier.to_text(order),
        "conditions": [c.to_text(order) for c in r.conditions],
        "free": list(r.free),
        "assumptions": r.ledger.lines(order),
    })


@to_json.register
def _(items: list) -> dict:
    return {"schema": "edsym/list", "version": FORMAT_VERSION, "items": [to_json(x) for x in items]}


# --------------------------------------------------------------------------
# schemas
# --------------------------------------------------------------------------

_CHART = {
    "type": "object",
    "required": ["variables", "pairing"],
    "properties": {
        "variables": {"type": "array", "items": {
            "type": "object", "required": ["name", "role"],
            "properties": {"name": {"type": "string"}, "role": {"type": ["string", "null"]}}}},
        "pairing": {"type": "array", "items": {"type": "array", "items": {"type": "string"},
                                               "minItems": 2, "maxItems": 2}},
    },
}

_FORM = {
    "type": "object",
    "required": ["rank", "text", "latex", "terms"],
    "properties": {
        "rank": {"type": "integer", "minimum": 0},
        "text": {"type": "string"},
        "latex": {"type": "string"},
        "terms": {"type": "array", "items": {
            "type": "object", "required": ["monomial", "coefficient"],
            "properties": {"monomial": {"type": "array", "items": {"type": "string"}},
                           "coefficient": {"type": "string"}}}},
    },
}


def _schema(kind: str, props: dict, required: list[str]) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": f"edsym/{kind}",
        "type": "object",
        "required": ["schema", "version"] + required,
        "properties": {"schema": {"const": f"edsym/{kind}"},
                       "version": {"const": FORMAT_VERSION}, **props},
    }


_STRINGS = {"type": "array", "items": {"type": "string"}}

SCHEMAS = {
    "ideal": _schema("ideal", {
        "chart": _CHART,
        "closed": {"type": "boolean"},
        "generators": {"type": "array", "items": {
            "allOf": [_FORM, {"type": "object", "required": ["name"],
                              "properties": {"name": {"type": "string"}}}]}},
        "table": {"type": ["object", "null"]},
    }, ["chart", "closed", "generators", "table"]),
    "determining-system": _schema("determining-system", {
        "chart": _CHART,
        "strategy": {"enum": ["multipliers", "substitution"]},
        "equations": {"type": "array", "items": {
            "type": "object", "required": ["text", "latex", "source"],
            "properties": {"text": {"type": "string"}, "latex": {"type": "string"},
                           "source": {"type": "object",
                                      "required": ["generator", "monomial"]}}}},
        "unknowns": {"type": "object", "additionalProperties": _STRINGS},
        "solved": {"type": "object", "additionalProperties": {"type": "string"}},
        "substitutions": {"type": "object", "additionalProperties": {"type": "string"}},
        "assumptions": _STRINGS,
        "notices": _STRINGS,
        "raw_equation_counts": {"type": "array", "items": {"type": "integer"}},
    }, ["chart", "strategy", "equations", "unknowns", "assumptions"]),
    "check-report": _schema("check-report", {
        "candidate": {"type": "string"},
        "verdict": {"enum": ["pass", "fail"]},
        "certificates": {"type": "array", "items": {
            "type": "object", "required": ["generator", "member", "multipliers", "residual"],
            "properties": {"generator": {"type": "string"}, "member": {"type": "boolean"},
                           "multipliers": {"type": "array",
                                           "items": {"type": ["string", "null"]}},
                           "residual": {"type": "string"}}}},
        "assumptions": _STRINGS,
    }, ["candidate", "verdict", "certificates"]),
}
