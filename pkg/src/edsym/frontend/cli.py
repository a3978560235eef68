"""Command-line interface: ``edsym {info,close,section,determine,contact,check} FILE``.

Exit codes: 0 success or pass, 1 verification failure, 2 usage or parse
error, 3 strategy stall (no admissible pivot, no table, no unit contact
coefficient, ideal not closed).
"""

from __future__ import annotations

import argparse
import sys
from math import comb
from pathlib import Path

from ..eds import NoTable
from ..extalg import UnsectionedVariable, annul, section
from ..isovector import (
    EliminationStall,
    NoUnitContactCoefficient,
    OpenIdeal,
    UnknownVariable,
    contact_reduce,
    determine_multipliers,
    determine_substitution,
    split_and_simplify,
)
from ..verify import check_generator
from .build import Problem, build_problem
from .emit import FORMAT_VERSION, render
from .syntax import ProblemAST, SyntaxDiagnostic, parse_problem

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_STALL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _header(kind: str, fmt: str) -> str:
    return f"# edsym {kind} v{FORMAT_VERSION}\n" if fmt == "text" else ""


def _load(path: str, extra: str | None = None) -> Problem:
    text = Path(path).read_text(encoding="utf-8")
    ast = _parse_with_name(text, path)
    if extra is not None:
        more = _parse_with_name(Path(extra).read_text(encoding="utf-8"), extra)
        ast = ProblemAST(ast.version, ast.statements + more.statements)
    return build_problem(ast)


def _parse_with_name(text: str, path: str) -> ProblemAST:
    try:
        return parse_problem(text)
    except SyntaxDiagnostic as d:
        d.args = (f"{path}:{d.args[0]}",)
        raise


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_info(prob: Problem, args) -> tuple[str, int]:
    ch = prob.chart
    out = [_header("info", "text").rstrip("\n")]
    out.append("variables: " + ", ".join(f"{n} ({ch.role(n) or 'untagged'})" for n in ch.names))
    if ch.pairing:
        out.append("conjugate pairs: " + ", ".join(f"{a} <-> {b}" for a, b in ch.pairing.pairs()))
    out.append(f"dimension: {ch.dim}")
    for p in range(ch.dim + 1):
        out.append(f"basis {p}-forms: {comb(ch.dim, p)}")
    for name, members in prob.ideals.items():
        ranks = ", ".join(f"{m}:{prob.forms[m].rank}" for m in members)
        out.append(f"ideal {name}: {ranks}")
    if prob.functions:
        out.append("functions: " + ", ".join(f"{f.name}({', '.join(f.deps)})"
                                             for f in prob.functions.values()))
    if prob.candidates:
        out.append("candidates: " + ", ".join(prob.candidates))
    return "\n".join(out) + "\n", EXIT_OK


def cmd_close(prob: Problem, args) -> tuple[str, int]:
    J = prob.ideal(args.ideal)
    return _header("ideal", args.format) + render(J, args.format), EXIT_OK


def cmd_section(prob: Problem, args) -> tuple[str, int]:
    J = prob.raw_ideal(args.ideal)
    order = prob.chart.order
    out = [_header("section", "text").rstrip("\n")]
    for n, g in zip(J.names, J.generators):
        s = section(g)
        out.append(f"{n} -> {s.to_text()}")
        for e in annul(s):
            out.append(f"  {e.to_text(order)} = 0")
    return "\n".join(out) + "\n", EXIT_OK


def _assumptions(items) -> dict:
    out = {}
    for item in items or ():
        if ":" not in item:
            raise UsageError(f"--assume expects NAME:VARS, got {item!r}")
        name, vs = item.split(":", 1)
        out[name.strip()] = tuple(v.strip() for v in vs.split(",") if v.strip())
    return out


def determine(prob: Problem, *, ideal=None, strategy=None, assume=None, split=None,
              prune=None, symbolic=False, simplify=None):
    """The pipeline behind ``edsym determine``."""
    J = prob.ideal(ideal)
    v = prob.vector(assume)
    subs = None
    if prob.contact is not None:
        form, pivot = prob.contact
        subs = contact_reduce(prob.forms[form], v, pivot=pivot).substitutions()
    strategy = strategy or prob.strategy or "multipliers"
    if strategy == "substitution":
        D = determine_substitution(J, v, substitutions=subs)
    else:
        D = determine_multipliers(J, v, prune=prune, allow_symbolic_pivots=symbolic,
                                  substitutions=subs)
    if simplify is None:
        simplify = prob.simplify or bool(split)
    split = prob.split if split is None else split
    if simplify:
        D = split_and_simplify(D, split)
    return D


def cmd_determine(prob: Problem, args) -> tuple[str, int]:
    split = None
    if args.split is not None:
        split = tuple(s.strip() for s in args.split.split(",") if s.strip())
        for s in split:
            if s not in prob.chart:
                raise UsageError(f"--split names unknown variable {s!r}")
    D = determine(prob, ideal=args.ideal, strategy=args.strategy,
                  assume=_assumptions(args.assume), split=split,
                  prune=False if args.no_prune else None, symbolic=args.symbolic_pivots,
                  simplify=False if args.raw else (True if args.simplify else None))
    return _header("determining-system", args.format) + render(D, args.format), EXIT_OK


def cmd_contact(prob: Problem, args) -> tuple[str, int]:
    form = args.form or (prob.contact[0] if prob.contact else None)
    if form is None:
        raise UsageError("no contact form: pass --form or add a 'contact' directive")
    if form not in prob.forms:
        raise UsageError(f"no form named {form!r}")
    pivot = prob.contact[1] if prob.contact and prob.contact[0] == form else None
    R = contact_reduce(prob.forms[form], prob.vector(), pivot=pivot)
    return _header("contact-reduction", args.format) + render(R, args.format), EXIT_OK


def cmd_check(prob: Problem, args) -> tuple[str, int]:
    if not prob.candidates:
        raise UsageError("no candidates to check")
    J = prob.ideal(args.ideal)
    reports = [check_generator(c, J) for c in prob.candidates.values()]
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
    if args.format == "json":
        return render(reports, "json"), code
    return _header("check-report", args.format) + render(reports, "text"), code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edsym", description="Symmetries of exterior differential systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, formats=("text", "latex", "json")):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("file")
        sp.add_argument("--format", choices=formats, default="text")
        sp.set_defaults(func=func)
        return sp

    add("info", cmd_info, "chart, ranks and basis counts", ("text",))
    sp = add("close", cmd_close, "close an ideal under d")
    sp.add_argument("--ideal")
    sp = add("section", cmd_section, "section each generator and annul", ("text",))
    sp.add_argument("--ideal")
    sp = add("determine", cmd_determine, "determining equations")
    sp.add_argument("--ideal")
    sp.add_argument("--strategy", choices=("multipliers", "substitution"))
    sp.add_argument("--assume", action="append", metavar="NAME:VARS")
    sp.add_argument("--split", metavar="VARS")
    sp.add_argument("--simplify", action="store_true", help="forward-substitute even without --split")
    sp.add_argument("--raw", action="store_true", help="skip simplification")
    sp.add_argument("--no-prune", action="store_true")
    sp.add_argument("--symbolic-pivots", action="store_true")
    sp = add("contact", cmd_contact, "contact reduction F = v⌟γ")
    sp.add_argument("--form")
    sp = add("check", cmd_check, "certify candidate generators", ("text", "json"))
    sp.add_argument("--ideal")
    sp.add_argument("--candidates", metavar="FILE")
    return p


def run(argv: list[str] | None = None) -> tuple[str, str, int]:
    """Run the CLI; returns ``(stdout, stderr, exit code)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return "", "", int(exc.code or 0)
    try:
        prob = _load(args.file, getattr(args, "candidates", None))
        out, code = args.func(prob, args)
        return out, "", code
    except SyntaxDiagnostic as d:
        return "", f"{d}\n", EXIT_USAGE
    except (UsageError, KeyError, UnknownVariable, UnsectionedVariable, OSError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        return "", f"error: {msg}\n", EXIT_USAGE
    except (EliminationStall, NoTable, NoUnitContactCoefficient, OpenIdeal) as exc:
        return "", f"stall: {exc}\n", EXIT_STALL


def main(argv: list[str] | None = None) -> int:
    out, err, code = run(argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
