"""Problem files, renderings and the command-line tool."""

from .build import Problem, build_problem, load_problem
from .emit import SCHEMAS, emit, render, to_json
from .syntax import SyntaxDiagnostic, parse_problem, print_problem

__all__ = [
    "Problem",
    "build_problem",
    "load_problem",
    "parse_problem",
    "print_problem",
    "SyntaxDiagnostic",
    "emit",
    "render",
    "to_json",
    "SCHEMAS",
]
