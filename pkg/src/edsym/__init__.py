"""Exact exterior calculus and isovector symmetry analysis."""

from .eds import Ideal, close, contact_forms, equation_form, member, reduce_mod
from .extalg import Chart, Form, VectorField, annul, contract, ext_d, lie, section, wedge
from .isovector import (
    contact_reduce,
    determine_multipliers,
    determine_substitution,
    generic_vector,
    split_and_simplify,
)
from .symexpr import Expr, Fn, Var, const, diff, fn, substitute, var
from .verify import CandidateGenerator, check_determining, check_generator

__version__ = "0.1.0"

__all__ = [
    "Chart", "Form", "VectorField", "wedge", "ext_d", "contract", "lie", "section", "annul",
    "Ideal", "close", "member", "reduce_mod", "contact_forms", "equation_form",
    "generic_vector", "determine_multipliers", "determine_substitution", "contact_reduce",
    "split_and_simplify", "CandidateGenerator", "check_generator", "check_determining",
    "Expr", "Var", "Fn", "const", "var", "fn", "diff", "substitute",
]
