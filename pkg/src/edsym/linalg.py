"""Gauss-Jordan elimination over the symbolic coefficient field.

A row is a mapping ``unknown -> coefficient`` plus a constant term; it stands
for the equation ``sum(coeff * unknown) + const == 0``.  Unknowns are any
hashable labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .symexpr import AssumptionLedger, Expr, Var, ZERO

CONSTANT, MONOMIAL, SYMBOLIC = 0, 1, 2


class EliminationStall(RuntimeError):
    """No admissible pivot remains for some unknown."""

    def __init__(self, unknown, coefficient: Expr):
        self.unknown = unknown
        self.coefficient = coefficient
        super().__init__(f"no admissible pivot for {unknown!r}; best coefficient is {coefficient}")


@dataclass
class Row:
    coeffs: dict
    const: Expr = ZERO

    def is_trivial(self) -> bool:
        return not self.coeffs and self.const.is_zero()

    def scale(self, e: Expr) -> "Row":
        return Row({u: c * e for u, c in self.coeffs.items()}, self.const * e)

    def axpy(self, a: Expr, other: "Row") -> "Row":
        """self - a*other"""
        coeffs = dict(self.coeffs)
        for u, c in other.coeffs.items():
            v = coeffs.get(u, ZERO) - a * c
            if v.is_zero():
                coeffs.pop(u, None)
            else:
                coeffs[u] = v
        return Row(coeffs, self.const - a * other.const)


def pivot_rank(c: Expr) -> int:
    """Constants, then Laurent monomials in chart variables (such as ``4*u/r``)."""
    if c.is_constant():
        return CONSTANT
    if (len(c.num) == 1 and all(isinstance(at, Var) for at in c.atoms())
            and all(len(f) == 1 for f, _ in c.den)):
        return MONOMIAL
    return SYMBOLIC


@dataclass
class Elimination:
    pivots: list = field(default_factory=list)        # [(unknown, Row normalised to coeff 1)]
    residual: list = field(default_factory=list)      # Rows with no unknowns left
    residual_sources: list = field(default_factory=list)
    free: list = field(default_factory=list)
    ledger: AssumptionLedger = field(default_factory=AssumptionLedger)

    def solution(self) -> dict:
        """Particular solution with free unknowns set to zero."""
        out = {u: -row.const for u, row in self.pivots}
        for u in self.free:
            out[u] = ZERO
        return out

    @property
    def consistent(self) -> bool:
        return all(r.const.is_zero() for r in self.residual)


def eliminate(rows: Sequence[Row], unknowns: Iterable[Hashable], *, max_rank: int = SYMBOLIC,
              ledger: AssumptionLedger | None = None) -> Elimination:
    """Eliminate ``unknowns`` from ``rows``.

    Pivots are chosen globally: constant coefficients first, then monomials in
    chart variables, then (only if ``max_rank`` allows) general expressions.
    Every non-constant pivot is recorded as a nonvanishing assumption.
    """
    order = {u: k for k, u in enumerate(unknowns)}
    work = [Row(dict(r.coeffs), r.const) for r in rows]
    sources = list(range(len(work)))
    live = [True] * len(work)
    result = Elimination(ledger=ledger if ledger is not None else AssumptionLedger())
    remaining = set(order)
    while remaining:
        best = None
        for ri, row in enumerate(work):
            if not live[ri]:
                continue
            for u, c in row.coeffs.items():
                if u not in remaining:
                    continue
                key = (pivot_rank(c), len(row.coeffs), order[u], ri)
                if best is None or key < best[0]:
                    best = (key, ri, u)
        if best is None:
            break
        (rank, *_), ri, u = best
        pivot = work[ri].coeffs[u]
        if rank > max_rank:
            raise EliminationStall(u, pivot)
        if rank != CONSTANT:
            result.ledger.assume_nonzero(pivot)
        prow = work[ri].scale(pivot.reciprocal())
        prow.coeffs[u] = Expr.constant(1)
        live[ri] = False
        for rj, row in enumerate(work):
            if rj == ri:
                continue
            a = row.coeffs.get(u)
            if a is not None:
                work[rj] = row.axpy(a, prow)
                work[rj].coeffs.pop(u, None)
        for k, (pu, prow_old) in enumerate(result.pivots):
            a = prow_old.coeffs.get(u)
            if a is not None:
                updated = prow_old.axpy(a, prow)
                updated.coeffs.pop(u, None)
                result.pivots[k] = (pu, updated)
        result.pivots.append((u, prow))
        remaining.discard(u)
    for ri, row in enumerate(work):
        if live[ri]:
            result.residual.append(row)
            result.residual_sources.append(sources[ri])
    pivoted = {u for u, _ in result.pivots}
    result.free = [u for u in order if u not in pivoted]
    return result


def solve_combination(target: dict, basis: Sequence[dict]):
    """Find field coefficients c_k with target = sum c_k basis_k, or None.

    Vectors are dicts ``key -> Expr``.
    """
    keys = set(target)
    for b in basis:
        keys.update(b)
    rows = []
    for key in sorted(keys, key=repr):
        coeffs = {k: b[key] for k, b in enumerate(basis) if key in b and not b[key].is_zero()}
        rows.append(Row(coeffs, -target.get(key, ZERO)))
    el = eliminate(rows, range(len(basis)))
    if not el.consistent:
        return None
    sol = el.solution()
    return [sol.get(k, ZERO) for k in range(len(basis))]
