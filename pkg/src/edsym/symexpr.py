"""Exact symbolic scalars: rational functions over the Gaussian rationals.

An :class:`Expr` is always held in canonical form: an expanded numerator
polynomial over a denominator kept as a product of monic, primitive factors.
Atoms are chart variables (:class:`Var`) and formal functions with fixed
dependency lists (:class:`Fn`).  Partial derivatives of formal functions are
themselves atoms carrying a multi-index of derivative orders.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "GaussianRational",
    "Var",
    "Fn",
    "Expr",
    "ConjugationPairing",
    "AssumptionLedger",
    "NonPolynomial",
    "DegenerateSubstitution",
    "ZERO",
    "ONE",
    "I",
    "const",
    "var",
    "fn",
    "diff",
    "substitute",
    "canonicalize",
    "is_zero",
    "conjugate",
    "collect",
    "linear_coefficients",
]


class NonPolynomial(ValueError):
    """Raised by :func:`collect` when the input is not polynomial in the requested variables."""


class DegenerateSubstitution(ZeroDivisionError):
    """A substitution sent some denominator to zero."""


def _norm(q):
    if type(q) is Fraction and q.denominator == 1:
        return q.numerator
    return q


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, float) or isinstance(im, float):
            raise TypeError("floating-point coefficients are not supported")
        self.re = _norm(Fraction(re)) if not isinstance(re, int) else re
        self.im = _norm(Fraction(im)) if not isinstance(im, int) else im

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Rational)):
            return cls(value, 0)
        if isinstance(value, complex):
            raise TypeError("floating-point coefficients are not supported")
        raise TypeError(f"cannot coerce {value!r} to GaussianRational")

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return _gq(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return _gq(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        other = GaussianRational.coerce(other)
        if not self.im and not other.im:
            return _gq(self.re * other.re, 0)
        return _gq(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        if not other:
            raise ZeroDivisionError("division by zero constant")
        if not other.im:
            return _gq(Fraction(self.re) / other.re, Fraction(self.im) / other.re)
        n = Fraction(other.re * other.re + other.im * other.im)
        return _gq((self.re * other.re + self.im * other.im) / n,
                   (self.im * other.re - self.re * other.im) / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __neg__(self):
        return _gq(-self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def conjugate(self) -> "GaussianRational":
        return _gq(self.re, -self.im)

    @property
    def is_real(self) -> bool:
        return not self.im

    def sort_key(self):
        return (Fraction(self.re), Fraction(self.im))

    def denominators(self):
        return Fraction(self.re).denominator, Fraction(self.im).denominator

    def to_text(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}*i"
        sign = "-" if self.im < 0 else "+"
        mag = abs(self.im)
        im = "i" if mag == 1 else f"{mag}*i"
        return f"({self.re}{sign}{im})"

    def to_latex(self) -> str:
        def frac(q):
            q = Fraction(q)
            if q.denominator == 1:
                return str(q.numerator)
            sign = "-" if q < 0 else ""
            return f"{sign}\\frac{{{abs(q.numerator)}}}{{{q.denominator}}}"

        if not self.im:
            return frac(self.re)
        if not self.re:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{frac(self.im)} i"
        sign = "-" if self.im < 0 else "+"
        mag = abs(Fraction(self.im))
        im = "i" if mag == 1 else f"{frac(mag)} i"
        return f"\\left({frac(self.re)} {sign} {im}\\right)"

    def __repr__(self):
        return f"GaussianRational({self.to_text()})"


def _gq(re, im) -> GaussianRational:
    g = GaussianRational.__new__(GaussianRational)
    g.re = _norm(re)
    g.im = _norm(im)
    return g


_ONE_Q = _gq(1, 0)


# --------------------------------------------------------------------------
# atoms
# --------------------------------------------------------------------------

_intern_lock = threading.Lock()
_var_table: dict[str, "Var"] = {}


class Var:
    """A chart variable.  Interned by name."""

    __slots__ = ("name", "key", "_hash")

    def __new__(cls, name: str):
        found = _var_table.get(name)
        if found is not None:
            return found
        with _intern_lock:
            found = _var_table.get(name)
            if found is None:
                found = object.__new__(cls)
                found.name = name
                found.key = (0, name)
                found._hash = hash(found.key)
                _var_table[name] = found
            return found

    def __reduce__(self):
        return (Var, (self.name,))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def diff(self, x: str):
        return 1 if x == self.name else 0

    def depends_on(self, x: str) -> bool:
        return x == self.name

    def to_text(self) -> str:
        return self.name

    def to_latex(self) -> str:
        return _latex_name(self.name)

    def __repr__(self):
        return f"Var({self.name!r})"


class Fn:
    """A formal function of a fixed dependency list, possibly differentiated.

    ``orders`` is aligned with ``deps``; ``Fn('v^t', ('x', 't'), (1, 0))`` is
    the partial of ``v^t(x, t)`` with respect to ``x``.
    """

    __slots__ = ("name", "deps", "orders", "key", "_hash")

    def __init__(self, name: str, deps: Sequence[str] = (), orders: Sequence[int] | None = None):
        deps = tuple(deps)
        if len(set(deps)) != len(deps):
            raise ValueError(f"repeated dependency in {name}{deps}")
        if orders is None:
            orders = (0,) * len(deps)
        orders = tuple(int(o) for o in orders)
        if len(orders) != len(deps) or any(o < 0 for o in orders):
            raise ValueError("orders must be non-negative and aligned with deps")
        self.name = name
        self.deps = deps
        self.orders = orders
        self.key = (1, name, deps, orders)
        self._hash = hash(self.key)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Fn) and self.key == other.key

    def __reduce__(self):
        return (Fn, (self.name, self.deps, self.orders))

    @property
    def base(self) -> "Fn":
        if not any(self.orders):
            return self
        return Fn(self.name, self.deps)

    @property
    def order(self) -> int:
        return sum(self.orders)

    def derivative_vars(self) -> list[str]:
        out = []
        for d, o in zip(self.deps, self.orders):
            out.extend([d] * o)
        return out

    def depends_on(self, x: str) -> bool:
        return x in self.deps

    def diff(self, x: str):
        try:
            k = self.deps.index(x)
        except ValueError:
            return 0
        orders = list(self.orders)
        orders[k] += 1
        return Fn(self.name, self.deps, orders)

    def to_text(self) -> str:
        dv = self.derivative_vars()
        if not dv:
            return self.name
        if all(len(v) == 1 and v.isalpha() for v in dv):
            return f"{self.name}_,{''.join(dv)}"
        return f"{self.name}_{{,{','.join(dv)}}}"

    def to_latex(self) -> str:
        head = _latex_name(self.name)
        dv = self.derivative_vars()
        if not dv:
            return head
        return f"{head}_{{,{''.join(_latex_name(v) for v in dv)}}}"

    def __repr__(self):
        return f"Fn({self.to_text()}{self.deps})"


Atom = Union[Var, Fn]


def _latex_name(name: str) -> str:
    if "^" in name:
        head, _, sup = name.partition("^")
        return f"{_latex_name(head)}^{{{_latex_name(sup)}}}"
    if name.endswith("*"):
        return f"{_latex_name(name[:-1])}^{{*}}"
    if "_" in name:
        head, _, sub = name.partition("_")
        return f"{head}_{{{sub}}}"
    return name


# --------------------------------------------------------------------------
# sparse polynomials: dict[monomial, GaussianRational]
# a monomial is a tuple of (atom, exponent) sorted by atom.key
# --------------------------------------------------------------------------

_UNIT_MONO: tuple = ()


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for at, e in b:
        merged[at] = merged.get(at, 0) + e
    return tuple(sorted(merged.items(), key=lambda p: p[0].key))


def _mono_div(a: tuple, b: tuple):
    """a / b if b divides a, else None."""
    if not b:
        return a
    da = dict(a)
    for at, e in b:
        have = da.get(at, 0)
        if have < e:
            return None
        if have == e:
            del da[at]
        else:
            da[at] = have - e
    return tuple(sorted(da.items(), key=lambda p: p[0].key))


_SENTINEL = ((9,), 0)


def _lex_key(m: tuple):
    """Sort key whose minimum is the lexicographically leading monomial."""
    return tuple((at.key, -e) for at, e in m) + (_SENTINEL,)


def _p_add_into(acc: dict, p: dict, scale=None, mono=None):
    for m, c in p.items():
        if mono is not None:
            m = _mono_mul(m, mono)
        if scale is not None:
            c = c * scale
        prev = acc.get(m)
        if prev is None:
            acc[m] = c
        else:
            s = prev + c
            if s:
                acc[m] = s
            else:
                del acc[m]
    return acc


def _p_mul(a: dict, b: dict) -> dict:
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    for ma, ca in a.items():
        _p_add_into(out, b, ca, ma)
    return out


def _p_pow(p: dict, n: int) -> dict:
    result = {_UNIT_MONO: _ONE_Q}
    base = p
    while n:
        if n & 1:
            result = _p_mul(result, base)
        n >>= 1
        if n:
            base = _p_mul(base, base)
    return result


def _p_scale(p: dict, c) -> dict:
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def _p_lead(p: dict):
    return min(p, key=_lex_key)


def _p_divexact(p: dict, d: dict):
    """Exact quotient p/d or None when d does not divide p."""
    if len(d) == 1:
        (md, cd), = d.items()
        out = {}
        for m, c in p.items():
            q = _mono_div(m, md)
            if q is None:
                return None
            out[q] = c / cd
        return out
    rem = dict(p)
    quo: dict = {}
    lt_d = _p_lead(d)
    lc_d = d[lt_d]
    while rem:
        lt = _p_lead(rem)
        m = _mono_div(lt, lt_d)
        if m is None:
            return None
        c = rem[lt] / lc_d
        quo[m] = quo.get(m, 0) + c
        _p_add_into(rem, d, -c, m)
    return quo


def _mono_gcd(p: dict) -> tuple:
    it = iter(p)
    common = dict(next(it))
    for m in it:
        if not common:
            break
        dm = dict(m)
        for at in list(common):
            e = dm.get(at, 0)
            if e == 0:
                del common[at]
            elif e < common[at]:
                common[at] = e
    return tuple(sorted(common.items(), key=lambda p: p[0].key))


def _factor_key(f: tuple):
    return tuple((tuple((at.key, e) for at, e in m), c.sort_key()) for m, c in f)


def _freeze(p: dict) -> tuple:
    return tuple(sorted(p.items(), key=lambda mc: _lex_key(mc[0])))


def _poly_atoms(p) -> set:
    out = set()
    for m in p:
        for at, _ in m:
            out.add(at)
    return out


# --------------------------------------------------------------------------
# Expr
# --------------------------------------------------------------------------

Scalar = Union["Expr", int, Rational, GaussianRational]


class Expr:
    """Canonical rational function over the Gaussian rationals.

    ``num`` is a dict monomial -> coefficient; ``den`` is a sorted tuple of
    ``(factor, exponent)`` pairs where each factor is a frozen monic primitive
    polynomial.  Instances are immutable.
    """

    __slots__ = ("num", "den", "_hash", "_atoms")

    def __init__(self, num: dict | None = None, den: tuple = ()):
        self.num = num if num is not None else {}
        self.den = den if self.num else ()
        self._hash = None
        self._atoms = None

    # construction ------------------------------------------------------
    @staticmethod
    def constant(c) -> "Expr":
        c = GaussianRational.coerce(c)
        return Expr({_UNIT_MONO: c}) if c else Expr()

    @staticmethod
    def atom(at: Atom) -> "Expr":
        return Expr({((at, 1),): _ONE_Q})

    @staticmethod
    def lift(value) -> "Expr":
        if isinstance(value, Expr):
            return value
        if isinstance(value, (Var, Fn)):
            return Expr.atom(value)
        return Expr.constant(value)

    @staticmethod
    def _build(num: dict, factors: dict) -> "Expr":
        """Assemble from a numerator and a {frozen factor: exponent} map, cancelling."""
        if not num:
            return Expr()
        if factors:
            num, factors = _cancel(num, factors)
        den = tuple(sorted(((f, e) for f, e in factors.items() if e > 0),
                           key=lambda fe: _factor_key(fe[0])))
        return Expr(num, den)

    # predicates ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return not self.den and (not self.num or (len(self.num) == 1 and _UNIT_MONO in self.num))

    def constant_value(self) -> GaussianRational | None:
        if not self.num:
            return _gq(0, 0)
        if self.is_constant():
            return self.num[_UNIT_MONO]
        return None

    def is_monomial(self) -> bool:
        """Single term with no denominator (e.g. ``-3*w**2``)."""
        return not self.den and len(self.num) == 1

    def is_polynomial(self) -> bool:
        return not self.den

    def atoms(self) -> frozenset:
        if self._atoms is None:
            out = _poly_atoms(self.num)
            for f, _ in self.den:
                for m, _c in f:
                    for at, _e in m:
                        out.add(at)
            self._atoms = frozenset(out)
        return self._atoms

    def free_vars(self) -> set[str]:
        """Names of chart variables this expression depends on (including via Fn deps)."""
        out = set()
        for at in self.atoms():
            if isinstance(at, Var):
                out.add(at.name)
            else:
                out.update(at.deps)
        return out

    def depends_on(self, x: str) -> bool:
        return any(at.depends_on(x) for at in self.atoms())

    def fns(self) -> set[Fn]:
        return {at for at in self.atoms() if isinstance(at, Fn)}

    def denominators(self) -> list["Expr"]:
        return [Expr(dict(f)) for f, _ in self.den]

    def numerator(self) -> "Expr":
        return Expr(dict(self.num))

    def denominator(self) -> "Expr":
        out = {_UNIT_MONO: _ONE_Q}
        for f, e in self.den:
            out = _p_mul(out, _p_pow(dict(f), e))
        return Expr(out)

    def terms(self):
        """Iterate ``(coefficient, monomial Expr)`` pairs of the numerator."""
        for m, c in self.num.items():
            yield c, Expr({m: _ONE_Q})

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        other = Expr.lift(other)
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            num = _p_add_into(dict(self.num), other.num)
            if not self.den:
                return Expr(num)
            return Expr._build(num, dict(self.den))
        fa, fb = dict(self.den), dict(other.den)
        lcm = dict(fa)
        for f, e in fb.items():
            if lcm.get(f, 0) < e:
                lcm[f] = e
        na = _p_mul(self.num, _factor_product(lcm, fa))
        nb = _p_mul(other.num, _factor_product(lcm, fb))
        return Expr._build(_p_add_into(na, nb), lcm)

    __radd__ = __add__

    def __neg__(self):
        return Expr({m: -c for m, c in self.num.items()}, self.den)

    def __sub__(self, other):
        return self + (-Expr.lift(other))

    def __rsub__(self, other):
        return Expr.lift(other) - self

    def __mul__(self, other):
        other = Expr.lift(other)
        if not self.num or not other.num:
            return Expr()
        num = _p_mul(self.num, other.num)
        if not self.den and not other.den:
            return Expr(num)
        factors = dict(self.den)
        for f, e in other.den:
            factors[f] = factors.get(f, 0) + e
        return Expr._build(num, factors)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * Expr.lift(other).reciprocal()

    def __rtruediv__(self, other):
        return Expr.lift(other) * self.reciprocal()

    def reciprocal(self) -> "Expr":
        if not self.num:
            raise ZeroDivisionError("division by zero expression")
        if len(self.num) == 1 and _UNIT_MONO in self.num:
            num = {_UNIT_MONO: _ONE_Q / self.num[_UNIT_MONO]}
            factors: dict = {}
        else:
            content = _mono_gcd(self.num)
            rest = {_mono_div(m, content): c for m, c in self.num.items()}
            factors = {}
            for at, e in content:
                factors[((((at, 1),), _ONE_Q),)] = e
            lead = _p_lead(rest)
            lc = rest[lead]
            num = {_UNIT_MONO: _ONE_Q / lc}
            if len(rest) > 1:
                monic = _freeze(_p_scale(rest, _ONE_Q / lc))
                factors[monic] = factors.get(monic, 0) + 1
        for f, e in self.den:
            num = _p_mul(num, _p_pow(dict(f), e))
        return Expr._build(num, factors)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.reciprocal() ** (-n)
        if n == 0:
            return ONE
        num = _p_pow(self.num, n)
        if not self.den:
            return Expr(num)
        return Expr._build(num, {f: e * n for f, e in self.den})

    # comparison ------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Expr):
            if isinstance(other, (int, Rational, GaussianRational, Var, Fn)):
                other = Expr.lift(other)
            else:
                return NotImplemented
        if self.den == other.den:
            return self.num == other.num
        # a quotient may be stored with its denominator factored differently
        return not _p_add_into(_p_mul(self.num, other.denominator().num),
                               _p_mul(other.num, self.denominator().num), _gq(-1, 0))

    def __hash__(self):
        if self._hash is None:
            if self.den:
                self._hash = _modular_value(self.num, self.den)
            else:
                self._hash = hash(frozenset(self.num.items()))
        return self._hash

    def __bool__(self):
        return bool(self.num)

    # rendering ------------------------------------------------------------
    def sorted_terms(self, order: Mapping[str, int] | None = None):
        return sorted(self.num.items(), key=lambda mc: _display_key(mc[0], order))

    def _cleared(self):
        lcm = 1
        for c in self.num.values():
            for d in c.denominators():
                lcm = lcm * d // math.gcd(lcm, d)
        if lcm == 1:
            return self.num, 1
        return _p_scale(self.num, _gq(lcm, 0)), lcm

    def to_text(self, order: Mapping[str, int] | None = None) -> str:
        num, scale = self._cleared()
        text = _poly_text(sorted(num.items(), key=lambda mc: _display_key(mc[0], order)), order)
        if not self.den and scale == 1:
            return text
        if len(num) > 1 or (not num.get(_UNIT_MONO) and not _poly_is_term(num)):
            text = f"({text})"
        if not self.den:
            return f"{text}/{scale}"
        den = _den_text(self.den, order)
        if scale != 1:
            den = f"({scale}*{den.strip('()') if len(self.den) == 1 and len(self.den[0][0]) == 1 and self.den[0][1] == 1 else den})"
        return f"{text}/{den}"

    def to_latex(self, order: Mapping[str, int] | None = None) -> str:
        numd, scale = self._cleared()
        num = _poly_latex(sorted(numd.items(), key=lambda mc: _display_key(mc[0], order)), order)
        if not self.den and scale == 1:
            return num
        parts = [str(scale)] if scale != 1 else []
        for f, e in self.den:
            body = _poly_latex(sorted(f, key=lambda mc: _display_key(mc[0], order)), order)
            if len(f) > 1:
                body = f"\\left({body}\\right)"
            parts.append(body if e == 1 else f"{body}^{{{e}}}")
        return f"\\frac{{{num}}}{{{' '.join(parts)}}}"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Expr({self.to_text()})"


# Hashing quotients by their value at a pseudo-random point modulo a prime
# keeps hash consistent with equality whatever shape the denominator has.
_P = 2**64 - 59
_SQRT_M1 = next(pow(a, (_P - 1) // 4, _P) for a in range(2, 100)
                if pow(a, (_P - 1) // 2, _P) == _P - 1)


def _mod_q(c: GaussianRational) -> int:
    re, im = Fraction(c.re), Fraction(c.im)
    v = re.numerator * pow(re.denominator, -1, _P)
    if im:
        v += im.numerator * pow(im.denominator, -1, _P) * _SQRT_M1
    return v % _P


def _mod_poly(p, point) -> int:
    total = 0
    for m, c in p.items() if isinstance(p, dict) else p:
        v = _mod_q(c)
        for at, e in m:
            a = point.get(at)
            if a is None:
                a = point[at] = hash(at) % _P
            v = v * pow(a, e, _P) % _P
        total += v
    return total % _P


def _modular_value(num: dict, den: tuple) -> int:
    point: dict = {}
    d = 1
    for f, e in den:
        d = d * pow(_mod_poly(f, point), e, _P) % _P
    if not d:
        return 0
    return _mod_poly(num, point) * pow(d, -1, _P) % _P


def _poly_is_term(p: dict) -> bool:
    return len(p) == 1


def _factor_product(target: dict, have: dict) -> dict:
    out = {_UNIT_MONO: _ONE_Q}
    for f, e in target.items():
        k = e - have.get(f, 0)
        if k:
            out = _p_mul(out, _p_pow(dict(f), k))
    return out


def _cancel(num: dict, factors: dict):
    factors = dict(factors)
    for f, e in list(factors.items()):
        fp = dict(f)
        while e > 0:
            q = _p_divexact(num, fp)
            if q is None:
                break
            num = q
            e -= 1
        factors[f] = e
    return num, {f: e for f, e in factors.items() if e > 0}


def _display_key(m: tuple, order: Mapping[str, int] | None):
    """Terms group by formal-function part, then by chart monomial (degree, chart order)."""
    fpart = []
    vpart = []
    for at, e in m:
        if isinstance(at, Fn):
            fpart.append((at.name, _rank_tuple(at.deps, order), at.order,
                          tuple(-o for o in _orders_by_rank(at, order)), e))
        else:
            vpart.append((_var_rank(at.name, order), e))
    vpart.sort()
    deg = sum(e for _, e in vpart)
    return (0 if fpart else 1, tuple(sorted(fpart)), -deg, tuple((r, -e) for r, e in vpart))


def _var_rank(name, order):
    if order is not None and name in order:
        return (0, order[name], "")
    return (1, 0, name)


def _rank_tuple(deps, order):
    return tuple(_var_rank(d, order) for d in deps)


def _orders_by_rank(at: Fn, order):
    pairs = sorted(zip(at.deps, at.orders), key=lambda p: _var_rank(p[0], order))
    return [o for _, o in pairs]


def _mono_text(m: tuple, order) -> str:
    parts = []
    items = sorted(m, key=lambda p: (0, _var_rank(p[0].name, order)) if isinstance(p[0], Var)
                   else (1, _var_rank(p[0].name, order)))
    for at, e in items:
        s = at.to_text()
        if e != 1:
            s = f"{s}**{e}"
        parts.append(s)
    out = ""
    for p in parts:
        if out and out.endswith("*"):
            out += " *" + p
        elif out:
            out += "*" + p
        else:
            out = p
    return out


def _poly_text(items, order) -> str:
    if not items:
        return "0"
    out = []
    for k, (m, c) in enumerate(items):
        mono = _mono_text(m, order)
        if not mono:
            body = c.to_text()
            if body.startswith("-"):
                sign, body = "-", body[1:]
            else:
                sign = "+"
        elif c == 1:
            sign, body = "+", mono
        elif c == -1:
            sign, body = "-", mono
        else:
            ct = c.to_text()
            if ct.startswith("-") and (c.is_real or not c.re):
                sign, ct = "-", ct[1:]
            else:
                sign = "+"
            body = f"{ct}*{mono}"
        if k == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


def _den_text(den, order) -> str:
    parts = []
    for f, e in den:
        body = _poly_text(sorted(f, key=lambda mc: _display_key(mc[0], order)), order)
        if len(f) > 1:
            body = f"({body})"
        parts.append(body if e == 1 else f"{body}**{e}")
    if len(parts) == 1 and (len(den[0][0]) > 1 or den[0][1] == 1):
        return parts[0]
    return "(" + "*".join(parts) + ")"


def _mono_latex(m: tuple, order) -> str:
    items = sorted(m, key=lambda p: (0, _var_rank(p[0].name, order)) if isinstance(p[0], Var)
                   else (1, _var_rank(p[0].name, order)))
    parts = []
    for at, e in items:
        s = at.to_latex()
        if e != 1:
            s = f"{{{s}}}^{{{e}}}" if "^" in s or "_" in s else f"{s}^{{{e}}}"
        parts.append(s)
    return " ".join(parts)


def _poly_latex(items, order) -> str:
    if not items:
        return "0"
    out = []
    for k, (m, c) in enumerate(items):
        mono = _mono_latex(m, order)
        if not mono:
            body = c.to_latex()
            sign = "-" if body.startswith("-") else "+"
            body = body.lstrip("-")
        elif c == 1:
            sign, body = "+", mono
        elif c == -1:
            sign, body = "-", mono
        else:
            ct = c.to_latex()
            if ct.startswith("-"):
                sign, ct = "-", ct[1:]
            else:
                sign = "+"
            body = f"{ct} {mono}"
        if k == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


ZERO = Expr()
ONE = Expr.constant(1)
I = Expr.constant(_gq(0, 1))


def const(value, im=0) -> Expr:
    return Expr.constant(GaussianRational(value, im))


def var(name: str) -> Expr:
    return Expr.atom(Var(name))


def fn(name: str, deps: Sequence[str] = (), orders: Sequence[int] | None = None) -> Expr:
    return Expr.atom(Fn(name, deps, orders))


def _atom_diff(at: Atom, x: str) -> Expr | None:
    d = at.diff(x)
    if d == 0:
        return None
    if d == 1:
        return ONE
    return Expr.atom(d)


def _poly_diff(p: dict, x: str) -> dict:
    out: dict = {}
    for m, c in p.items():
        for k, (at, e) in enumerate(m):
            d = at.diff(x)
            if d == 0:
                continue
            rest = dict(m)
            if e == 1:
                del rest[at]
            else:
                rest[at] = e - 1
            coeff = c * e
            if d != 1:
                rest[d] = rest.get(d, 0) + 1
            mono = tuple(sorted(rest.items(), key=lambda p: p[0].key))
            prev = out.get(mono)
            s = coeff if prev is None else prev + coeff
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
    return out


def diff(e: Scalar, x: Union[str, Var, Expr], n: int = 1) -> Expr:
    """Partial derivative of ``e`` with respect to the chart variable ``x``."""
    e = Expr.lift(e)
    name = _var_name(x)
    for _ in range(n):
        if not e.num or not e.depends_on(name):
            return ZERO
        dnum = _poly_diff(e.num, name)
        if not e.den:
            e = Expr(dnum)
            continue
        result = Expr._build(dnum, dict(e.den)) if dnum else ZERO
        for f, k in e.den:
            df = _poly_diff(dict(f), name)
            if not df:
                continue
            factors = dict(e.den)
            factors[f] = factors[f] + 1
            term = _p_scale(_p_mul(e.num, df), _gq(-k, 0))
            result = result + Expr._build(term, factors)
        e = result
    return e


def _var_name(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, Var):
        return x.name
    if isinstance(x, Expr):
        atoms = x.atoms()
        if len(atoms) == 1 and x.is_monomial():
            (at,) = atoms
            if isinstance(at, Var) and x == Expr.atom(at):
                return at.name
    raise TypeError(f"{x!r} is not a chart variable")


def _derive(value: Expr, at: Fn) -> Expr:
    for v in at.derivative_vars():
        value = diff(value, v)
    return value


def substitute(e: Scalar, bindings: Mapping) -> Expr:
    """Simultaneously replace atoms by expressions and recanonicalize.

    A key that is an undifferentiated formal function also replaces all of its
    partial derivatives by the matching partials of the bound value.
    """
    e = Expr.lift(e)
    exact: dict = {}
    functional: dict = {}
    for k, v in bindings.items():
        at = _as_atom(k)
        v = Expr.lift(v)
        if at in exact:
            raise ValueError(f"duplicate binding for {at!r}")
        exact[at] = v
        if isinstance(at, Fn) and not any(at.orders):
            functional[(at.name, at.deps)] = v
    atoms = e.atoms()
    if not any(at in exact or (isinstance(at, Fn) and (at.name, at.deps) in functional)
               for at in atoms):
        return e
    cache: dict = {}

    def image(at):
        if at in cache:
            return cache[at]
        if at in exact:
            val = exact[at]
        elif isinstance(at, Fn) and (at.name, at.deps) in functional:
            val = _derive(functional[(at.name, at.deps)], at)
        else:
            val = Expr.atom(at)
        cache[at] = val
        return val

    def poly_image(p) -> Expr:
        total = ZERO
        for m, c in p:
            term = Expr.constant(c)
            for at, k in m:
                term = term * image(at) ** k
            total = total + term
        return total

    result = poly_image(e.num.items())
    for f, k in e.den:
        d = poly_image(f)
        if d.is_zero():
            raise DegenerateSubstitution(
                f"substitution sends denominator {Expr(dict(f)).to_text()} to zero")
        result = result / d ** k
    return result


def _as_atom(k) -> Atom:
    if isinstance(k, (Var, Fn)):
        return k
    if isinstance(k, str):
        return Var(k)
    if isinstance(k, Expr):
        atoms = k.atoms()
        if len(atoms) == 1:
            (at,) = atoms
            if k == Expr.atom(at):
                return at
    raise TypeError(f"substitution key {k!r} is not an atom")


def canonicalize(e: Scalar) -> Expr:
    """Rebuild ``e`` from scratch.  Expr values are kept canonical, so this is idempotent."""
    e = Expr.lift(e)
    num = {m: c for m, c in e.num.items() if c}
    return Expr._build(num, dict(e.den))


def is_zero(e: Scalar) -> bool:
    return Expr.lift(e).is_zero()


class ConjugationPairing:
    """Involutive renaming of chart variables, e.g. ``A <-> A*``."""

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        table: dict[str, str] = {}
        for a, b in pairs:
            for x, y in ((a, b), (b, a)):
                if table.get(x, y) != y:
                    raise ValueError(f"{x} is paired twice")
                table[x] = y
        self._table = table

    def __call__(self, name: str) -> str:
        return self._table.get(name, name)

    def pairs(self) -> list[tuple[str, str]]:
        seen = set()
        out = []
        for a, b in self._table.items():
            if a in seen or a == b:
                continue
            seen.update((a, b))
            out.append((a, b))
        return out

    def __bool__(self):
        return bool(self._table)

    def __eq__(self, other):
        return isinstance(other, ConjugationPairing) and self._table == other._table

    def __repr__(self):
        return f"ConjugationPairing({self.pairs()!r})"


def _conj_atom(at: Atom, p: ConjugationPairing) -> Atom:
    if isinstance(at, Var):
        return Var(p(at.name))
    return Fn(p(at.name), tuple(p(d) for d in at.deps), at.orders)


def _conj_poly(items, p) -> dict:
    out = {}
    for m, c in items:
        mono = tuple(sorted(((_conj_atom(at, p), e) for at, e in m), key=lambda q: q[0].key))
        out[mono] = c.conjugate()
    return out


def conjugate(e: Scalar, p: ConjugationPairing | None = None) -> Expr:
    """Complex conjugate: ``i -> -i`` and atoms renamed through the pairing."""
    e = Expr.lift(e)
    p = p or ConjugationPairing()
    num = _conj_poly(e.num.items(), p)
    factors = {}
    for f, k in e.den:
        g = _conj_poly(f, p)
        factors[_freeze(g)] = k
    result = Expr._build(num, {})
    for f, k in factors.items():
        result = result / Expr(dict(f)) ** k
    return result


def collect(e: Scalar, vars: Iterable[Union[str, Var]]) -> dict[Expr, Expr]:
    """Split ``e`` into ``{monomial in vars: coefficient free of vars}``."""
    e = Expr.lift(e)
    names = [_var_name(v) for v in vars]
    nameset = set(names)
    for f, _ in e.den:
        for m, _c in f:
            for at, _e in m:
                if isinstance(at, Var) and at.name in nameset:
                    raise NonPolynomial(f"{at.name} appears in a denominator")
    for at in e.atoms():
        if isinstance(at, Fn) and nameset.intersection(at.deps):
            raise NonPolynomial(f"{at.to_text()} depends on a collected variable")
    groups: dict[tuple, dict] = {}
    for m, c in e.num.items():
        inside = tuple((at, k) for at, k in m if isinstance(at, Var) and at.name in nameset)
        outside = tuple((at, k) for at, k in m if not (isinstance(at, Var) and at.name in nameset))
        groups.setdefault(inside, {})[outside] = c
    out = {}
    for inside, rest in groups.items():
        out[Expr({inside: _ONE_Q})] = Expr._build(rest, dict(e.den))
    return out


def linear_coefficients(e: Scalar, unknowns: Iterable[Atom]) -> tuple[dict[Atom, Expr], Expr]:
    """Write ``e = sum(coeff[a] * a) + rest`` for atoms that must appear linearly.

    Raises ValueError if an unknown appears nonlinearly or in a denominator.
    """
    e = Expr.lift(e)
    unknown = set(unknowns)
    for f, _ in e.den:
        if _poly_atoms(dict(f)) & unknown:
            raise ValueError("unknown appears in a denominator")
    coeffs: dict = {}
    rest: dict = {}
    for m, c in e.num.items():
        hits = [(at, k) for at, k in m if at in unknown]
        if not hits:
            rest[m] = c
            continue
        if len(hits) > 1 or hits[0][1] != 1:
            raise ValueError("unknowns appear nonlinearly")
        at = hits[0][0]
        mono = tuple(p for p in m if p[0] != at)
        coeffs.setdefault(at, {})[mono] = c
    den = dict(e.den)
    return ({at: Expr._build(p, den) for at, p in coeffs.items()}, Expr._build(rest, den))


class AssumptionLedger:
    """Ordered record of nonvanishing assumptions and dependency restrictions."""

    def __init__(self):
        self.nonzero: list[Expr] = []
        self.notes: list[str] = []

    def assume_nonzero(self, e: Expr):
        e = Expr.lift(e)
        if e.is_constant():
            return
        # store the monic/positive representative
        key = _monic(e)
        if key not in self.nonzero:
            self.nonzero.append(key)

    def note_denominators(self, e: Expr):
        for d in e.denominators():
            self.assume_nonzero(d)

    def note(self, text: str):
        if text not in self.notes:
            self.notes.append(text)

    def merge(self, other: "AssumptionLedger"):
        for e in other.nonzero:
            self.assume_nonzero(e)
        for n in other.notes:
            self.note(n)

    def lines(self, order=None) -> list[str]:
        return [f"{e.to_text(order)} != 0" for e in self.nonzero] + list(self.notes)

    def __bool__(self):
        return bool(self.nonzero or self.notes)


def _monic(e: Expr) -> Expr:
    if e.den or not e.num:
        return e
    lead = _p_lead(e.num)
    return Expr(_p_scale(e.num, _ONE_Q / e.num[lead]))
