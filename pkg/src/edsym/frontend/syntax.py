"""Problem-file syntax: lexer, AST, recursive-descent parser and printer.

A problem file starts with a version header and is a sequence of
keyword-led statements::

    eds 1
    independent x, t
    dependent u
    prolonged w
    form alpha = du^dt - w*dx^dt
    form beta = dw^dt + du^dx
    ideal I = alpha, beta

Whitespace (including newlines) is insignificant and ``#`` starts a comment.
A ``*`` written directly after a name and not followed by an operand
(a name, number or ``(``) belongs to the name, so ``A*`` is the conjugate
partner of ``A`` while ``2*A*B`` is a product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

__all__ = [
    "SyntaxDiagnostic",
    "Token",
    "tokenize",
    "parse_problem",
    "print_problem",
    "print_expr",
    "KEYWORDS",
]

VERSION = 1

KEYWORDS = frozenset({
    "eds", "independent", "dependent", "prolonged", "conjugate", "function", "form",
    "ideal", "assume", "candidate", "strategy", "split", "leading", "contact", "pivot",
    "none", "diff", "simplify",
})

_ROLES = ("independent", "dependent", "prolonged")
_OPERATORS = ("<->", "**", "+", "-", "*", "/", "^", "(", ")", ",", ":", "=", "{", "}", ";")


class SyntaxDiagnostic(Exception):
    """Lex, parse or resolution error with a source position."""

    def __init__(self, kind: str, message: str, line: int, col: int,
                 expected: tuple[str, ...] = (), length: int = 1):
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        self.length = length
        text = f"{line}:{col}: {kind} error: {message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        super().__init__(text)


@dataclass(frozen=True)
class Token:
    kind: str          # NAME, INT, OP, KW, EOF
    text: str
    line: int
    col: int


def _operand_start(ch: str) -> bool:
    return ch.isalnum() or ch in "_("


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j < n and text[j] == "*" and not (j + 1 < n and text[j + 1] == "*"):
                k = j + 1
                while k < n and text[k] in " \t":
                    k += 1
                if k >= n or not _operand_start(text[k]):
                    j += 1
            word = text[i:j]
            kind = "KW" if word in KEYWORDS else "NAME"
            out.append(Token(kind, word, line, col))
            advance(j - i)
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(Token("INT", text[i:j], line, col))
            advance(j - i)
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                out.append(Token("OP", op, line, col))
                advance(len(op))
                break
        else:
            raise SyntaxDiagnostic("lex", f"unexpected character {ch!r}", line, col)
    out.append(Token("EOF", "", line, col))
    return out


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Span:
    line: int
    col: int


def _span(tok: Token) -> Span:
    return Span(tok.line, tok.col)


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Num(Node):
    value: int
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Imag(Node):
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Name(Node):
    id: str
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: tuple[str, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Differential(Node):
    arg: Node
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Derivative(Node):
    arg: Node
    var: str
    times: int = 1
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Neg(Node):
    arg: Node
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BinOp(Node):
    op: str           # + - * / ^
    left: Node
    right: Node
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Power(Node):
    base: Node
    exp: int
    span: Span | None = field(default=None, compare=False)


# statements

@dataclass(frozen=True)
class RoleDecl(Node):
    role: str
    names: tuple[str, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ConjugateDecl(Node):
    left: str
    right: str
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FunctionDecl(Node):
    name: str
    deps: tuple[str, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FormDef(Node):
    name: str
    expr: Node
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class IdealDef(Node):
    name: str
    members: tuple[str, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Assume(Node):
    var: str
    deps: tuple[str, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CandidateDef(Node):
    name: str
    components: tuple[tuple[str, Node], ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Directive(Node):
    """``strategy``, ``split``, ``simplify``, ``leading`` or ``contact``."""

    kind: str
    args: tuple
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ProblemAST(Node):
    version: int
    statements: tuple[Node, ...]


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def error(self, message: str, expected=()):
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        raise SyntaxDiagnostic("parse", f"{message}; found {found}", t.line, t.col, expected,
                               max(1, len(t.text)))

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "OP" and self.tok.text in ops

    def take(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            self.error(f"expected {op!r}", (repr(op),))
        return self.take()

    def expect_kw(self, kw: str) -> Token:
        if not self.at("KW", kw):
            self.error(f"expected {kw!r}", (repr(kw),))
        return self.take()

    def expect_name(self, what: str = "name") -> Token:
        if not self.at("NAME"):
            self.error(f"expected {what}", ("name",))
        return self.take()

    def name_list(self) -> tuple[str, ...]:
        names = [self.expect_name().text]
        while self.at_op(","):
            self.take()
            names.append(self.expect_name().text)
        return tuple(names)

    # statements -----------------------------------------------------------

    def problem(self) -> ProblemAST:
        self.expect_kw("eds")
        if not self.at("INT"):
            self.error("expected a format version", ("integer",))
        version = int(self.take().text)
        if version != VERSION:
            t = self.toks[self.pos - 1]
            raise SyntaxDiagnostic("parse", f"unsupported format version {version}", t.line, t.col)
        stmts = []
        while not self.at("EOF"):
            stmts.append(self.statement())
            while self.at_op(";"):
                self.take()
        return ProblemAST(version, tuple(stmts))

    _STARTS = ("independent", "dependent", "prolonged", "conjugate", "function", "form",
               "ideal", "assume", "candidate", "strategy", "split", "leading", "contact", "simplify")

    def statement(self) -> Node:
        t = self.tok
        if t.kind != "KW" or t.text not in self._STARTS:
            self.error("expected a statement", tuple(repr(k) for k in self._STARTS))
        kw = self.take().text
        sp = _span(t)
        if kw in _ROLES:
            return RoleDecl(kw, self.name_list(), sp)
        if kw == "conjugate":
            a = self.expect_name().text
            self.expect_op("<->")
            return ConjugateDecl(a, self.expect_name().text, sp)
        if kw == "function":
            name = self.expect_name("function name").text
            self.expect_op("(")
            deps = () if self.at_op(")") else self.name_list()
            self.expect_op(")")
            return FunctionDecl(name, deps, sp)
        if kw == "form":
            name = self.expect_name("form name").text
            self.expect_op("=")
            return FormDef(name, self.expr(), sp)
        if kw == "ideal":
            name = self.expect_name("ideal name").text
            self.expect_op("=")
            return IdealDef(name, self.name_list(), sp)
        if kw == "assume":
            v = self.expect_name("variable").text
            self.expect_op(":")
            deps = () if not self.at("NAME") else self.name_list()
            return Assume(v, deps, sp)
        if kw == "candidate":
            name = self.expect_name("candidate name").text
            self.expect_op("{")
            comps = []
            while not self.at_op("}"):
                v = self.expect_name("variable").text
                self.expect_op(":")
                comps.append((v, self.expr()))
                if not self.at_op(","):
                    break
                self.take()
            self.expect_op("}")
            return CandidateDef(name, tuple(comps), sp)
        if kw == "strategy":
            return Directive("strategy", (self.expect_name("strategy").text,), sp)
        if kw == "split":
            return Directive("split", self.name_list(), sp)
        if kw == "simplify":
            return Directive("simplify", (), sp)
        if kw == "leading":
            gen = self.expect_name("generator name").text
            self.expect_op(":")
            if self.at("KW", "none"):
                self.take()
                return Directive("leading", (gen, None), sp)
            mono = [self.expect_name("differential").text]
            while self.at_op("^"):
                self.take()
                mono.append(self.expect_name("differential").text)
            return Directive("leading", (gen, tuple(mono)), sp)
        # contact
        form = self.expect_name("form name").text
        pivot = None
        if self.at("KW", "pivot"):
            self.take()
            pivot = self.expect_name("variable").text
        return Directive("contact", (form, pivot), sp)

    # expressions ----------------------------------------------------------

    _EXPR_START = ("name", "integer", "'i'", "'d'", "'diff'", "'('", "'-'")

    def expr(self) -> Node:
        node = self.term()
        while self.at_op("+", "-"):
            t = self.take()
            node = BinOp(t.text, node, self.term(), _span(t))
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at_op("*", "/"):
            t = self.take()
            node = BinOp(t.text, node, self.unary(), _span(t))
        return node

    def unary(self) -> Node:
        if self.at_op("-"):
            t = self.take()
            return Neg(self.unary(), _span(t))
        return self.wedge()

    def wedge(self) -> Node:
        node = self.power()
        while self.at_op("^"):
            t = self.take()
            node = BinOp("^", node, self.power(), _span(t))
        return node

    def power(self) -> Node:
        base = self.atom()
        if self.at_op("**"):
            t = self.take()
            sign = 1
            if self.at_op("-"):
                self.take()
                sign = -1
            if not self.at("INT"):
                self.error("expected an integer exponent", ("integer",))
            return Power(base, sign * int(self.take().text), _span(t))
        return base

    def atom(self) -> Node:
        t = self.tok
        sp = _span(t)
        if t.kind == "INT":
            self.take()
            return Num(int(t.text), sp)
        if t.kind == "OP" and t.text == "(":
            self.take()
            node = self.expr()
            self.expect_op(")")
            return node
        if t.kind == "KW" and t.text == "diff":
            self.take()
            self.expect_op("(")
            arg = self.expr()
            self.expect_op(",")
            v = self.expect_name("variable").text
            times = 1
            if self.at_op(","):
                self.take()
                if not self.at("INT"):
                    self.error("expected a derivative order", ("integer",))
                times = int(self.take().text)
            self.expect_op(")")
            return Derivative(arg, v, times, sp)
        if t.kind == "NAME":
            self.take()
            if t.text == "i":
                return Imag(sp)
            if t.text == "d" and (self.at("NAME") or self.at_op("(")):
                if self.at_op("("):
                    self.take()
                    node = self.expr()
                    self.expect_op(")")
                    return Differential(node, sp)
                n = self.take()
                return Differential(Name(n.text, _span(n)), sp)
            if self.at_op("(") and self.toks[self.pos + 1].kind == "NAME":
                # function application with its dependency list
                save = self.pos
                self.take()
                args = self.name_list()
                if self.at_op(")"):
                    self.take()
                    return Call(t.text, args, sp)
                self.pos = save
            return Name(t.text, sp)
        self.error("expected an expression", self._EXPR_START)


def parse_problem(text: str) -> ProblemAST:
    """Parse problem-file text into an AST; raises :class:`SyntaxDiagnostic`."""
    return _Parser(tokenize(text)).problem()


def parse_expr(text: str) -> Node:
    p = _Parser(tokenize(text))
    node = p.expr()
    if not p.at("EOF"):
        p.error("unexpected trailing input", ("end of input",))
    return node


# --------------------------------------------------------------------------
# printer
# --------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "**": 5}


def print_expr(node: Node, ctx: int = 0) -> str:
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Call):
        return f"{node.func}({', '.join(node.args)})"
    if isinstance(node, Differential):
        if isinstance(node.arg, Name):
            return f"d {node.arg.id}"
        return f"d({print_expr(node.arg)})"
    if isinstance(node, Derivative):
        extra = f", {node.times}" if node.times != 1 else ""
        return f"diff({print_expr(node.arg)}, {node.var}{extra})"
    if isinstance(node, Power):
        base = print_expr(node.base, 6)
        # keep a starred name's own star apart from the power operator
        s = f"{base} **{node.exp}" if base.endswith("*") else f"{base}**{node.exp}"
        return f"({s})" if ctx > 5 else s
    if isinstance(node, Neg):
        s = "-" + print_expr(node.arg, _PREC["neg"])
        return f"({s})" if ctx > _PREC["neg"] else s
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = print_expr(node.left, p)
        right = print_expr(node.right, p + 1)
        sep = "^" if node.op == "^" else f" {node.op} "
        s = f"{left}{sep}{right}"
        return f"({s})" if ctx > p else s
    raise TypeError(f"cannot print {node!r}")


def _stmt_text(s: Node) -> str:
    if isinstance(s, RoleDecl):
        return f"{s.role} {', '.join(s.names)}"
    if isinstance(s, ConjugateDecl):
        return f"conjugate {s.left} <-> {s.right}"
    if isinstance(s, FunctionDecl):
        return f"function {s.name}({', '.join(s.deps)})"
    if isinstance(s, FormDef):
        return f"form {s.name} = {print_expr(s.expr)}"
    if isinstance(s, IdealDef):
        return f"ideal {s.name} = {', '.join(s.members)}"
    if isinstance(s, Assume):
        return f"assume {s.var}: {', '.join(s.deps)}".rstrip()
    if isinstance(s, CandidateDef):
        body = ", ".join(f"{v}: {print_expr(e)}" for v, e in s.components)
        return f"candidate {s.name} {{ {body} }}" if body else f"candidate {s.name} {{ }}"
    if isinstance(s, Directive):
        if s.kind == "strategy":
            return f"strategy {s.args[0]}"
        if s.kind == "split":
            return f"split {', '.join(s.args)}"
        if s.kind == "simplify":
            return "simplify"
        if s.kind == "leading":
            gen, mono = s.args
            return f"leading {gen}: " + ("none" if mono is None else "^".join(mono))
        form, pivot = s.args
        return f"contact {form}" + (f" pivot {pivot}" if pivot else "")
    raise TypeError(f"cannot print {s!r}")


def print_problem(ast: ProblemAST) -> str:
    lines = [f"eds {ast.version}"]
    lines.extend(_stmt_text(s) for s in ast.statements)
    return "\n".join(lines) + "\n"


def iter_names(node: Node) -> Iterator[Name]:
    if isinstance(node, Name):
        yield node
    for attr in ("arg", "left", "right", "base"):
        child = getattr(node, attr, None)
        if isinstance(child, Node):
            yield from iter_names(child)
