"""Small arithmetic expression language for user-supplied wave speeds.

Grammar (LL(1), whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := base ('^' factor)?
    base   := number | VAR | func '(' expr ')' | '(' expr ')'
    func   := 'exp' | 'log'

``^`` is right-associative and binds tighter than unary minus, so
``-theta^2`` is ``-(theta^2)`` and ``2^-1`` is ``0.5``.  ``VAR`` is ``theta``
by default; profile expressions use ``x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ExpressionEvalError, ExpressionSyntaxError, UnknownIdentifier

FUNCTIONS = ("exp", "log")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "theta"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Const, Var, Neg, Binary, Call]

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^()])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.lastgroup is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(
                f"unexpected character {text[bad]!r}", _byte_offset(text, bad), text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", len(text.encode("utf-8"))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, variable: str):
        self.text = text
        self.variable = variable
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", off, self.text)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r}", off, self.text)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Binary("^", base, self.factor())
        return base

    def base(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val == self.variable:
                return Var(val)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise UnknownIdentifier(val, off, self.text)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExpressionSyntaxError(f"expected operand, found {found}", off, self.text)


def parse_expr(text: str, variable: str = "theta") -> Node:
    """Parse ``text`` into an AST over the single free variable ``variable``."""
    return _Parser(text, variable).parse()


def parse_speed_expr(text: str) -> Node:
    return parse_expr(text, "theta")


def evaluate(node: Node, value):
    """Evaluate ``node`` at ``value`` (scalar or ndarray), elementwise.

    Raises ExpressionEvalError on division by zero or log of a non-positive
    argument anywhere in the input.
    """
    match node:
        case Const(v):
            return v if np.ndim(value) == 0 else np.full(np.shape(value), v)
        case Var():
            return np.asarray(value, dtype=float) if np.ndim(value) else float(value)
        case Neg(arg):
            return -evaluate(arg, value)
        case Call("exp", arg):
            return np.exp(evaluate(arg, value))
        case Call("log", arg):
            a = evaluate(arg, value)
            if np.any(np.asarray(a) <= 0):
                raise ExpressionEvalError("log of a non-positive value")
            return np.log(a)
        case Binary(op, left, right):
            a = evaluate(left, value)
            b = evaluate(right, value)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                if np.any(np.asarray(b) == 0):
                    raise ExpressionEvalError("division by zero")
                return a / b
            with np.errstate(invalid="ignore", divide="ignore"):
                out = np.power(a, b) if np.ndim(a) or np.ndim(b) else _scalar_pow(a, b)
            if not np.all(np.isfinite(out)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b)):
                raise ExpressionEvalError("power undefined for these arguments")
            return out
    raise TypeError(f"not an expression node: {node!r}")


def _scalar_pow(a: float, b: float) -> float:
    try:
        out = a ** b
    except ZeroDivisionError:
        return float("inf")
    if isinstance(out, complex):
        return float("nan")
    return out


def _has_var(node: Node) -> bool:
    match node:
        case Var():
            return True
        case Const():
            return False
        case Neg(arg) | Call(_, arg):
            return _has_var(arg)
        case Binary(_, left, right):
            return _has_var(left) or _has_var(right)
    raise TypeError(node)


# Builders that fold literal arithmetic and drop 0/1 identities.

def _add(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if a == Const(0.0):
        return b
    if b == Const(0.0):
        return a
    return Binary("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if b == Const(0.0):
        return a
    if a == Const(0.0):
        return _neg(b)
    return Binary("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if a == Const(0.0) or b == Const(0.0):
        return Const(0.0)
    if a == Const(1.0):
        return b
    if b == Const(1.0):
        return a
    return Binary("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    if b == Const(1.0):
        return a
    if a == Const(0.0):
        return Const(0.0)
    return Binary("/", a, b)


def _pow(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        v = _scalar_pow(a.value, b.value)
        if np.isfinite(v):
            return Const(float(v))
    if b == Const(1.0):
        return a
    if b == Const(0.0):
        return Const(1.0)
    return Binary("^", a, b)


def _neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def derive(node: Node) -> Node:
    """Symbolic derivative with respect to the free variable."""
    match node:
        case Const():
            return Const(0.0)
        case Var():
            return Const(1.0)
        case Neg(arg):
            return _neg(derive(arg))
        case Call("exp", arg):
            return _mul(node, derive(arg))
        case Call("log", arg):
            return _div(derive(arg), arg)
        case Binary("+", f, g):
            return _add(derive(f), derive(g))
        case Binary("-", f, g):
            return _sub(derive(f), derive(g))
        case Binary("*", f, g):
            return _add(_mul(derive(f), g), _mul(f, derive(g)))
        case Binary("/", f, g):
            return _div(_sub(_mul(derive(f), g), _mul(f, derive(g))), _pow(g, Const(2.0)))
        case Binary("^", f, g):
            if not _has_var(g):
                # d f^g = g f^(g-1) f'
                return _mul(_mul(g, _pow(f, _sub(g, Const(1.0)))), derive(f))
            # d f^g = f^g (g' log f + g f'/f)
            return _mul(node, _add(_mul(derive(g), Call("log", f)),
                                   _div(_mul(g, derive(f)), f)))
    raise TypeError(f"not an expression node: {node!r}")


def derive_speed_expr(node: Node) -> Node:
    return derive(node)


def to_text(node: Node) -> str:
    """Fully parenthesised rendering; re-parses to an equivalent AST."""
    match node:
        case Const(v):
            return repr(v) if v >= 0 else f"(0-{-v!r})"
        case Var(name):
            return name
        case Neg(arg):
            return f"(-{to_text(arg)})"
        case Call(func, arg):
            return f"{func}({to_text(arg)})"
        case Binary(op, left, right):
            return f"({to_text(left)}{op}{to_text(right)})"
    raise TypeError(node)
