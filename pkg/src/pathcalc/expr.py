"""A small expression language for cylinder integrands ``f(t, x)``.

Grammar (recursive descent)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom (('^' | '**') unary)?
    atom  := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Names are ``t``, ``x1 .. xd`` and ``x`` (alias of ``x1``); functions are
``exp``, ``log``, ``sin`` and ``cos``.  Expressions differentiate
symbolically, which is how cylinder functionals get analytic derivatives.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

from .errors import ConfigError, EvaluationError

FUNCS = {"exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos}
_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


class Node:
    """Expression tree node."""

    def diff(self, var: str) -> "Node":
        raise NotImplementedError

    def compile(self) -> Callable:
        """Return ``g(t, x)`` evaluating the node; x is a sequence of floats."""
        raise NotImplementedError

    def names(self) -> set[str]:
        return set()

    def is_const(self, value: float | None = None) -> bool:
        return False


@dataclass(frozen=True)
class Num(Node):
    value: float

    def diff(self, var):
        return ZERO

    def compile(self):
        v = self.value
        return lambda t, x: v

    def is_const(self, value=None):
        return value is None or self.value == value

    def __str__(self):
        return repr(self.value)


ZERO, ONE = Num(0.0), Num(1.0)


@dataclass(frozen=True)
class Var(Node):
    name: str

    def diff(self, var):
        return ONE if var == self.name else ZERO

    def compile(self):
        if self.name == "t":
            return lambda t, x: t
        i = int(self.name[1:]) - 1

        def get(t, x, i=i):
            try:
                return float(x[i])
            except IndexError:
                raise EvaluationError(f"variable x{i + 1} used on a {len(x)}-dimensional path") from None

        return get

    def names(self):
        return {self.name}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    a: Node

    def diff(self, var):
        return neg(self.a.diff(var))

    def compile(self):
        f = self.a.compile()
        return lambda t, x: -f(t, x)

    def names(self):
        return self.a.names()

    def __str__(self):
        return f"(-{self.a})"


@dataclass(frozen=True)
class Bin(Node):
    op: str
    a: Node
    b: Node

    def diff(self, var):
        a, b = self.a, self.b
        da, db = a.diff(var), b.diff(var)
        if self.op == "+":
            return add(da, db)
        if self.op == "-":
            return sub(da, db)
        if self.op == "*":
            return add(mul(da, b), mul(a, db))
        if self.op == "/":
            return div(sub(mul(da, b), mul(a, db)), power(b, Num(2.0)))
        # power
        if b.is_const():
            return mul(mul(b, power(a, Num(b.value - 1.0))), da)
        return mul(self, add(mul(db, call("log", a)), div(mul(b, da), a)))

    def compile(self):
        f, g = self.a.compile(), self.b.compile()
        op = self.op
        if op == "+":
            return lambda t, x: f(t, x) + g(t, x)
        if op == "-":
            return lambda t, x: f(t, x) - g(t, x)
        if op == "*":
            return lambda t, x: f(t, x) * g(t, x)
        if op == "/":
            def quot(t, x):
                d = g(t, x)
                if d == 0:
                    raise EvaluationError("division by zero")
                return f(t, x) / d
            return quot
        if self.b.is_const() and float(self.b.value).is_integer():
            k = int(self.b.value)

            def ipow(t, x):
                base = f(t, x)
                if base == 0 and k < 0:
                    raise EvaluationError("zero raised to a negative power")
                return base**k
            return ipow

        def fpow(t, x):
            try:
                return math.pow(f(t, x), g(t, x))
            except (ValueError, OverflowError, ZeroDivisionError) as exc:
                raise EvaluationError(f"power: {exc}") from None
        return fpow

    def names(self):
        return self.a.names() | self.b.names()

    def __str__(self):
        return f"({self.a} {self.op} {self.b})"


@dataclass(frozen=True)
class Call(Node):
    fn: str
    a: Node

    def diff(self, var):
        da = self.a.diff(var)
        if self.fn == "exp":
            return mul(self, da)
        if self.fn == "log":
            return div(da, self.a)
        if self.fn == "sin":
            return mul(call("cos", self.a), da)
        return neg(mul(call("sin", self.a), da))

    def compile(self):
        f, fn, name = self.a.compile(), FUNCS[self.fn], self.fn

        def apply(t, x):
            try:
                return fn(f(t, x))
            except (ValueError, OverflowError) as exc:
                raise EvaluationError(f"{name}: {exc}") from None
        return apply

    def names(self):
        return self.a.names()

    def __str__(self):
        return f"{self.fn}({self.a})"


# simplifying constructors; they keep derivative trees small


def neg(a: Node) -> Node:
    if a.is_const():
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def add(a: Node, b: Node) -> Node:
    if a.is_const() and b.is_const():
        return Num(a.value + b.value)
    if a.is_const(0.0):
        return b
    if b.is_const(0.0):
        return a
    return Bin("+", a, b)


def sub(a: Node, b: Node) -> Node:
    if a.is_const() and b.is_const():
        return Num(a.value - b.value)
    if b.is_const(0.0):
        return a
    if a.is_const(0.0):
        return neg(b)
    return Bin("-", a, b)


def mul(a: Node, b: Node) -> Node:
    if a.is_const() and b.is_const():
        return Num(a.value * b.value)
    if a.is_const(0.0) or b.is_const(0.0):
        return ZERO
    if a.is_const(1.0):
        return b
    if b.is_const(1.0):
        return a
    return Bin("*", a, b)


def div(a: Node, b: Node) -> Node:
    if b.is_const(1.0):
        return a
    if a.is_const(0.0):
        return ZERO
    return Bin("/", a, b)


def power(a: Node, b: Node) -> Node:
    if b.is_const(0.0):
        return ONE
    if b.is_const(1.0):
        return a
    if a.is_const() and b.is_const():
        return Num(a.value**b.value)
    return Bin("^", a, b)


def call(fn: str, a: Node) -> Node:
    return Call(fn, a)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise ConfigError(f"unexpected character {text[pos:].strip()[0]!r} in expression {text!r}")
            num, name, op = m.groups()
            self.toks.append(("num", num) if num else ("name", name) if name else ("op", op))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", "")

    def take(self, value: str | None = None):
        tok = self.peek()
        if value is not None and tok[1] != value:
            raise ConfigError(f"expected {value!r} in expression {self.text!r}, found {tok[1] or 'end'!r}")
        self.i += 1
        return tok

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            raise ConfigError(f"trailing input {self.peek()[1]!r} in expression {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return neg(self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() in (("op", "^"), ("op", "**")):
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCS:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return Call(val, arg)
            if val == "t":
                return Var("t")
            if val == "x":
                return Var("x1")
            if re.fullmatch(r"x[1-9]\d*", val):
                return Var(val)
            raise ConfigError(f"unknown name {val!r} in expression {self.text!r}")
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ConfigError(f"unexpected {val or 'end of input'!r} in expression {self.text!r}")


def parse(text: str) -> Node:
    """Parse an expression; raises ConfigError on malformed input."""
    if not text or not text.strip():
        raise ConfigError("empty expression")
    return _Parser(text).parse()


def max_index(node: Node) -> int:
    """Largest coordinate index referenced (0 when only t appears)."""
    idx = [int(n[1:]) for n in node.names() if n != "t"]
    return max(idx, default=0)
