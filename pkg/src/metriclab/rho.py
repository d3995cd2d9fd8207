"""Recursive-descent parser and evaluator for target distortion functions.

Grammar:
    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' atom)?
    atom   := number | 't' | func '(' expr (',' expr)? ')' | '(' expr ')'

Functions: log, sqrt, exp, min, max.  Unknown identifiers are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


class RhoSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class RhoDomainError(ValueError):
    pass


_FUNCS1 = {"log": math.log, "sqrt": math.sqrt, "exp": math.exp}
_FUNCS2 = {"min": min, "max": max}


@dataclass(frozen=True)
class Node:
    kind: str                 # num | var | binop | call
    value: Optional[float] = None
    op: Optional[str] = None
    args: tuple = ()

    def eval(self, t: float) -> float:
        if self.kind == "num":
            return self.value
        if self.kind == "var":
            return t
        if self.kind == "binop":
            a = self.args[0].eval(t)
            b = self.args[1].eval(t)
            if self.op == "+":
                return a + b
            if self.op == "-":
                return a - b
            if self.op == "*":
                return a * b
            if self.op == "/":
                if b == 0:
                    raise RhoDomainError("division by zero")
                return a / b
            if self.op == "^":
                return a ** b
        if self.kind == "call":
            vals = [a.eval(t) for a in self.args]
            if self.op in _FUNCS1:
                if self.op in ("log", "sqrt") and vals[0] < 0:
                    raise RhoDomainError(f"{self.op} of negative value {vals[0]}")
                if self.op == "log" and vals[0] == 0:
                    raise RhoDomainError("log of zero")
                return _FUNCS1[self.op](vals[0])
            return _FUNCS2[self.op](*vals)
        raise RhoDomainError(f"bad node {self.kind}")

    def pretty(self) -> str:
        if self.kind == "num":
            v = self.value
            return repr(int(v)) if float(v).is_integer() else repr(v)
        if self.kind == "var":
            return "t"
        if self.kind == "binop":
            return f"({self.args[0].pretty()} {self.op} {self.args[1].pretty()})"
        return f"{self.op}({', '.join(a.pretty() for a in self.args)})"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise RhoSyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self) -> Node:
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error(f"unexpected {self.text[self.pos]!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            c = self.peek()
            if c and c in "+-":
                self.pos += 1
                node = Node("binop", op=c, args=(node, self.term()))
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            c = self.peek()
            if c and c in "*/":
                self.pos += 1
                node = Node("binop", op=c, args=(node, self.factor()))
            else:
                return node

    def factor(self) -> Node:
        node = self.atom()
        if self.peek() == "^":
            self.pos += 1
            node = Node("binop", op="^", args=(node, self.atom()))
        return node

    def atom(self) -> Node:
        c = self.peek()
        if c == "(":
            self.pos += 1
            node = self.expr()
            if not self.take(")"):
                self.error("expected ')'")
            return node
        if c.isdigit() or c == ".":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isdigit() or
                                                 self.text[self.pos] in ".eE"):
                if self.text[self.pos] in "eE" and self.pos + 1 < len(self.text) \
                        and self.text[self.pos + 1] in "+-":
                    self.pos += 1
                self.pos += 1
            try:
                return Node("num", value=float(self.text[start:self.pos]))
            except ValueError:
                self.pos = start
                self.error("bad number")
        if c.isalpha():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isalnum():
                self.pos += 1
            name = self.text[start:self.pos]
            if name == "t":
                return Node("var")
            if name in _FUNCS1 or name in _FUNCS2:
                if not self.take("("):
                    self.error(f"expected '(' after {name}")
                args = [self.expr()]
                if self.take(","):
                    args.append(self.expr())
                if not self.take(")"):
                    self.error("expected ')'")
                if name in _FUNCS1 and len(args) != 1:
                    self.error(f"{name} takes one argument")
                if name in _FUNCS2 and len(args) != 2:
                    self.error(f"{name} takes two arguments")
                return Node("call", op=name, args=tuple(args))
            self.pos = start
            self.error(f"unknown identifier {name!r}")
        self.error("expected a value")


@dataclass
class RhoExpression:
    source: str
    root: Node
    warnings: list[str]

    def __call__(self, t: float) -> float:
        return self.root.eval(t)

    def pretty(self) -> str:
        return self.root.pretty()


def parse_rho(source: str, horizon: float = 1e6, samples: int = 1000,
              validate: bool = True) -> RhoExpression:
    """Parse and (advisorily) validate monotonicity and growth by sampling
    ``samples`` points on [1, horizon]; domain errors during sampling are
    fatal, monotonicity violations only attach warnings."""
    root = _Parser(source).parse()
    warnings = []
    if validate:
        import numpy as np

        ts = np.geomspace(1.0, horizon, samples)
        vals = []
        for t in ts:
            v = root.eval(float(t))
            if not math.isfinite(v) or v < 0:
                raise RhoDomainError(f"rho({t}) = {v} is not finite nonnegative")
            vals.append(v)
        if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
            warnings.append("sampled monotonicity violated on [1, horizon]")
        if vals[-1] <= vals[3 * len(vals) // 4] + 1e-9:
            warnings.append("function does not appear unbounded on the horizon")
    return RhoExpression(source=source, root=root, warnings=warnings)
