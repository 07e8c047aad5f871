"""A small arithmetic expression grammar for configuration files.

Supports numbers, named variables, ``+ - * /``, ``^`` (right
associative), unary minus, parentheses, the constants ``pi`` and ``e``,
and the functions sin, cos, exp, sqrt, log, abs.  Evaluation is
polymorphic over float, complex and mpmath numbers so compiled
expressions can serve as Laplace symbols on a contour.

This is deliberately not a general evaluator: unknown names are
rejected at compile time.
"""
from __future__ import annotations

import cmath
import math

import mpmath as mp

from ._complexmath import is_mp
from .errors import ConfigError

_CONSTANTS = {"pi": math.pi, "e": math.e}


def _dispatch(name, fn_math, fn_cmath, fn_mp):
    def call(x):
        if is_mp(x):
            return fn_mp(x)
        if isinstance(x, complex):
            return fn_cmath(x)
        return fn_math(x)

    call.__name__ = name
    return call


_FUNCTIONS = {
    "sin": _dispatch("sin", math.sin, cmath.sin, mp.sin),
    "cos": _dispatch("cos", math.cos, cmath.cos, mp.cos),
    "exp": _dispatch("exp", math.exp, cmath.exp, mp.exp),
    "sqrt": _dispatch("sqrt", math.sqrt, cmath.sqrt, mp.sqrt),
    "log": _dispatch("log", math.log, cmath.log, mp.log),
    "abs": abs,
}


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/^()":
            tokens.append(c)
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eE"
                             or (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            try:
                tokens.append(float(text[i:j]))
            except ValueError as exc:
                raise ConfigError(f"bad number in expression: {text[i:j]!r}") from exc
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
            continue
        raise ConfigError(f"unexpected character {c!r} in expression")
    return tokens


class _Parser:
    def __init__(self, tokens, variables):
        self.tokens = tokens
        self.pos = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, tok):
        got = self.take()
        if got != tok:
            raise ConfigError(f"expected {tok!r}, found {got!r}")

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise ConfigError(f"trailing input in expression: {self.peek()!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            node = (lambda env, a=node, b=rhs, neg=(op == "-"):
                    a(env) - b(env) if neg else a(env) + b(env))
        return node

    def term(self):
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.factor()
            node = (lambda env, a=node, b=rhs, div=(op == "/"):
                    a(env) / b(env) if div else a(env) * b(env))
        return node

    def factor(self):
        if self.peek() == "-":
            self.take()
            inner = self.factor()
            return lambda env, a=inner: -a(env)
        base = self.atom()
        if self.peek() == "^":
            self.take()
            expo = self.factor()   # right associative
            return lambda env, a=base, b=expo: a(env) ** b(env)
        return base

    def atom(self):
        tok = self.take()
        if isinstance(tok, float):
            return lambda env, value=tok: value
        if tok == "(":
            node = self.expr()
            self.expect(")")
            return node
        if isinstance(tok, str):
            if tok in _FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return lambda env, fn=_FUNCTIONS[tok], a=arg: fn(a(env))
            if tok in _CONSTANTS:
                return lambda env, value=_CONSTANTS[tok]: value
            if tok in self.variables:
                return lambda env, name=tok: env[name]
            raise ConfigError(f"unknown name {tok!r} in expression")
        raise ConfigError(f"unexpected token {tok!r} in expression")


def compile_expression(text: str, variables: tuple[str, ...]):
    """Compile an expression into a callable of the named variables."""
    if not isinstance(text, str) or not text.strip():
        raise ConfigError("expression must be a nonempty string")
    node = _Parser(_tokenize(text), frozenset(variables)).parse()

    def fn(*args):
        if len(args) != len(variables):
            raise ConfigError(
                f"expression takes {len(variables)} argument(s), got {len(args)}"
            )
        return node(dict(zip(variables, args)))

    fn.variables = variables
    fn.source = text
    return fn
