"""Recursive-descent parser for the expression grammar.

Grammar (whitespace insensitive)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ['^' exponent]
    exponent := ['-'] INT | '(' ['-'] INT ')'
    atom     := INT | IDENT | FUNC '(' expr ')' | '(' expr ')'

Identifiers are ``[a-z][a-z0-9]*`` optionally followed by ``_sfx`` where
``sfx`` is a word over the declared independent-variable letters; such a
name is a jet variable and its suffix is canonicalized alphabetically
(``u_xt`` parses to the same node as ``u_tx``).  Integer literals joined
by ``/`` fold to exact rationals, so ``3/2`` is the rational three
halves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .exprs import (
    FUNCTION_NAMES,
    Context,
    DEPENDENT,
    Expr,
    add,
    const,
    div,
    func,
    mul,
    neg,
    pow_,
    var,
)


class ParseError(Exception):
    """Syntax or resolution failure, carrying the offending position."""

    def __init__(self, message: str, text: str, pos: int) -> None:
        super().__init__(f"{message} (column {pos + 1})")
        self.message = message
        self.text = text
        self.pos = pos


@dataclass(frozen=True)
class Token:
    kind: str  # INT | IDENT | OP | END
    value: str
    pos: int


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<INT>\d+)|(?P<IDENT>[a-z][a-z0-9]*(?:_[a-z0-9]+)?)|(?P<OP>[-+*/^()]))"
)


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[at]!r}", text, at)
        kind = m.lastgroup
        out.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(Token("END", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, ctx: Context) -> None:
        self.text = text
        self.ctx = ctx
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> Token:
        tok = self.next()
        if tok.kind != "OP" or tok.value != op:
            raise ParseError(f"expected {op!r}", self.text, tok.pos)
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.value in ops

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "END":
            raise ParseError(f"unexpected trailing {tok.value!r}", self.text, tok.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.at_op("+", "-"):
            op = self.next().value
            rhs = self.term()
            e = add(e, rhs) if op == "+" else add(e, neg(rhs))
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.at_op("*", "/"):
            op = self.next()
            rhs = self.unary()
            if op.value == "*":
                e = mul(e, rhs)
            else:
                try:
                    e = div(e, rhs)
                except ZeroDivisionError:
                    raise ParseError("division by zero", self.text, op.pos) from None
        return e

    def unary(self) -> Expr:
        if self.at_op("-"):
            self.next()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at_op("^"):
            tok = self.next()
            try:
                return pow_(base, self.exponent())
            except ZeroDivisionError:
                raise ParseError(
                    "zero raised to a negative power", self.text, tok.pos
                ) from None
        return base

    def exponent(self) -> int:
        sign = 1
        parens = False
        if self.at_op("("):
            self.next()
            parens = True
        if self.at_op("-"):
            self.next()
            sign = -1
        tok = self.next()
        if tok.kind != "INT":
            raise ParseError("exponent must be an integer literal", self.text, tok.pos)
        if parens:
            self.expect_op(")")
        return sign * int(tok.value)

    def atom(self) -> Expr:
        tok = self.next()
        if tok.kind == "INT":
            return const(int(tok.value))
        if tok.kind == "OP" and tok.value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if tok.kind == "IDENT":
            return self.resolve(tok)
        raise ParseError(f"unexpected {tok.value!r}", self.text, tok.pos)

    def resolve(self, tok: Token) -> Expr:
        name = tok.value
        if name in FUNCTION_NAMES:
            if not self.at_op("("):
                raise ParseError(
                    f"expected '(' after function name {name!r}", self.text, tok.pos
                )
            self.next()
            arg = self.expr()
            self.expect_op(")")
            return func(name, arg)
        if "_" in name:
            base, suffix = name.split("_", 1)
            dep = self.ctx.lookup(base)
            if dep is None:
                raise ParseError(f"unknown identifier {base!r}", self.text, tok.pos)
            if dep.kind != DEPENDENT:
                raise ParseError(
                    f"cannot take derivatives of {dep.kind} variable {base!r}",
                    self.text,
                    tok.pos,
                )
            try:
                jv = self.ctx.jet(dep, suffix)
            except Exception as exc:
                raise ParseError(str(exc), self.text, tok.pos) from None
            return var(jv)
        ref = self.ctx.lookup(name)
        if ref is None:
            raise ParseError(f"unknown identifier {name!r}", self.text, tok.pos)
        return var(ref)


def parse(text: str, ctx: Context) -> Expr:
    """Parse ``text`` against the declarations in ``ctx``."""
    return _Parser(text, ctx).parse()
