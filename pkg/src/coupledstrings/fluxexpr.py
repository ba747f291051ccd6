"""Small expression language for the coupling nonlinearity f(u, v).

Grammar (highest binding first):

    power   :=  atom ('^' UINT)*
    unary   :=  '-' unary | power
    product :=  unary ('*' unary)*
    sum     :=  product (('+' | '-') product)*
    atom    :=  NUMBER | 'u' | 'v' | '(' sum ')'

Exponents must be non-negative integer literals, so every parsed expression is
a polynomial in (u, v).  Admissible fluxes vanish at the origin; parse_flux
rejects anything with f(0, 0) != 0.  Aliases: "bilinear" = u*v,
"quadratic" = u^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .exceptions import FluxSyntaxError, NonzeroAtOriginError, UnknownSymbolError

ALIASES = {"bilinear": "u*v", "quadratic": "u^2"}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "u" or "v"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*"
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int  # >= 0


Node = Union[Num, Var, Neg, BinOp, Power]


def _evaluate(node: Node, u, v):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return u if node.name == "u" else v
    if isinstance(node, Neg):
        return -_evaluate(node.operand, u, v)
    if isinstance(node, BinOp):
        left = _evaluate(node.left, u, v)
        right = _evaluate(node.right, u, v)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        return left * right
    # integer power by repeated multiplication: exact for exactly representable bases
    base = _evaluate(node.base, u, v)
    result = 1.0
    for _ in range(node.exponent):
        result = result * base
    return result


_PRECEDENCE = {"sum": 1, "product": 2, "unary": 3, "power": 4, "atom": 5}


def _to_source(node: Node, parent_level: int = 0) -> str:
    if isinstance(node, Num):
        value = node.value
        text = str(int(value)) if value == int(value) and abs(value) < 1e16 else repr(value)
        level = _PRECEDENCE["atom"]
    elif isinstance(node, Var):
        text, level = node.name, _PRECEDENCE["atom"]
    elif isinstance(node, Neg):
        text = "-" + _to_source(node.operand, _PRECEDENCE["unary"])
        level = _PRECEDENCE["unary"]
    elif isinstance(node, Power):
        text = _to_source(node.base, _PRECEDENCE["power"] + 1) + "^" + str(node.exponent)
        level = _PRECEDENCE["power"]
    else:
        level = _PRECEDENCE["product" if node.op == "*" else "sum"]
        # right side gets level+1: "-" and "*" associate left
        text = (
            _to_source(node.left, level)
            + " " * (node.op != "*")
            + node.op
            + " " * (node.op != "*")
            + _to_source(node.right, level + 1)
        )
    if level < parent_level:
        return "(" + text + ")"
    return text


@dataclass(frozen=True)
class FluxExpr:
    """A parsed flux: evaluate with eval(u, v), print with to_source()."""

    root: Node
    source: str

    def eval(self, u, v):
        return _evaluate(self.root, u, v)

    def to_source(self) -> str:
        return _to_source(self.root)

    @property
    def is_zero(self) -> bool:
        return isinstance(self.root, Num) and self.root.value == 0.0


_TOKEN_CHARS = set("+-*^()")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_CHARS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            try:
                float(lexeme)
            except ValueError:
                raise FluxSyntaxError(f"bad number {lexeme!r}", i)
            tokens.append(("number", lexeme, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise FluxSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.take()
        if tok[0] != kind:
            raise FluxSyntaxError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def parse(self) -> Node:
        node = self.sum()
        tok = self.peek()
        if tok[0] != "end":
            raise FluxSyntaxError(f"unexpected {tok[1]!r} after expression", tok[2])
        return node

    def sum(self) -> Node:
        node = self.product()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            node = BinOp(op, node, self.product())
        return node

    def product(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "*":
            self.take()
            node = BinOp("*", node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[0] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while self.peek()[0] == "^":
            self.take()
            kind, lexeme, pos = self.take()
            if kind != "number" or not lexeme.isdigit():
                raise FluxSyntaxError(
                    f"exponent must be a non-negative integer literal, found {lexeme or 'end of input'!r}",
                    pos,
                )
            node = Power(node, int(lexeme))
        return node

    def atom(self) -> Node:
        kind, lexeme, pos = self.take()
        if kind == "number":
            return Num(float(lexeme))
        if kind == "name":
            if lexeme in ("u", "v"):
                return Var(lexeme)
            raise UnknownSymbolError(f"unknown symbol {lexeme!r} (only u and v are defined)", pos)
        if kind == "(":
            node = self.sum()
            self.expect(")")
            return node
        raise FluxSyntaxError(f"expected a number, u, v or '(', found {lexeme or 'end of input'!r}", pos)


def parse_flux(source: str) -> FluxExpr:
    """Parse a flux expression (or alias); reject f with f(0, 0) != 0."""
    text = ALIASES.get(source.strip(), source)
    root = _Parser(_tokenize(text)).parse()
    at_origin = _evaluate(root, 0.0, 0.0)
    if at_origin != 0.0:
        raise NonzeroAtOriginError(
            f"flux must vanish at the origin, got f(0, 0) = {at_origin!r}"
        )
    return FluxExpr(root=root, source=source)
