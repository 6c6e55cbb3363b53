"""Recursive-descent parser for the expression grammar.

Grammar (EBNF)::

    expression     = additive EOF ;
    additive       = multiplicative , { ("+" | "-") , multiplicative } ;
    multiplicative = unary , { ("*" | "/") , unary } ;
    unary          = ("-" | "+") , unary | power ;
    power          = primary , [ "^" , unary ] ;
    primary        = number | identifier | call | "(" , additive , ")" ;
    call           = function , "(" , additive , { "," , additive } , ")" ;
    function       = "abs" | "exp" | "ln" | "sqrt" | "cbrt" | "min" | "max" | "ifpos" ;
    number         = digits , [ "." , digits ] , [ ("e" | "E") , [ "+" | "-" ] , digits ] ;

``^`` is right associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)`` and ``2^-1`` is ``0.5``.
"""

import re
from dataclasses import dataclass
from typing import Sequence

from invariant_kit.errors import ExpressionSyntaxError, UnknownVariable
from invariant_kit.expr.nodes import BinOp, Call, Neg, Node, Num, Var

# name -> (min arity, max arity); None means unbounded
FUNCTIONS: dict[str, tuple[int, int | None]] = {
    "abs": (1, 1),
    "exp": (1, 1),
    "ln": (1, 1),
    "sqrt": (1, 1),
    "cbrt": (1, 1),
    "min": (2, None),
    "max": (2, None),
    "ifpos": (3, 3),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<op>[-+*/^(),])
    |(?P<space>\s+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number, ident, op, end
    text: str
    position: int


def tokenize(source: str) -> list[Token]:
    """Split source into tokens, ending with an ``end`` token."""
    tokens = []
    position = 0
    while position < len(source):
        match = _TOKEN_RE.match(source, position)
        if match is None:
            raise ExpressionSyntaxError(position, f"Unexpected character {source[position]!r}", source)
        kind = match.lastgroup
        if kind != "space":
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class Parser:
    """Parses one expression source against a fixed variable list."""

    def __init__(self, source: str, variables: Sequence[str]):
        self.source = source
        self.variables = list(variables)
        self._index = {name: i for i, name in enumerate(self.variables)}
        self.tokens = tokenize(source)
        self.pos = 0

    def parse(self) -> Node:
        if self._peek().kind == "end":
            raise ExpressionSyntaxError(0, "Empty expression", self.source)
        node = self._additive()
        token = self._peek()
        if token.kind != "end":
            raise ExpressionSyntaxError(token.position, f"Unexpected {token.text!r}", self.source)
        return node

    def _peek(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _expect(self, text: str) -> Token:
        token = self._peek()
        if token.text != text or token.kind != "op":
            found = token.text or "end of input"
            raise ExpressionSyntaxError(token.position, f"Expected {text!r}, found {found!r}", self.source)
        return self._advance()

    def _at_op(self, *ops: str) -> bool:
        token = self._peek()
        return token.kind == "op" and token.text in ops

    def _additive(self) -> Node:
        node = self._multiplicative()
        while self._at_op("+", "-"):
            op = self._advance().text
            node = BinOp(op, node, self._multiplicative())
        return node

    def _multiplicative(self) -> Node:
        node = self._unary()
        while self._at_op("*", "/"):
            op = self._advance().text
            node = BinOp(op, node, self._unary())
        return node

    def _unary(self) -> Node:
        if self._at_op("-"):
            self._advance()
            return Neg(self._unary())
        if self._at_op("+"):
            self._advance()
            return self._unary()
        return self._power()

    def _power(self) -> Node:
        base = self._primary()
        if self._at_op("^"):
            self._advance()
            return BinOp("^", base, self._unary())
        return base

    def _primary(self) -> Node:
        token = self._peek()
        if token.kind == "number":
            self._advance()
            return Num(float(token.text))
        if token.kind == "ident":
            self._advance()
            if self._at_op("("):
                return self._call(token)
            if token.text not in self._index:
                raise UnknownVariable(token.text, self.variables)
            return Var(token.text, self._index[token.text])
        if self._at_op("("):
            self._advance()
            node = self._additive()
            self._expect(")")
            return node
        found = token.text or "end of input"
        raise ExpressionSyntaxError(token.position, f"Unexpected {found!r}", self.source)

    def _call(self, name_token: Token) -> Node:
        name = name_token.text
        if name not in FUNCTIONS:
            raise ExpressionSyntaxError(name_token.position, f"Unknown function {name!r}", self.source)
        self._expect("(")
        args = [self._additive()]
        while self._at_op(","):
            self._advance()
            args.append(self._additive())
        self._expect(")")

        low, high = FUNCTIONS[name]
        if len(args) < low or (high is not None and len(args) > high):
            expected = str(low) if low == high else f"at least {low}"
            raise ExpressionSyntaxError(
                name_token.position,
                f"{name}() takes {expected} argument(s), got {len(args)}",
                self.source,
            )
        return Call(name, tuple(args))


def parse_source(source: str, variables: Sequence[str]) -> Node:
    """Parse source into an expression tree over the given variables."""
    return Parser(source, variables).parse()
