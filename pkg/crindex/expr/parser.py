"""
Pratt parser for the defining-function language.

Grammar (standard precedence, `^` binds tighter than unary minus):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' ['-'|'+'] INTEGER)*
    atom   := NUMBER | 'i' | 'z'INDEX | FUNC '(' expr ')' | '(' expr ')'
"""

import re
from typing import List, NamedTuple

import numpy as np

from crindex.errors import (
    CoordinateRangeError,
    ExprDomainError,
    ExprSyntaxError,
    RealnessError,
    UnknownIdentifierError,
)
from crindex.expr.evaluate import eval_complex, is_real
from crindex.expr.nodes import (
    UNARY_FUNCTIONS,
    Binary,
    Const,
    Coord,
    ExprAst,
    Power,
    Unary,
)

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^(),])"
    r")"
)
_COORD_RE = re.compile(r"z(\d+)")

# left binding powers
_LBP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30, "**": 30}
_PREFIX_BP = 25

REALNESS_POINTS = 16
_REALNESS_SEED = 0x5EED


class Token(NamedTuple):
    kind: str  # number | name | op | end
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            offset = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[offset]!r}", offset)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.n = n
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        if token.kind != "end":
            self.index += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.advance()
        if token.text != text or token.kind == "end":
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", token.pos)
        return token

    def lbp(self, token: Token) -> int:
        if token.kind != "op":
            return 0
        return _LBP.get(token.text, 0)

    def parse(self) -> ExprAst:
        ast = self.expression(0)
        if self.current.kind != "end":
            raise ExprSyntaxError(
                f"unexpected token {self.current.text!r}", self.current.pos
            )
        return ast

    def expression(self, rbp: int) -> ExprAst:
        left = self.nud(self.advance())
        while rbp < self.lbp(self.current):
            left = self.led(self.advance(), left)
        return left

    def nud(self, token: Token) -> ExprAst:
        if token.kind == "end":
            raise ExprSyntaxError("unexpected end of input", token.pos)
        if token.kind == "number":
            return Const(complex(float(token.text)))
        if token.kind == "name":
            return self.name(token)
        if token.text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        if token.text == "-":
            return Unary("neg", self.expression(_PREFIX_BP))
        if token.text == "+":
            return self.expression(_PREFIX_BP)
        raise ExprSyntaxError(f"unexpected token {token.text!r}", token.pos)

    def name(self, token: Token) -> ExprAst:
        if token.text == "i":
            return Const(1j)
        coord = _COORD_RE.fullmatch(token.text)
        if coord:
            index = int(coord.group(1))
            if not 1 <= index <= self.n:
                raise CoordinateRangeError(
                    f"coordinate {token.text} out of range for n={self.n}", token.pos
                )
            return Coord(index)
        if token.text in UNARY_FUNCTIONS:
            self.expect("(")
            arg = self.expression(0)
            self.expect(")")
            return Unary(token.text, arg)
        raise UnknownIdentifierError(f"unknown identifier `{token.text}`", token.pos)

    def led(self, token: Token, left: ExprAst) -> ExprAst:
        if token.text in ("^", "**"):
            return Power(left, self.integer_exponent())
        return Binary(token.text, left, self.expression(_LBP[token.text]))

    def integer_exponent(self) -> int:
        sign = 1
        if self.current.text in ("-", "+") and self.current.kind == "op":
            sign = -1 if self.advance().text == "-" else 1
        token = self.advance()
        if token.kind != "number" or not token.text.isdigit():
            raise ExprSyntaxError("exponent must be an integer literal", token.pos)
        return sign * int(token.text)


def check_realness(ast: ExprAst, n: int, points: int = REALNESS_POINTS) -> None:
    """
    Evaluate the tree at pseudo-random points and require a real value.

    Points where the tree is undefined are skipped; at most 16 * points
    candidates are drawn.

    Raises:
        RealnessError: On a non-real value, or if no sample point is admissible
    """
    rng = np.random.default_rng(_REALNESS_SEED)
    checked = 0
    for _ in range(16 * points):
        radius = 10.0 ** rng.uniform(-1.0, 1.0)
        point = radius * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        try:
            value = eval_complex(ast, point)
        except ExprDomainError:
            continue
        if not is_real(value):
            raise RealnessError(
                f"expression takes the non-real value {value} at {point.tolist()}"
            )
        checked += 1
        if checked >= points:
            return
    if checked == 0:
        raise RealnessError("expression could not be evaluated at any sample point")


def parse_defining_function(text: str, n: int) -> ExprAst:
    """
    Parse and validate a defining function.

    Args:
        text: Expression source, e.g. "abs2(z1)^2 + abs2(z2) - 1"
        n: Complex dimension; identifiers z1..zn are available

    Returns:
        ExprAst: The validated tree

    Raises:
        ExprSyntaxError: Malformed input (carries the position)
        UnknownIdentifierError: Identifier that is neither a coordinate nor a function
        CoordinateRangeError: z_j with j outside 1..n
        RealnessError: The expression is not real-valued
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    ast = _Parser(text, n).parse()
    check_realness(ast, n)
    return ast
