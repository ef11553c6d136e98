"""
Expression trees for real-valued defining functions on C^n.

Every node kind has a closed-form Wirtinger derivative rule, which is what
allows exact jet propagation in `crindex.wjet`.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import NDArray

UNARY_FUNCTIONS = ("conj", "re", "im", "abs2", "exp", "log", "sin", "cos", "sqrt")
BINARY_OPERATORS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Coord:
    """The coordinate z_index (1-based)."""

    index: int


@dataclass(frozen=True)
class Unary:
    """`op` is one of UNARY_FUNCTIONS or "neg"."""

    op: str
    arg: "ExprAst"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Power:
    base: "ExprAst"
    exponent: int


ExprAst = Union[Const, Coord, Unary, Binary, Power]


def _format_const(value: complex) -> str:
    value = complex(value)
    if value.imag == 0.0:
        text = repr(value.real)
        return f"({text})" if value.real < 0 else text
    return f"({value.real!r}+{value.imag!r}*i)"


def format_expr(ast: ExprAst) -> str:
    """
    Pretty-print a tree in the input grammar.

    Binary operations are fully parenthesized so that re-parsing the output
    reproduces the evaluation of the original tree exactly.
    """
    if isinstance(ast, Const):
        return _format_const(ast.value)
    if isinstance(ast, Coord):
        return f"z{ast.index}"
    if isinstance(ast, Unary):
        if ast.op == "neg":
            return f"(-{format_expr(ast.arg)})"
        return f"{ast.op}({format_expr(ast.arg)})"
    if isinstance(ast, Binary):
        return f"({format_expr(ast.left)} {ast.op} {format_expr(ast.right)})"
    if isinstance(ast, Power):
        return f"({format_expr(ast.base)})^{ast.exponent}"
    raise TypeError(f"not an expression node: {ast!r}")


def rotate_expr(ast: ExprAst, unitary: NDArray) -> ExprAst:
    """
    Return the tree of f(U w) for the tree of f(z).

    Args:
        ast: Tree of f
        unitary: n x n matrix U; coordinate z_j is replaced by sum_k U[j, k] w_k

    Returns:
        ExprAst: Tree in the rotated coordinates w
    """
    unitary = np.asarray(unitary, dtype=complex)

    def substitute(node: ExprAst) -> ExprAst:
        if isinstance(node, Coord):
            row = unitary[node.index - 1]
            terms = [
                Binary("*", Const(complex(c)), Coord(k + 1))
                for k, c in enumerate(row)
                if c != 0
            ]
            if not terms:
                return Const(0j)
            result = terms[0]
            for term in terms[1:]:
                result = Binary("+", result, term)
            return result
        if isinstance(node, Unary):
            return Unary(node.op, substitute(node.arg))
        if isinstance(node, Binary):
            return Binary(node.op, substitute(node.left), substitute(node.right))
        if isinstance(node, Power):
            return Power(substitute(node.base), node.exponent)
        return node

    return substitute(ast)
