from crindex.expr.evaluate import eval_complex, eval_expr
from crindex.expr.nodes import (
    Binary,
    Const,
    Coord,
    ExprAst,
    Power,
    Unary,
    format_expr,
    rotate_expr,
)
from crindex.expr.parser import parse_defining_function

__all__ = [
    "Binary",
    "Const",
    "Coord",
    "ExprAst",
    "Power",
    "Unary",
    "eval_complex",
    "eval_expr",
    "format_expr",
    "parse_defining_function",
    "rotate_expr",
]
