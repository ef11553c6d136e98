import cmath
import math
from typing import Sequence

from crindex.errors import ExprDomainError, RealnessError
from crindex.expr.nodes import Binary, Const, Coord, ExprAst, Power, Unary

REALNESS_TOL = 1e-12


def is_real(value: complex, tol: float = REALNESS_TOL) -> bool:
    return abs(value.imag) <= tol * (1.0 + abs(value))


def positive_real_argument(value: complex, op: str, allow_zero: bool = False) -> float:
    """
    Validate the argument of log/sqrt and return it as a float.

    Raises:
        ExprDomainError: If the argument is not real, or not positive
            (nonnegative when `allow_zero` is set)
    """
    if not is_real(value):
        raise ExprDomainError(f"{op} of non-real argument {value}")
    x = value.real
    if x < 0.0 or (x == 0.0 and not allow_zero):
        raise ExprDomainError(f"{op} of nonpositive argument {x}")
    return x


def eval_complex(ast: ExprAst, point: Sequence[complex]) -> complex:
    """Evaluate a tree at `point` without discarding the imaginary part."""
    if isinstance(ast, Const):
        return complex(ast.value)
    if isinstance(ast, Coord):
        return complex(point[ast.index - 1])
    if isinstance(ast, Unary):
        x = eval_complex(ast.arg, point)
        match ast.op:
            case "neg":
                return -x
            case "conj":
                return x.conjugate()
            case "re":
                return complex(x.real)
            case "im":
                return complex(x.imag)
            case "abs2":
                return x * x.conjugate()
            case "exp":
                return cmath.exp(x)
            case "sin":
                return cmath.sin(x)
            case "cos":
                return cmath.cos(x)
            case "log":
                return complex(math.log(positive_real_argument(x, "log")))
            case "sqrt":
                return complex(math.sqrt(positive_real_argument(x, "sqrt", True)))
        raise ValueError(f"unknown unary operator {ast.op}")
    if isinstance(ast, Binary):
        left = eval_complex(ast.left, point)
        right = eval_complex(ast.right, point)
        match ast.op:
            case "+":
                return left + right
            case "-":
                return left - right
            case "*":
                return left * right
            case "/":
                if right == 0:
                    raise ExprDomainError("division by zero")
                return left / right
        raise ValueError(f"unknown binary operator {ast.op}")
    if isinstance(ast, Power):
        base = eval_complex(ast.base, point)
        if base == 0 and ast.exponent < 0:
            raise ExprDomainError("negative power of zero")
        return base**ast.exponent
    raise TypeError(f"not an expression node: {ast!r}")


def eval_expr(ast: ExprAst, point: Sequence[complex]) -> float:
    """
    Evaluate a real-valued tree at a point of C^n.

    Args:
        ast: Expression tree
        point: n complex coordinates

    Returns:
        float: The value; an imaginary residue within REALNESS_TOL is discarded

    Raises:
        ExprDomainError: log/sqrt outside their domain or division by zero
        RealnessError: If the value has a significant imaginary part
    """
    value = eval_complex(ast, point)
    if not is_real(value):
        raise RealnessError(f"expression is not real at {list(point)}: {value}")
    return value.real
