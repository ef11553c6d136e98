"""
Truncated Wirtinger jets.

A jet stores every mixed derivative d^{|a|+|b|} f / dz^a dzbar^b of total
order <= 3 at a base point. Internally the 2n Wirtinger variables are ordered
(z_1..z_n, zbar_1..zbar_n) and the derivatives of order k form a dense
symmetric tensor of shape (2n,)*k.
"""

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from crindex.errors import ExprDomainError, JetOrderError
from crindex.expr.evaluate import positive_real_argument
from crindex.expr.nodes import Binary, Const, Coord, ExprAst, Power, Unary

MultiIndex = Tuple[int, ...]
SUPPORTED_ORDERS = (2, 3)


def _sym3(pair: NDArray, single: NDArray) -> NDArray:
    """X_ij y_k + X_ik y_j + X_jk y_i for symmetric X."""
    t = np.einsum("ij,k->ijk", pair, single)
    return t + np.transpose(t, (0, 2, 1)) + np.transpose(t, (2, 0, 1))


@dataclass(frozen=True, eq=False)
class WJet:
    """
    Jet of a scalar function at `base_point`.

    Attributes:
        n: Complex dimension
        order: Truncation order (2 or 3)
        tensors: tensors[k] holds all derivatives of order k, k = 0..order
        base_point: The point the derivatives are taken at
    """

    n: int
    order: int
    tensors: Tuple[NDArray, ...]
    base_point: Tuple[complex, ...]

    @staticmethod
    def constant(value: complex, n: int, order: int, base_point: Sequence[complex]) -> "WJet":
        tensors = [np.asarray(complex(value))]
        tensors += [np.zeros((2 * n,) * k, dtype=complex) for k in range(1, order + 1)]
        return WJet(n, order, tuple(tensors), tuple(complex(c) for c in base_point))

    @staticmethod
    def coordinate(index: int, n: int, order: int, base_point: Sequence[complex]) -> "WJet":
        """Jet of z_index (0-based here)."""
        jet = WJet.constant(base_point[index], n, order, base_point)
        jet.tensors[1][index] = 1.0
        return jet

    def __repr__(self):
        return f"WJet(n={self.n}, order={self.order}, value={self.value})"

    @property
    def value(self) -> complex:
        return complex(self.tensors[0])

    def _like(self, tensors) -> "WJet":
        return WJet(self.n, self.order, tuple(tensors), self.base_point)

    def __add__(self, other):
        if isinstance(other, WJet):
            return self._like(a + b for a, b in zip(self.tensors, other.tensors))
        return self._like([self.tensors[0] + other, *self.tensors[1:]])

    __radd__ = __add__

    def __neg__(self):
        return self._like(-t for t in self.tensors)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, WJet):
            return self._like(t * other for t in self.tensors)
        f, g = self.tensors, other.tensors
        h = [f[0] * g[0], f[1] * g[0] + f[0] * g[1]]
        h.append(f[2] * g[0] + np.outer(f[1], g[1]) + np.outer(g[1], f[1]) + f[0] * g[2])
        if self.order >= 3:
            h.append(
                f[3] * g[0] + _sym3(f[2], g[1]) + _sym3(g[2], f[1]) + f[0] * g[3]
            )
        return self._like(h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, WJet):
            return self * (1.0 / other)
        x = other.value
        if x == 0:
            raise ExprDomainError("division by zero")
        return self * other.compose(1 / x, -1 / x**2, 2 / x**3, -6 / x**4)

    def compose(self, d0: complex, d1: complex, d2: complex, d3: complex) -> "WJet":
        """
        Jet of phi(f) given phi and its first three derivatives at f(base_point).
        """
        f = self.tensors
        h = [np.asarray(complex(d0)), d1 * f[1]]
        h.append(d2 * np.outer(f[1], f[1]) + d1 * f[2])
        if self.order >= 3:
            h.append(
                d3 * np.einsum("i,j,k->ijk", f[1], f[1], f[1])
                + d2 * _sym3(f[2], f[1])
                + d1 * f[3]
            )
        return self._like(h)

    def power(self, k: int) -> "WJet":
        x = self.value
        if x == 0 and k < 0:
            raise ExprDomainError("negative power of zero")
        derivs = []
        for m in range(4):
            falling = math.prod(k - i for i in range(m))
            derivs.append(0j if falling == 0 else falling * x ** (k - m))
        return self.compose(*derivs)

    def conj(self) -> "WJet":
        """Jet of conj(f): holomorphic and antiholomorphic slots swap."""
        perm = np.r_[self.n : 2 * self.n, 0 : self.n]
        tensors = []
        for k, t in enumerate(self.tensors):
            for axis in range(k):
                t = np.take(t, perm, axis=axis)
            tensors.append(np.conj(t))
        return self._like(tensors)

    def pullback(self, unitary: NDArray) -> "WJet":
        """
        Jet of w -> f(p + U w) at w = 0, p the base point.

        Args:
            unitary: n x n matrix U

        Returns:
            WJet: Jet in the w coordinates, based at the origin
        """
        n = self.n
        u = np.asarray(unitary, dtype=complex)
        t = np.zeros((2 * n, 2 * n), dtype=complex)
        t[:n, :n] = u
        t[n:, n:] = np.conj(u)
        tensors = [self.tensors[0], t.T @ self.tensors[1], t.T @ self.tensors[2] @ t]
        if self.order >= 3:
            tensors.append(np.einsum("ijk,ia,jb,kc->abc", self.tensors[3], t, t, t))
        return WJet(n, self.order, tuple(tensors), (0j,) * n)

    def complex_hessian(self) -> NDArray:
        """Matrix [j, k] = d^2 f / dz_j dzbar_k."""
        return self.tensors[2][: self.n, self.n :]

    def holomorphic_gradient(self) -> NDArray:
        """Vector [j] = d f / dz_j."""
        return self.tensors[1][: self.n]

    def reality_defect(self) -> float:
        """Largest relative violation of c(a, b) = conj(c(b, a))."""
        swapped = self.conj()
        defect = 0.0
        for t, s in zip(self.tensors, swapped.tensors):
            scale = 1.0 + float(np.max(np.abs(t), initial=0.0))
            defect = max(defect, float(np.max(np.abs(t - s), initial=0.0)) / scale)
        return defect

    @property
    def coeffs(self) -> Dict[Tuple[MultiIndex, MultiIndex], complex]:
        """All stored coefficients keyed by the multi-index pair (a, b)."""
        result = {}
        for k in range(self.order + 1):
            for slots in itertools.combinations_with_replacement(range(2 * self.n), k):
                a = tuple(slots.count(j) for j in range(self.n))
                b = tuple(slots.count(self.n + j) for j in range(self.n))
                result[(a, b)] = complex(self.tensors[k][slots])
        return result


def jet_derivative(jet: WJet, a: Sequence[int], b: Sequence[int]) -> complex:
    """
    Read d^{|a|+|b|} f / dz^a dzbar^b off a jet.

    Raises:
        JetOrderError: If |a| + |b| exceeds the jet order or the multi-indices
            do not have length n
    """
    if len(a) != jet.n or len(b) != jet.n or min(*a, *b) < 0:
        raise JetOrderError(f"multi-indices must be {jet.n} nonnegative integers")
    total = sum(a) + sum(b)
    if total > jet.order:
        raise JetOrderError(f"derivative of order {total} exceeds jet order {jet.order}")
    slots = [j for j in range(jet.n) for _ in range(a[j])]
    slots += [jet.n + j for j in range(jet.n) for _ in range(b[j])]
    return complex(jet.tensors[total][tuple(slots)])


def _lift(ast: ExprAst, point: Tuple[complex, ...], order: int) -> WJet:
    n = len(point)
    if isinstance(ast, Const):
        return WJet.constant(ast.value, n, order, point)
    if isinstance(ast, Coord):
        return WJet.coordinate(ast.index - 1, n, order, point)
    if isinstance(ast, Power):
        return _lift(ast.base, point, order).power(ast.exponent)
    if isinstance(ast, Binary):
        left = _lift(ast.left, point, order)
        right = _lift(ast.right, point, order)
        match ast.op:
            case "+":
                return left + right
            case "-":
                return left - right
            case "*":
                return left * right
            case "/":
                return left / right
        raise ValueError(f"unknown binary operator {ast.op}")
    if isinstance(ast, Unary):
        f = _lift(ast.arg, point, order)
        x = f.value
        match ast.op:
            case "neg":
                return -f
            case "conj":
                return f.conj()
            case "re":
                return (f + f.conj()) * 0.5
            case "im":
                return (f - f.conj()) * (-0.5j)
            case "abs2":
                return f * f.conj()
            case "exp":
                e = cmath.exp(x)
                return f.compose(e, e, e, e)
            case "sin":
                s, c = cmath.sin(x), cmath.cos(x)
                return f.compose(s, c, -s, -c)
            case "cos":
                s, c = cmath.sin(x), cmath.cos(x)
                return f.compose(c, -s, -c, s)
            case "log":
                x = positive_real_argument(x, "log")
                return f.compose(math.log(x), 1 / x, -1 / x**2, 2 / x**3)
            case "sqrt":
                x = positive_real_argument(x, "sqrt")
                r = math.sqrt(x)
                return f.compose(r, 0.5 / r, -0.25 / r**3, 0.375 / r**5)
        raise ValueError(f"unknown unary operator {ast.op}")
    raise TypeError(f"not an expression node: {ast!r}")


def jet_lift(ast: ExprAst, point: Sequence[complex], order: int = 3) -> WJet:
    """
    Propagate all Wirtinger derivatives of a tree up to `order` at `point`.

    Args:
        ast: Expression tree
        point: n complex coordinates
        order: 2 or 3

    Returns:
        WJet: Derivatives exact up to rounding

    Raises:
        JetOrderError: If order is not 2 or 3
        ExprDomainError: If the expression (or a derivative) is undefined at point
    """
    if order not in SUPPORTED_ORDERS:
        raise JetOrderError(f"jet order must be 2 or 3, got {order}")
    return _lift(ast, tuple(complex(c) for c in point), order)
