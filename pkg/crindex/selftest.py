"""
Built-in validation suites.

jet: order-0 jet coefficients against direct evaluation, order-k
coefficients against Richardson-extrapolated central differences of the
order-(k-1) coefficients, and the reality condition for real expressions.

rank_one: rank_one_threshold against a bisection on the smallest eigenvalue
of A - t v v*, over definite, singular, zero-vector and indefinite instances.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from crindex.expr import eval_complex, parse_defining_function
from crindex.indices import INADMISSIBLE, rank_one_threshold
from crindex.wjet import jet_lift

FD_STEP = 1e-3
JET_REL_TOL = 1e-6
REALITY_TOL = 1e-10
RANK_ONE_REL_TOL = 1e-6
RANK_ONE_T_MAX = 1e6
BISECT_EIG_TOL = 1e-12
RANK_ONE_KINDS = ("definite", "singular_range", "singular_kernel", "zero_vector", "indefinite")

EXPRESSION_TEMPLATES = (
    "abs2(z{a})^2 + re(z{a}*conj(z{b}))",
    "exp(re(z{a}))*abs2(z{b}) - im(z{b})",
    "log(1 + abs2(z{a}) + abs2(z{b}))",
    "sqrt(3 + re(z{a}) + abs2(z{b}))",
    "sin(re(z{a}))*cos(im(z{b})) + abs2(z{a} - 0.5*z{b})",
    "re(z{a}^3*conj(z{b}))/(2 + abs2(z{b}))",
    "im(z{a})^3 - 2*re(z{a})*im(z{b})^2 + abs2(z{a})*abs2(z{b})",
    "cos(abs2(z{a})) + exp(-abs2(z{b}))",
    "re(i*z{a}*z{b}) + abs2(z{a} + i*z{b})^2",
)


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int
    max_error: float

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "trials": int(self.trials),
            "failures": int(self.failures),
            "max_error": float(self.max_error),
            "ok": bool(self.ok),
        }


def _coefficient(tensor: NDArray, slots: Tuple[int, ...]) -> complex:
    return complex(tensor[slots]) if slots else complex(tensor)


def _fd_coefficient(ast, point: NDArray, slots: Tuple[int, ...], n: int) -> complex:
    """
    d/d(var) of the coefficient at slots[1:], var = slots[0], by central
    differences with one Richardson step.
    """
    var, rest = slots[0], slots[1:]
    j = var % n

    def central(h: float, direction: complex) -> complex:
        e = np.zeros(n, dtype=complex)
        e[j] = h * direction
        plus = jet_lift(ast, point + e, 2).tensors[len(rest)]
        minus = jet_lift(ast, point - e, 2).tensors[len(rest)]
        return (_coefficient(plus, rest) - _coefficient(minus, rest)) / (2 * h)

    def derivative(h: float) -> complex:
        dx, dy = central(h, 1.0), central(h, 1j)
        return 0.5 * (dx - 1j * dy) if var < n else 0.5 * (dx + 1j * dy)

    return (4 * derivative(FD_STEP / 2) - derivative(FD_STEP)) / 3


def jet_suite(trials: int = 500, seed: int = 0) -> SuiteResult:
    """Random (expression, point, multi-index) triples of order <= 3."""
    rng = np.random.default_rng(seed)
    failures = 0
    max_error = 0.0
    for trial in range(trials):
        n = int(rng.integers(2, 4))
        a, b = (int(k) for k in rng.integers(1, n + 1, size=2))
        template = EXPRESSION_TEMPLATES[int(rng.integers(len(EXPRESSION_TEMPLATES)))]
        text = template.format(a=a, b=b)
        ast = parse_defining_function(text, n)
        point = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
        jet = jet_lift(ast, point, 3)

        order = int(rng.integers(0, 4))
        slots = tuple(sorted(int(s) for s in rng.integers(0, 2 * n, size=order)))
        exact = _coefficient(jet.tensors[order], slots)
        if order == 0:
            reference = eval_complex(ast, point)
        else:
            reference = _fd_coefficient(ast, point, slots, n)
        error = abs(exact - reference) / max(1.0, abs(exact), abs(reference))
        defect = jet.reality_defect()
        max_error = max(max_error, error)
        if error > JET_REL_TOL or defect > REALITY_TOL:
            failures += 1
            logger.warning(
                f"Jet check {trial} failed: {text!r} slots {slots}: "
                f"error {error:.3g}, reality defect {defect:.3g}"
            )
    return SuiteResult("jet", trials, failures, max_error)


def rank_one_instance(rng: np.random.Generator, kind: str) -> Tuple[NDArray, NDArray]:
    """
    One random (A, v) pair of the given kind, |v| in [0.5, 2] unless zero.

    Singular kinds use A = Q diag(lambda, 0) Q* with a random unitary Q and
    range eigenvalues lambda in [0.1, 4].
    """
    if kind in ("singular_range", "singular_kernel"):
        r = int(rng.integers(2, 5))
        k = int(rng.integers(1, r))
        q, _ = np.linalg.qr(rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
        eigvals = np.zeros(r)
        eigvals[:k] = rng.uniform(0.1, 4.0, k)
        a = (q * eigvals) @ q.conj().T
        a = 0.5 * (a + a.conj().T)
        c = rng.normal(size=k) + 1j * rng.normal(size=k)
        v = q[:, :k] @ (c / np.linalg.norm(c))
        if kind == "singular_kernel":
            d = rng.normal(size=r - k) + 1j * rng.normal(size=r - k)
            v = v + q[:, k:] @ (rng.uniform(0.3, 1.0) * d / np.linalg.norm(d))
    elif kind in ("definite", "zero_vector", "indefinite"):
        r = int(rng.integers(1, 5))
        b = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
        a = b @ b.conj().T + 0.05 * np.eye(r)
        if kind == "indefinite":
            a = a - (np.linalg.eigvalsh(a)[0] + 0.5) * np.eye(r)
        v = rng.normal(size=r) + 1j * rng.normal(size=r)
    else:
        raise ValueError(f"Unknown rank-one instance kind `{kind}`")
    if kind == "zero_vector":
        return a, np.zeros(r, dtype=complex)
    return a, v * (rng.uniform(0.5, 2.0) / np.linalg.norm(v))


def bisect_threshold(a: NDArray, v: NDArray, eig_tol: float = BISECT_EIG_TOL) -> float:
    """
    Reference sup{t >= 0 : A - t v v* >= 0} by bisection on the smallest eigenvalue.

    Feasibility allows eig_tol * max(1, largest |eigenvalue|) of roundoff so that
    singular A are handled. Returns INADMISSIBLE when t = 0 is infeasible and inf
    when t = RANK_ONE_T_MAX is still feasible.
    """
    rank_one = np.outer(v, np.conj(v))

    def feasible(t: float) -> bool:
        eigvals = np.linalg.eigvalsh(a - t * rank_one)
        return eigvals[0] >= -eig_tol * max(1.0, float(np.max(np.abs(eigvals))))

    if not feasible(0.0):
        return INADMISSIBLE
    lo, hi = 0.0, RANK_ONE_T_MAX
    if feasible(hi):
        return np.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def threshold_error(actual: float, expected: float) -> float:
    """Relative error of a threshold; sentinels and inf must match exactly."""
    if actual == expected:
        return 0.0
    if np.isinf(actual) or np.isinf(expected) or INADMISSIBLE in (actual, expected):
        return np.inf
    return abs(actual - expected) / max(1.0, abs(expected))


def rank_one_suite(trials: int = 1000, seed: int = 0, psd_tol: float = 1e-9) -> SuiteResult:
    """Random (A, v) pairs cycling through RANK_ONE_KINDS, r <= 4."""
    rng = np.random.default_rng(seed)
    failures = 0
    max_error = 0.0
    for trial in range(trials):
        kind = RANK_ONE_KINDS[trial % len(RANK_ONE_KINDS)]
        a, v = rank_one_instance(rng, kind)
        expected = bisect_threshold(a, v)
        t_max, _ = rank_one_threshold(a, v, psd_tol)
        error = threshold_error(t_max, expected)
        if np.isfinite(error):
            max_error = max(max_error, error)
        if error > RANK_ONE_REL_TOL:
            failures += 1
            logger.warning(f"Rank-one check {trial} ({kind}) failed: {t_max} vs {expected}")
    return SuiteResult("rank_one", trials, failures, max_error)


def run_selftest(
    jet_trials: int = 500, rank_one_trials: int = 1000, seed: int = 0
) -> List[SuiteResult]:
    results = [jet_suite(jet_trials, seed), rank_one_suite(rank_one_trials, seed)]
    for result in results:
        logger.info(
            f"Selftest {result.name}: {result.trials - result.failures}/{result.trials} passed "
            f"(max error {result.max_error:.3g})"
        )
    return results
