"""
Empirical exponents of rho from the oracles, and the strong Oka margin.
"""

from typing import Callable, Optional, Sequence, Union

import numpy as np
from loguru import logger

from crindex.config import DomainSpec, GammaGrid
from crindex.crgeom import BoundaryPoint
from crindex.oracle.base import PshOracleBase
from crindex.oracle.exterior import ExteriorPshOracle
from crindex.oracle.interior import InteriorPshOracle
from crindex.oracle.types import OracleVerdict, Side

COARSE_POINTS = 9


def make_oracle(
    spec: DomainSpec, side: Union[Side, str], points: Optional[Sequence[BoundaryPoint]] = None
) -> PshOracleBase:
    side = Side(side)
    if side is Side.INTERIOR:
        return InteriorPshOracle(spec, points)
    return ExteriorPshOracle(spec, points)


def interior_psh_oracle(
    spec: DomainSpec, gamma: float, points: Optional[Sequence[BoundaryPoint]] = None
) -> OracleVerdict:
    """
    Is -(-rho)^gamma plurisubharmonic at every interior offset point?

    Raises:
        OracleError: If gamma is not in (0, 1) or no interior offset exists
    """
    oracle = InteriorPshOracle(spec, points)
    return oracle.check(gamma)


def exterior_psh_oracle(
    spec: DomainSpec, gamma: float, points: Optional[Sequence[BoundaryPoint]] = None
) -> OracleVerdict:
    """
    Is rho^gamma plurisubharmonic at every exterior offset point?

    Raises:
        OracleError: If gamma <= 1 or no exterior offset exists
    """
    oracle = ExteriorPshOracle(spec, points)
    return oracle.check(gamma)


def _threshold_search(
    passes: Callable[[float], bool], grid: GammaGrid, pass_below: bool
) -> float:
    """
    Boundary of the passing set of `passes` on [lo, hi].

    With pass_below the predicate is expected to hold on [lo, g*) and the
    supremum of passing values is returned (0.0 when lo fails); otherwise it
    should hold on (g*, hi] and the infimum is returned (inf when hi fails).
    """
    # Coarse pass over the grid
    coarse = np.linspace(grid.lo, grid.hi, COARSE_POINTS)
    pattern = [passes(float(g)) for g in coarse]
    if not pass_below:
        coarse, pattern = coarse[::-1], pattern[::-1]
    # Index just past the last pass; monotone means passes followed only by failures
    failing = len(pattern) - pattern[::-1].index(True) if True in pattern else 0
    monotone = all(pattern[:failing]) and not any(pattern[failing:])

    if not monotone:
        logger.warning(
            f"Non-monotone oracle pattern {pattern}; scanning the full grid at step {grid.bisect_tol}"
        )
        steps = int(np.ceil((grid.hi - grid.lo) / grid.bisect_tol))
        scan = np.linspace(grid.lo, grid.hi, steps + 1)
        passing = [float(g) for g in scan if passes(float(g))]
        if not passing:
            return 0.0 if pass_below else np.inf
        return max(passing) if pass_below else min(passing)

    if failing == 0:
        return 0.0 if pass_below else np.inf
    if failing == len(pattern):
        return float(coarse[-1])

    # Bisect between the last passing and first failing grid point
    good, bad = float(coarse[failing - 1]), float(coarse[failing])
    while abs(bad - good) > grid.bisect_tol:
        mid = 0.5 * (good + bad)
        if passes(mid):
            good = mid
        else:
            bad = mid
    return good


def oracle_exponent_search(
    spec: DomainSpec,
    side: Union[Side, str],
    points: Optional[Sequence[BoundaryPoint]] = None,
    oracle: Optional[PshOracleBase] = None,
) -> float:
    """
    Empirical DF exponent (interior) or Steinness exponent (exterior) of rho.

    A 9-point coarse pass over the gamma grid decides between bisection
    (monotone pattern) and a full scan at step bisect_tol.

    Args:
        spec: Domain specification
        side: Side.INTERIOR or Side.EXTERIOR (or their string values)
        points: Boundary samples, drawn when omitted
        oracle: A prepared oracle for `side`, reused instead of building one

    Returns:
        float: The exponent; 0.0 if even the interior `lo` fails, inf if even
            the exterior `hi` fails
    """
    side = Side(side)
    oracle = oracle if oracle is not None else make_oracle(spec, side, points)
    grid = spec.oracle.interior if side is Side.INTERIOR else spec.oracle.exterior
    exponent = _threshold_search(
        lambda g: oracle.check(g).all_psd, grid, pass_below=side is Side.INTERIOR
    )
    logger.info(f"{side.value.capitalize()} oracle exponent: {exponent}")
    return exponent


def strong_oka_margin(
    spec: DomainSpec,
    points: Optional[Sequence[BoundaryPoint]] = None,
    oracle: Optional[InteriorPshOracle] = None,
) -> float:
    """
    Smallest eigenvalue of i dd-bar(-log(-rho)) over the interior offsets,
    against the Euclidean metric:

        H / (-rho) + rho_j rho_kbar / rho^2

    A positive value certifies the strong Oka condition on the sampled set.
    """
    oracle = oracle if oracle is not None else InteriorPshOracle(spec, points)
    margin = np.inf
    for shell in oracle.shells:
        depth = -shell.rho
        hessian = (
            shell.hessian / depth[:, None, None] + shell.outer / (depth**2)[:, None, None]
        )
        eigvals = np.linalg.eigvalsh(0.5 * (hessian + np.conj(np.swapaxes(hessian, 1, 2))))
        margin = min(margin, float(np.min(eigvals[:, 0])))
    logger.info(f"Strong Oka margin: {margin:.6g}")
    return margin
