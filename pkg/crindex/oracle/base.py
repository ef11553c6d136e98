from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from crindex.config import DomainSpec
from crindex.crgeom import BoundaryPoint, sample_boundary
from crindex.errors import ExprDomainError, OracleError
from crindex.oracle.types import OracleVerdict, Side
from crindex.parallel import ordered_map
from crindex.wjet import jet_lift

MAX_WITNESSES = 5


@dataclass(frozen=True, eq=False)
class OffsetShell:
    """Offset points at one distance d from M, with rho data precomputed."""

    distance: float
    points: NDArray  # (m, n)
    rho: NDArray  # (m,)
    grad: NDArray  # (m, n), d rho / dz_j
    hessian: NDArray  # (m, n, n), d^2 rho / dz_j dzbar_k

    @property
    def outer(self) -> NDArray:
        """rho_j rho_kbar per point."""
        return np.einsum("pj,pk->pjk", self.grad, np.conj(self.grad))


def _offset_data(
    spec: DomainSpec, sign: float, distance: float, bp: BoundaryPoint
) -> Optional[Tuple[NDArray, float, NDArray, NDArray]]:
    p = bp.as_array()
    try:
        dz = jet_lift(spec.rho, p, 2).holomorphic_gradient()
        q = p + sign * distance * np.conj(dz) / np.linalg.norm(dz)
        jet = jet_lift(spec.rho, q, 2)
    except ExprDomainError:
        return None
    rho = jet.value.real
    if sign * rho <= 0:
        return None
    return q, rho, jet.holomorphic_gradient(), jet.complex_hessian()


class PshOracleBase:
    """
    Base class for plurisubharmonicity oracles near M.

    Subclasses pick the side of M (`side`, `sign` = -1 inward, +1 outward),
    the admissible exponent range and the complex Hessian of the test
    function f(rho) at offset points.
    """

    side: Side = Side.INTERIOR
    sign: float = -1.0

    def __init__(self, spec: DomainSpec, points: Optional[Sequence[BoundaryPoint]] = None):
        """
        Precompute offset shells for every configured distance.

        Args:
            spec: Domain specification
            points: Boundary samples (drawn with sample_boundary when omitted)

        Raises:
            OracleError: If no offset point lies on the tested side
        """
        self.spec = spec
        points = sample_boundary(spec) if points is None else list(points)
        self.shells: List[OffsetShell] = []
        for distance in spec.oracle.distances:
            data = ordered_map(
                partial(_offset_data, spec, self.sign, distance), points, spec.workers
            )
            data = [d for d in data if d is not None]
            if not data:
                continue
            q, rho, grad, hessian = zip(*data)
            self.shells.append(
                OffsetShell(
                    distance=distance,
                    points=np.asarray(q),
                    rho=np.asarray(rho, dtype=float),
                    grad=np.asarray(grad),
                    hessian=np.asarray(hessian),
                )
            )
        if not self.shells:
            raise OracleError(f"no {self.side.value} offset points found near the boundary")
        total = sum(len(shell.rho) for shell in self.shells)
        logger.debug(f"{type(self).__name__}: {total} offset points")

    def __repr__(self):
        return f"{type(self).__name__}(shells={[s.distance for s in self.shells]})"

    def validate_gamma(self, gamma: float) -> None:
        """
        Raises:
            OracleError: If gamma is outside the admissible range
            NotImplementedError: In the base class
        """
        raise NotImplementedError

    def exponent_hessian(self, shell: OffsetShell, gamma: float) -> NDArray:
        """
        Complex Hessian of the test function at every point of a shell.

        Args:
            shell: Offset points with rho data
            gamma: Exponent

        Returns:
            NDArray: Stack of hermitian n x n matrices

        Raises:
            NotImplementedError: In the base class
        """
        raise NotImplementedError

    def check(self, gamma: float) -> OracleVerdict:
        """Test the Hessian at every offset point for PSD within psd_tol."""
        self.validate_gamma(gamma)
        psd_tol = self.spec.tolerances.psd_tol
        verdict = OracleVerdict(gamma=gamma, side=self.side, all_psd=True)
        for shell in self.shells:
            hessian = self.exponent_hessian(shell, gamma)
            eigvals = np.linalg.eigvalsh(0.5 * (hessian + np.conj(np.swapaxes(hessian, 1, 2))))
            scale = np.maximum(1.0, np.max(np.abs(eigvals), axis=1))
            failing = eigvals[:, 0] < -psd_tol * scale
            verdict.min_eig_by_distance[shell.distance] = float(np.min(eigvals[:, 0]))
            if failing.any():
                verdict.all_psd = False
                for q in shell.points[failing]:
                    if len(verdict.witnesses) < MAX_WITNESSES:
                        verdict.witnesses.append(tuple(complex(c) for c in q))
        logger.debug(f"{verdict!r}")
        return verdict
