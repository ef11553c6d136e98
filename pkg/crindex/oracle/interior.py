from numpy.typing import NDArray

from crindex.errors import OracleError
from crindex.oracle.base import OffsetShell, PshOracleBase
from crindex.oracle.types import Side


class InteriorPshOracle(PshOracleBase):
    """
    Checks that -(-rho)^gamma is plurisubharmonic inside Omega near M.

        f_jkbar = gamma (-rho)^(gamma-1) rho_jkbar
                + gamma (1-gamma) (-rho)^(gamma-2) rho_j rho_kbar
    """

    side = Side.INTERIOR
    sign = -1.0

    def validate_gamma(self, gamma: float) -> None:
        if not 0.0 < gamma < 1.0:
            raise OracleError(f"interior exponent must lie in (0, 1), got {gamma}")

    def exponent_hessian(self, shell: OffsetShell, gamma: float) -> NDArray:
        depth = -shell.rho
        first = gamma * depth ** (gamma - 1.0)
        second = gamma * (1.0 - gamma) * depth ** (gamma - 2.0)
        return first[:, None, None] * shell.hessian + second[:, None, None] * shell.outer
