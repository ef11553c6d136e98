from numpy.typing import NDArray

from crindex.errors import OracleError
from crindex.oracle.base import OffsetShell, PshOracleBase
from crindex.oracle.types import Side


class ExteriorPshOracle(PshOracleBase):
    """
    Checks that rho^gamma is plurisubharmonic outside Omega near M.

        f_jkbar = gamma rho^(gamma-1) rho_jkbar
                + gamma (gamma-1) rho^(gamma-2) rho_j rho_kbar
    """

    side = Side.EXTERIOR
    sign = 1.0

    def validate_gamma(self, gamma: float) -> None:
        if not gamma > 1.0:
            raise OracleError(f"exterior exponent must exceed 1, got {gamma}")

    def exponent_hessian(self, shell: OffsetShell, gamma: float) -> NDArray:
        height = shell.rho
        first = gamma * height ** (gamma - 1.0)
        second = gamma * (gamma - 1.0) * height ** (gamma - 2.0)
        return first[:, None, None] * shell.hessian + second[:, None, None] * shell.outer
