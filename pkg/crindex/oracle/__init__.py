from crindex.oracle.types import OracleVerdict, Side
from crindex.oracle.base import PshOracleBase
from crindex.oracle.interior import InteriorPshOracle
from crindex.oracle.exterior import ExteriorPshOracle
from crindex.oracle.search import (
    exterior_psh_oracle,
    interior_psh_oracle,
    make_oracle,
    oracle_exponent_search,
    strong_oka_margin,
)

__all__ = [
    "OracleVerdict",
    "Side",
    "PshOracleBase",
    "InteriorPshOracle",
    "ExteriorPshOracle",
    "exterior_psh_oracle",
    "interior_psh_oracle",
    "make_oracle",
    "oracle_exponent_search",
    "strong_oka_margin",
]
