from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Tuple

from crindex.report import json_value, point_pairs


class Side(Enum):
    """Which side of M an oracle tests."""

    INTERIOR = "interior"
    EXTERIOR = "exterior"


@dataclass
class OracleVerdict:
    gamma: float
    side: Side
    all_psd: bool
    min_eig_by_distance: Dict[float, float] = field(default_factory=dict)
    witnesses: List[Tuple[complex, ...]] = field(default_factory=list)

    def __repr__(self):
        return f"OracleVerdict(side={self.side.value}, gamma={self.gamma}, all_psd={self.all_psd})"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": float(self.gamma),
            "side": self.side.value,
            "all_psd": bool(self.all_psd),
            "min_eig_by_distance": {
                f"{d:g}": json_value(float(e)) for d, e in self.min_eig_by_distance.items()
            },
            "witnesses": [point_pairs(w) for w in self.witnesses],
        }
