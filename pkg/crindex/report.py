"""
Serialization helpers: JSON values with "inf" for infinite indices, and the
per-point CSV used for plotting thresholds over the boundary.
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, List, Sequence

from loguru import logger

from crindex.indices import IndexReport

INF_TEXT = "inf"


def json_value(value: Any) -> Any:
    """Convert numpy scalars, tuples and infinities to JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_value(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, complex):
        return [json_value(value.real), json_value(value.imag)]
    if isinstance(value, float):
        if math.isinf(value):
            return INF_TEXT if value > 0 else f"-{INF_TEXT}"
        if math.isnan(value):
            return "nan"
        return value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(data: Any) -> str:
    return json.dumps(json_value(data), indent=2)


def export_json(data: Any, path: Path) -> None:
    Path(path).write_text(to_json(data) + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")


def point_pairs(point: Sequence[complex]) -> List[List[float]]:
    """A point of C^n as [[re_z1, im_z1], ...]."""
    return [[float(c.real), float(c.imag)] for c in point]


def csv_header(n: int) -> List[str]:
    columns = []
    for j in range(1, n + 1):
        columns += [f"re_z{j}", f"im_z{j}"]
    return columns + ["null_dim", "gamma_df", "gamma_s", "marginal"]


def emit_pointwise_csv(report: IndexReport, n: int) -> str:
    """
    One row per sample in sample order.

    Args:
        report: Report whose per_point entries are written
        n: Complex dimension (fixes the header when per_point is empty)

    Returns:
        str: CSV text including the header line
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(csv_header(n))
    for point, threshold in report.per_point:
        row = []
        for c in point.p:
            row += [repr(float(c.real)), repr(float(c.imag))]
        row += [
            threshold.null_dim,
            repr(float(threshold.gamma_df)),
            repr(float(threshold.gamma_s)),
            int(threshold.marginal),
        ]
        writer.writerow(row)
    return buffer.getvalue()


def export_csv(report: IndexReport, n: int, path: Path) -> None:
    Path(path).write_text(emit_pointwise_csv(report, n), encoding="utf-8")
    logger.info(f"Wrote {path}")
