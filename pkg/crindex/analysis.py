"""
End-to-end analysis of one domain: sampling, boundary geometry, index
estimates, oracle exponents and the consistency checks linking them.
"""

from dataclasses import dataclass, field
from pathlib import Path
from time import time
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from crindex import __version__
from crindex.config import DomainSpec
from crindex.crgeom import BoundaryPoint, PointGeometry, analyse_points, sample_boundary
from crindex.errors import ConsistencyError
from crindex.indices import IndexReport, combine_reports
from crindex.oracle import (
    ExteriorPshOracle,
    InteriorPshOracle,
    Side,
    oracle_exponent_search,
    strong_oka_margin,
)
from crindex.report import export_csv, export_json, point_pairs, to_json
from crindex.trivialization import optimize_trivialization, trivialization_report

BOAS_STRAUBE_TOL = 1e-6
STRONG_OKA_TOL = 1e-4


@dataclass
class RunManifest:
    config_path: Optional[str]
    spec: DomainSpec
    version: str = __version__
    duration: float = 0.0

    @property
    def seed(self) -> int:
        return self.spec.sampling.seed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config_path": self.config_path,
            "spec": self.spec.to_dict(),
            "version": self.version,
            "duration": float(self.duration),
            "seed": int(self.seed),
        }


@dataclass
class Consistency:
    """
    Cross-checks between boundary indices and the oracles.

    theorem1_ok: interior exponent <= df_w and s_w <= exterior exponent
        (each up to twice the bisection tolerance), with eta_rho indices
    boas_straube_max_defect: largest hermitian defect of dbar_b omega
    strong_oka_margin: see oracle.strong_oka_margin; when it exceeds
        STRONG_OKA_TOL every weak A must have eigenvalues above it
    """

    theorem1_ok: bool
    boas_straube_max_defect: float
    strong_oka_margin: float
    strong_oka_ok: bool
    indices_agree: bool

    @property
    def ok(self) -> bool:
        return (
            self.theorem1_ok
            and self.boas_straube_max_defect <= BOAS_STRAUBE_TOL
            and self.strong_oka_ok
        )

    def require(self, full: bool = True) -> None:
        """
        Raises:
            ConsistencyError: If theorem1_ok fails, or with `full` any other check
        """
        failed = [] if self.theorem1_ok else ["theorem1"]
        if full and self.boas_straube_max_defect > BOAS_STRAUBE_TOL:
            failed.append("boas_straube")
        if full and not self.strong_oka_ok:
            failed.append("strong_oka")
        if failed:
            raise ConsistencyError(f"consistency checks failed: {', '.join(failed)}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theorem1_ok": bool(self.theorem1_ok),
            "boas_straube_max_defect": float(self.boas_straube_max_defect),
            "strong_oka_margin": float(self.strong_oka_margin),
            "strong_oka_ok": bool(self.strong_oka_ok),
            "indices_agree": bool(self.indices_agree),
        }


@dataclass
class AnalysisResult:
    manifest: RunManifest
    indices: IndexReport
    eta_indices: IndexReport
    interior_exponent: float
    exterior_exponent: float
    consistency: Consistency
    geometry: List[PointGeometry] = field(default_factory=list)

    def __repr__(self):
        return f"AnalysisResult({self.indices!r}, consistency_ok={self.consistency.ok})"

    def per_point(self) -> List[Dict[str, Any]]:
        rows = []
        for point, threshold in self.indices.per_point:
            rows.append(
                {
                    "point": point_pairs(point.p),
                    "null_dim": int(threshold.null_dim),
                    "gamma_df": float(threshold.gamma_df),
                    "gamma_s": float(threshold.gamma_s),
                    "strict_flags": {
                        "df": bool(threshold.df_strict_ok),
                        "s": bool(threshold.s_strict_ok),
                    },
                    "marginal": bool(threshold.marginal),
                }
            )
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {
            "manifest": self.manifest.to_dict(),
            "indices": self.indices.to_dict(),
            "per_point": self.per_point(),
            "oracles": {
                "interior_exponent": float(self.interior_exponent),
                "exterior_exponent": float(self.exterior_exponent),
            },
            "consistency": self.consistency.to_dict(),
        }

    def to_json(self) -> str:
        return to_json(self.to_dict())

    def export_json(self, dest_path: Path) -> None:
        export_json(self.to_dict(), dest_path)

    def export_csv(self, dest_path: Path) -> None:
        export_csv(self.indices, self.manifest.spec.n, dest_path)


class DomainAnalysis:
    """
    Drives the full pipeline for one DomainSpec.

    Args:
        spec: Domain specification
        config_path: Source of the spec, echoed in the manifest
    """

    def __init__(self, spec: DomainSpec, config_path: Optional[Path] = None):
        self.spec = spec
        self.config_path = None if config_path is None else str(config_path)
        self._points: Optional[List[BoundaryPoint]] = None
        self._geometry: Optional[List[PointGeometry]] = None

    def __repr__(self):
        return f"DomainAnalysis({self.spec!r})"

    @property
    def points(self) -> List[BoundaryPoint]:
        if self._points is None:
            self._points = sample_boundary(self.spec)
        return self._points

    @property
    def geometry(self) -> List[PointGeometry]:
        if self._geometry is None:
            self._geometry = analyse_points(self.spec, self.points)
        return self._geometry

    def run(self, optimize: bool = True) -> AnalysisResult:
        """
        Sample, estimate the indices, run both oracles and cross-check.

        Args:
            optimize: Search the conformal family (when a basis is configured)

        Raises:
            SamplerStarvationError: Too few boundary points
            PseudoconvexityError: A sample with a negative Levi eigenvalue
        """
        start_time = time()
        spec = self.spec
        geometry = self.geometry
        eta = trivialization_report(spec, geometry)
        indices = eta
        if optimize and spec.conformal_basis:
            _, optimized = optimize_trivialization(spec, geometry)
            indices = combine_reports(eta, optimized)
        logger.info(
            f"Indices: df_w={indices.df_w:.6g} df_s>={indices.df_s:.6g} "
            f"s_w={indices.s_w:.6g} s_s<={indices.s_s:.6g}"
        )

        interior = InteriorPshOracle(spec, self.points)
        exterior = ExteriorPshOracle(spec, self.points)
        interior_exponent = oracle_exponent_search(spec, Side.INTERIOR, oracle=interior)
        exterior_exponent = oracle_exponent_search(spec, Side.EXTERIOR, oracle=exterior)
        margin = strong_oka_margin(spec, oracle=interior)

        consistency = self.consistency(eta, interior_exponent, exterior_exponent, margin)
        if not consistency.ok:
            logger.warning(f"Consistency checks failed: {consistency.to_dict()}")

        manifest = RunManifest(self.config_path, spec, duration=time() - start_time)
        logger.info(f"Time taken: {manifest.duration:.2f} seconds")
        return AnalysisResult(
            manifest=manifest,
            indices=indices,
            eta_indices=eta,
            interior_exponent=interior_exponent,
            exterior_exponent=exterior_exponent,
            consistency=consistency,
            geometry=geometry,
        )

    def certify(self) -> AnalysisResult:
        """The consistency checks alone, with eta_rho and no optimizer."""
        return self.run(optimize=False)

    def consistency(
        self,
        eta: IndexReport,
        interior_exponent: float,
        exterior_exponent: float,
        margin: float,
    ) -> Consistency:
        oracle = self.spec.oracle
        theorem1_ok = bool(
            interior_exponent <= eta.df_w + 2 * oracle.interior.bisect_tol
            and eta.s_w <= exterior_exponent + 2 * oracle.exterior.bisect_tol
        )
        weak = [item for item in self.geometry if item.is_weak]
        defect = max((item.forms.hermitian_defect for item in weak), default=0.0)
        strong_oka_ok = True
        if margin > STRONG_OKA_TOL:
            smallest = min(
                (float(np.linalg.eigvalsh(item.forms.A)[0]) for item in weak), default=np.inf
            )
            strong_oka_ok = smallest >= margin - STRONG_OKA_TOL
        return Consistency(
            theorem1_ok=theorem1_ok,
            boas_straube_max_defect=defect,
            strong_oka_margin=margin,
            strong_oka_ok=strong_oka_ok,
            indices_agree=eta.indices_agree,
        )
