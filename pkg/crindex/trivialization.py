"""
Search over conformal trivializations e^u eta_rho, u = sum_i c_i basis_i.

The forms transform affinely in u, so every weak sample stores its eta_rho
forms together with the contribution of each basis function; one evaluation
of the objective is then a handful of batched eigenvalue problems.
"""

from dataclasses import dataclass
from functools import partial
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize
from loguru import logger
from numpy.typing import NDArray

from crindex.config import DomainSpec, Tolerances
from crindex.crgeom import PointGeometry
from crindex.indices import (
    IndexReport,
    PointThreshold,
    build_report,
    conformal_transform,
    df_gammas,
    point_threshold,
    steinness_gammas,
)
from crindex.parallel import ordered_map
from crindex.wjet import WJet, jet_lift

OBJECTIVES = ("df", "s")


class FamilyScore(NamedTuple):
    df_w: float
    df_s: float
    s_w: float
    s_s: float
    strict_fraction_df: float
    strict_fraction_s: float


@dataclass(frozen=True, eq=False)
class _WeakBlock:
    """Weak samples sharing one null dimension r."""

    v0: NDArray  # (P, r)
    a0: NDArray  # (P, r, r)
    dv: NDArray  # (k, P, r)
    da: NDArray  # (k, P, r, r)


def basis_jet(spec: DomainSpec, geometry: PointGeometry, coeffs: Sequence[float]) -> WJet:
    """Order-2 jet of u = sum c_i basis_i at a sample, in its adapted frame."""
    point = geometry.point.p
    u = WJet.constant(0.0, spec.n, 2, point)
    for c, ast in zip(coeffs, spec.conformal_basis):
        if c != 0:
            u = u + float(c) * jet_lift(ast, point, 2)
    return u.pullback(geometry.frame.U)


def _basis_contributions(spec: DomainSpec, item: PointGeometry) -> Tuple[NDArray, NDArray]:
    n = spec.n
    basis = item.levi.null_basis
    dv, da = [], []
    for ast in spec.conformal_basis:
        jet = jet_lift(ast, item.point.p, 2).pullback(item.frame.U)
        dv.append(basis.T @ jet.holomorphic_gradient()[: n - 1])
        da.append(-(basis.T @ jet.complex_hessian()[: n - 1, : n - 1] @ np.conj(basis)))
    r = item.levi.null_dim
    k = len(spec.conformal_basis)
    return (
        np.asarray(dv, dtype=complex).reshape(k, r),
        np.asarray(da, dtype=complex).reshape(k, r, r),
    )


class ConformalFamily:
    """
    The family {e^u eta_rho} restricted to the weak samples of one run.

    Args:
        spec: Domain specification (supplies basis and tolerances)
        geometry: Output of analyse_points
    """

    def __init__(self, spec: DomainSpec, geometry: Sequence[PointGeometry]):
        self.spec = spec
        self.tolerances: Tolerances = spec.tolerances
        self.dimension = len(spec.conformal_basis)
        weak = [item for item in geometry if item.is_weak]
        self.n_weak = len(weak)
        # d v and d A per basis function, one pair per weak point
        contributions = ordered_map(partial(_basis_contributions, spec), weak, spec.workers)

        # Stack points by null dimension so each block is one batched eigenproblem
        groups: Dict[int, List[int]] = {}
        for idx, item in enumerate(weak):
            groups.setdefault(item.levi.null_dim, []).append(idx)
        self.blocks: List[_WeakBlock] = []
        for r, members in sorted(groups.items()):
            self.blocks.append(
                _WeakBlock(
                    v0=np.stack([weak[i].forms.v for i in members]),
                    a0=np.stack([weak[i].forms.A for i in members]),
                    dv=np.stack([contributions[i][0] for i in members], axis=1),
                    da=np.stack([contributions[i][1] for i in members], axis=1),
                )
            )

    def __repr__(self):
        return f"ConformalFamily(basis={self.dimension}, weak={self.n_weak})"

    def score(self, coeffs: Sequence[float]) -> FamilyScore:
        """Aggregated indices of e^u eta_rho for the given coefficients."""
        if self.n_weak == 0:
            return FamilyScore(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        c = np.asarray(coeffs, dtype=float).reshape(self.dimension)
        gamma_df, df_strict, gamma_s, s_strict = [], [], [], []
        for block in self.blocks:
            v = block.v0 + np.einsum("k,kpr->pr", c, block.dv)
            a = block.a0 + np.einsum("k,kprs->prs", c, block.da)
            a = 0.5 * (a + np.conj(np.swapaxes(a, 1, 2)))
            g, strict = df_gammas(a, v, self.tolerances)
            gamma_df.append(g)
            df_strict.append(strict)
            g, strict = steinness_gammas(a, v, self.tolerances)
            gamma_s.append(g)
            s_strict.append(strict)
        gamma_df = np.concatenate(gamma_df)
        gamma_s = np.concatenate(gamma_s)
        df_strict = np.concatenate(df_strict)
        s_strict = np.concatenate(s_strict)
        df_w = float(np.min(gamma_df))
        s_w = float(np.max(gamma_s))
        return FamilyScore(
            df_w=df_w,
            df_s=df_w if df_strict.all() else 0.0,
            s_w=s_w,
            s_s=s_w if s_strict.all() else np.inf,
            strict_fraction_df=float(np.mean(df_strict)),
            strict_fraction_s=float(np.mean(s_strict)),
        )

    def objective(self, coeffs: Sequence[float], objective: str = "df") -> float:
        """
        Value to maximize.

        df: df_w + df_s + strict_margin * (fraction of weak points with A' > 0)
        s:  1/s_w + 1/s_s + strict_margin * (fraction strictly Steinness-feasible)
        """
        score = self.score(coeffs)
        margin = self.tolerances.strict_margin
        if objective == "df":
            return score.df_w + score.df_s + margin * score.strict_fraction_df
        return 1.0 / score.s_w + 1.0 / score.s_s + margin * score.strict_fraction_s


def _point_threshold(
    spec: DomainSpec, coeffs: Tuple[float, ...], item: PointGeometry
) -> PointThreshold:
    if not item.is_weak:
        return PointThreshold.vacuous(item.levi.marginal)
    forms = item.forms
    if any(coeffs):
        forms = conformal_transform(forms, basis_jet(spec, item, coeffs), item.levi.null_basis)
    return point_threshold(forms, spec.tolerances, item.levi.marginal)


def trivialization_report(
    spec: DomainSpec, geometry: Sequence[PointGeometry], coeffs: Sequence[float] = ()
) -> IndexReport:
    """
    IndexReport of e^u eta_rho over the samples; empty `coeffs` is eta_rho itself.
    """
    coeffs = tuple(float(c) for c in coeffs)
    thresholds = ordered_map(partial(_point_threshold, spec, coeffs), geometry, spec.workers)
    report = build_report([(item.point, t) for item, t in zip(geometry, thresholds)], coeffs)
    logger.debug(f"Trivialization {list(coeffs)}: {report!r}")
    return report


def optimize_trivialization(
    spec: DomainSpec,
    geometry: Sequence[PointGeometry],
    objective: Optional[str] = None,
    budget: Optional[int] = None,
) -> Tuple[Tuple[float, ...], IndexReport]:
    """
    Maximize the aggregated indices over u in span(conformal_basis).

    Nelder-Mead runs from the zero vector and from `optimizer.restarts`
    seeded normal draws share the evaluation budget. The best point ever
    evaluated is kept, so the zero vector (eta_rho) is a floor.

    Args:
        spec: Domain specification
        geometry: Output of analyse_points
        objective: "df" or "s" (defaults to optimizer.objective)
        budget: Total number of objective evaluations (defaults to optimizer.budget)

    Returns:
        Tuple[Tuple[float, ...], IndexReport]: Best coefficients and their report

    Raises:
        ValueError: For an unknown objective or a budget below 1
    """
    objective = objective or spec.optimizer.objective
    budget = spec.optimizer.budget if budget is None else budget
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    if budget < 1:
        raise ValueError("budget must be at least 1")

    k = len(spec.conformal_basis)
    if k == 0:
        logger.info("Empty conformal basis; reporting eta_rho")
        return (), trivialization_report(spec, geometry)

    family = ConformalFamily(spec, geometry)
    rng = np.random.default_rng(spec.sampling.seed)
    starts = [np.zeros(k)] + [rng.normal(size=k) for _ in range(spec.optimizer.restarts)]
    per_run = max(1, budget // len(starts))

    best_value = -np.inf
    best_coeffs = np.zeros(k)
    evaluations = 0

    def negated(c: NDArray) -> float:
        nonlocal best_value, best_coeffs, evaluations
        evaluations += 1
        value = family.objective(c, objective)
        if value > best_value:
            best_value, best_coeffs = value, np.array(c, dtype=float)
        return -value

    exhausted = 0
    for x0 in starts:
        if evaluations >= budget:
            break
        result = scipy.optimize.minimize(
            negated,
            x0,
            method="Nelder-Mead",
            options={"maxfev": per_run, "xatol": 1e-8, "fatol": 1e-12},
        )
        exhausted += int(not result.success)
    if exhausted == len(starts):
        logger.warning(f"Optimizer used its whole budget of {budget} evaluations")

    coeffs = tuple(float(c) for c in best_coeffs)
    logger.info(f"Best trivialization coefficients {list(coeffs)} ({objective}: {best_value:.6f})")
    return coeffs, trivialization_report(spec, geometry, coeffs)
