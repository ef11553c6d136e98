"""
Index thresholds on Null.

At a weak boundary point the DF condition for an exponent gamma in (0, 1) is

    A - t v v* >= 0,   t = gamma / (1 - gamma),

and the Steinness condition for gamma > 1 is

    -A - s v v* >= 0,  s = gamma / (gamma - 1),

with (A, v) the FormPair of the chosen trivialization. Both reduce to the
rank-one kernel `rank_one_threshold`.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from crindex.config import Tolerances
from crindex.crgeom import BoundaryPoint, FormPair
from crindex.wjet import WJet

INADMISSIBLE = -1.0


class RankOneThreshold(NamedTuple):
    t_max: float
    range_ok: bool


class DfPart(NamedTuple):
    gamma_df: float
    df_strict_ok: bool


class SteinnessPart(NamedTuple):
    gamma_s: float
    s_strict_ok: bool


@dataclass(frozen=True)
class PointThreshold:
    gamma_df: float
    gamma_s: float
    df_strict_ok: bool
    s_strict_ok: bool
    marginal: bool = False
    null_dim: int = 0
    definite_negative: bool = False

    @staticmethod
    def vacuous(marginal: bool = False) -> "PointThreshold":
        """Threshold of a strictly pseudoconvex point (Null = 0)."""
        return PointThreshold(1.0, 1.0, True, True, marginal, 0, True)


@dataclass
class IndexReport:
    """
    Aggregated index estimates for one trivialization e^u eta_rho.

    df_w and df_s are lower bounds for the suprema in the DF indices of M,
    s_w and s_s upper bounds for the infima in the Steinness indices.
    """

    df_w: float
    df_s: float
    s_w: float
    s_s: float
    per_point: List[Tuple[BoundaryPoint, PointThreshold]] = field(default_factory=list)
    trivialization_coeffs: Tuple[float, ...] = ()
    n_weak_points: int = 0
    pseudoconvex: bool = True
    definite_positive: bool = True
    definite_negative: bool = True
    sources: Dict[str, str] = field(default_factory=dict)

    BOUNDS = {"df_w": "lower", "df_s": "lower", "s_w": "upper", "s_s": "upper"}

    @property
    def indices_agree(self) -> bool:
        """Either definiteness direction holds, so strong and weak indices coincide."""
        return self.definite_positive or self.definite_negative

    def __repr__(self):
        return (
            f"IndexReport(df_w={self.df_w}, df_s={self.df_s}, s_w={self.s_w}, "
            f"s_s={self.s_s}, weak={self.n_weak_points})"
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "df_w": self.df_w,
            "df_s_lower": self.df_s,
            "s_w": self.s_w,
            "s_s_upper": self.s_s,
            "bounds": dict(self.BOUNDS),
            "trivialization_coeffs": [float(c) for c in self.trivialization_coeffs],
            "n_weak_points": int(self.n_weak_points),
            "definite_positive": bool(self.definite_positive),
            "definite_negative": bool(self.definite_negative),
            "indices_agree": bool(self.indices_agree),
            "sources": dict(self.sources),
        }


def gamma_from_t(t: ArrayLike) -> NDArray:
    """
    gamma = t / (1 + t) elementwise: inf maps to 1 and INADMISSIBLE to 0.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(np.isinf(t), 1.0, t / (1.0 + t))
    return np.where(t == INADMISSIBLE, 0.0, gamma)


def gamma_from_s(s: ArrayLike) -> NDArray:
    """
    gamma = s / (s - 1) elementwise for s > 1, inf maps to 1.

    s <= 1 (INADMISSIBLE included) admits no Steinness exponent and maps to inf.
    """
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(s > 1.0, s / (s - 1.0), np.inf)
    return np.where(np.isinf(s), 1.0, gamma)


def _scale(eigvals: NDArray) -> NDArray:
    return np.maximum(1.0, np.max(np.abs(eigvals), axis=-1))


def rank_one_thresholds(
    a: NDArray, v: NDArray, psd_tol: float
) -> Tuple[NDArray, NDArray]:
    """
    Batched rank_one_threshold over stacks a (P, r, r) and v (P, r).

    Returns:
        Tuple[NDArray, NDArray]: t_max (P,) with INADMISSIBLE as sentinel, and
            range_ok (P,)
    """
    a = np.asarray(a, dtype=complex)
    v = np.asarray(v, dtype=complex)
    count, r = v.shape
    if r == 0:
        return np.full(count, np.inf), np.ones(count, dtype=bool)
    eigvals, eigvecs = np.linalg.eigh(a)
    scale = _scale(eigvals)
    inadmissible = eigvals[:, 0] < -psd_tol * scale

    components = np.abs(np.einsum("pji,pj->pi", np.conj(eigvecs), v)) ** 2
    v_norm = np.linalg.norm(v, axis=1)
    near_null = eigvals <= (psd_tol * scale)[:, None]
    null_component = np.sqrt(np.sum(np.where(near_null, components, 0.0), axis=1))
    in_range = null_component <= psd_tol * np.maximum(1.0, v_norm)
    safe = np.where(near_null, 1.0, eigvals)
    quadratic = np.sum(np.where(near_null, 0.0, components / safe), axis=1)

    vanishing = v_norm <= psd_tol
    with np.errstate(divide="ignore"):
        t_max = np.where(quadratic > 0, 1.0 / np.where(quadratic > 0, quadratic, 1.0), np.inf)
    t_max = np.where(in_range, t_max, 0.0)
    t_max = np.where(vanishing, np.inf, t_max)
    t_max = np.where(inadmissible, INADMISSIBLE, t_max)
    range_ok = ~inadmissible & (in_range | vanishing)
    return t_max, range_ok


def rank_one_threshold(a: NDArray, v: NDArray, psd_tol: float) -> RankOneThreshold:
    """
    sup{t >= 0 : A - t v v* >= -psd_tol} for hermitian A.

    Args:
        a: Hermitian r x r matrix
        v: Vector of length r
        psd_tol: Tolerance, scaled by max(1, largest |eigenvalue|)

    Returns:
        RankOneThreshold: t_max = INADMISSIBLE when A itself is not PSD,
            inf when v vanishes, 1/(v* A^+ v) when v lies in the range of A,
            and 0 otherwise
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.shape[0] == 0:
        return RankOneThreshold(np.inf, True)
    t_max, range_ok = rank_one_thresholds(a[None], v[None], psd_tol)
    return RankOneThreshold(float(t_max[0]), bool(range_ok[0]))


def _strictly_positive(a: NDArray, margin: float) -> NDArray:
    """Batched test min eig(A) > margin * scale; vacuous for r = 0."""
    if a.shape[-1] == 0:
        return np.ones(a.shape[0], dtype=bool)
    eigvals = np.linalg.eigvalsh(a)
    return eigvals[:, 0] > margin * _scale(eigvals)


def df_gammas(a: NDArray, v: NDArray, tol: Tolerances) -> Tuple[NDArray, NDArray]:
    """Batched df_threshold: (gamma_df, df_strict_ok) per instance."""
    t_max, _ = rank_one_thresholds(a, v, tol.psd_tol)
    return gamma_from_t(t_max), _strictly_positive(a, tol.strict_margin)


def steinness_gammas(a: NDArray, v: NDArray, tol: Tolerances) -> Tuple[NDArray, NDArray]:
    """Batched steinness_threshold: (gamma_s, s_strict_ok) per instance."""
    s_max, _ = rank_one_thresholds(-a, v, tol.psd_tol)
    strict = _strictly_positive(-a, tol.strict_margin) & (s_max > 1.0)
    return gamma_from_s(s_max), strict


def definite_negative(a: NDArray, v: NDArray, tol: Tolerances) -> NDArray:
    """Batched test A + v v* < 0 (Steinness finiteness criterion)."""
    rank_one = np.einsum("pi,pj->pij", v, np.conj(v))
    return _strictly_positive(-(a + rank_one), tol.strict_margin)


def df_threshold(fp: FormPair, tol: Tolerances) -> DfPart:
    """
    Supremal admissible DF exponent at one point.

    gamma_df = t_max / (1 + t_max) (inf -> 1, inadmissible -> 0);
    df_strict_ok when A is positive definite on Null (or Null = 0).
    """
    gamma, strict = df_gammas(fp.A[None], fp.v[None], tol)
    return DfPart(float(gamma[0]), bool(strict[0]))


def steinness_threshold(fp: FormPair, tol: Tolerances) -> SteinnessPart:
    """
    Infimal admissible Steinness exponent at one point.

    With s_max the rank-one threshold of -A: gamma_s = inf if -A is not PSD
    or s_max <= 1, gamma_s = 1 if s_max = inf, else s_max / (s_max - 1).
    """
    gamma, strict = steinness_gammas(fp.A[None], fp.v[None], tol)
    return SteinnessPart(float(gamma[0]), bool(strict[0]))


def point_threshold(fp: FormPair, tol: Tolerances, marginal: bool = False) -> PointThreshold:
    df = df_threshold(fp, tol)
    st = steinness_threshold(fp, tol)
    negative = definite_negative(fp.A[None], fp.v[None], tol)
    return PointThreshold(
        gamma_df=df.gamma_df,
        gamma_s=st.gamma_s,
        df_strict_ok=df.df_strict_ok,
        s_strict_ok=st.s_strict_ok,
        marginal=marginal,
        null_dim=fp.null_dim,
        definite_negative=bool(negative[0]),
    )


def conformal_transform(fp: FormPair, u_jet: WJet, null_basis: NDArray) -> FormPair:
    """
    Forms of the trivialization e^u eta from those of eta.

    omega' = omega + d_b u and dbar_b omega' = dbar_b omega - d_b dbar_b u on
    Null, u = log|phi| real. The transform is affine in u.

    Args:
        fp: Forms of eta
        u_jet: Order >= 2 jet of u at the point, in the adapted frame
        null_basis: Null basis the FormPair is expressed in

    Returns:
        FormPair: Transformed and symmetrized forms
    """
    n = u_jet.n
    gradient = u_jet.holomorphic_gradient()[: n - 1]
    hessian = u_jet.complex_hessian()[: n - 1, : n - 1]
    v = fp.v + null_basis.T @ gradient
    a = fp.A - null_basis.T @ hessian @ np.conj(null_basis)
    return FormPair(v=v, A=0.5 * (a + a.conj().T), hermitian_defect=fp.hermitian_defect)


def aggregate_indices(
    thresholds: Sequence[PointThreshold],
) -> Tuple[float, float, float, float]:
    """
    Combine per-point thresholds into (df_w, df_s, s_w, s_s).

    Only weak points (null_dim > 0) constrain the indices. df_s collapses to 0
    and s_s to inf as soon as one weak point is not strictly feasible.
    """
    weak = [t for t in thresholds if t.null_dim > 0]
    if not weak:
        return 1.0, 1.0, 1.0, 1.0
    df_w = min(t.gamma_df for t in weak)
    s_w = max(t.gamma_s for t in weak)
    df_s = df_w if all(t.df_strict_ok for t in weak) else 0.0
    s_s = s_w if all(t.s_strict_ok for t in weak) else np.inf
    return float(df_w), float(df_s), float(s_w), float(s_s)


def build_report(
    per_point: Sequence[Tuple[BoundaryPoint, PointThreshold]],
    coeffs: Sequence[float] = (),
) -> IndexReport:
    thresholds = [t for _, t in per_point]
    df_w, df_s, s_w, s_s = aggregate_indices(thresholds)
    weak = [t for t in thresholds if t.null_dim > 0]
    return IndexReport(
        df_w=df_w,
        df_s=df_s,
        s_w=s_w,
        s_s=s_s,
        per_point=list(per_point),
        trivialization_coeffs=tuple(float(c) for c in coeffs),
        n_weak_points=len(weak),
        pseudoconvex=True,
        definite_positive=all(t.df_strict_ok for t in weak),
        definite_negative=all(t.definite_negative for t in weak),
    )


def combine_reports(eta: IndexReport, optimized: IndexReport) -> IndexReport:
    """
    Best bound per quantity over eta_rho and an optimized trivialization.

    Each index is a bound certified by one member of the family, so the
    largest DF values and the smallest Steinness values are kept. Per-point
    data and coefficients come from `optimized`; `sources` records which
    trivialization each quantity came from.
    """
    picks = {
        "df_w": optimized.df_w >= eta.df_w,
        "df_s": optimized.df_s >= eta.df_s,
        "s_w": optimized.s_w <= eta.s_w,
        "s_s": optimized.s_s <= eta.s_s,
    }
    values = {key: getattr(optimized if use else eta, key) for key, use in picks.items()}
    return IndexReport(
        **values,
        per_point=list(optimized.per_point),
        trivialization_coeffs=optimized.trivialization_coeffs,
        n_weak_points=optimized.n_weak_points,
        pseudoconvex=optimized.pseudoconvex,
        definite_positive=optimized.definite_positive or eta.definite_positive,
        definite_negative=optimized.definite_negative or eta.definite_negative,
        sources={key: "optimized" if use else "eta_rho" for key, use in picks.items()},
    )
