"""
Boundary geometry of M = {rho = 0}.

Points are projected onto M by Newton's method, each boundary point gets a
unitary frame whose last axis is the complex normal, and in that frame the
Levi form, its null space and the D'Angelo forms of the trivialization
eta_rho = (d rho - dbar rho)/2 are read off Wirtinger jets of rho.

Hermitian forms on Null are stored as matrices M[a, b] = form(X_a, conj(X_b))
where X_a = sum_j null_basis[j, a] d/dw_j; with this convention the
rank-one term omega ^ conj(omega) is the matrix v v*.
"""

from dataclasses import dataclass
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from loguru import logger
from numpy.typing import NDArray

from crindex.config import DomainSpec
from crindex.errors import (
    EigenSolverError,
    ExprDomainError,
    NullSpaceError,
    ProjectionError,
    PseudoconvexityError,
    SamplerStarvationError,
)
from crindex.parallel import ordered_map
from crindex.wjet import WJet, jet_lift

GRADIENT_FLOOR = 1e-14
DEDUP_DISTANCE = 1e-6
MAX_SAMPLING_ROUNDS = 4
MARGINAL_FACTOR = 10.0


@dataclass(frozen=True)
class BoundaryPoint:
    p: Tuple[complex, ...]
    grad_norm: float

    def as_array(self) -> NDArray:
        return np.asarray(self.p, dtype=complex)


@dataclass(frozen=True, eq=False)
class UnitaryFrame:
    """
    Adapted frame at a boundary point: w = U* (z - p).

    `normal_index` is the 1-based coordinate carrying the complex normal.
    """

    U: NDArray
    normal_index: int


@dataclass(frozen=True, eq=False)
class LeviData:
    levi: NDArray
    eigvals: NDArray
    eigvecs: NDArray
    null_basis: NDArray
    pseudoconvex: bool
    marginal: bool

    @property
    def null_dim(self) -> int:
        return int(self.null_basis.shape[1])


@dataclass(frozen=True, eq=False)
class FormPair:
    """
    omega and dbar_b omega restricted to Null at one boundary point.

    Attributes:
        v: omega evaluated on the null basis, shape (r,)
        A: Symmetrized dbar_b omega on the null basis, shape (r, r)
        hermitian_defect: ||A - A*|| / (1 + ||A||) before symmetrization
    """

    v: NDArray
    A: NDArray
    hermitian_defect: float

    @property
    def null_dim(self) -> int:
        return int(self.v.shape[0])


@dataclass(frozen=True, eq=False)
class PointGeometry:
    """Everything crgeom knows about one boundary sample."""

    point: BoundaryPoint
    frame: UnitaryFrame
    levi: LeviData
    forms: Optional[FormPair]

    @property
    def is_weak(self) -> bool:
        return self.levi.null_dim > 0


def _rho_jet(spec: DomainSpec, point: Sequence[complex], order: int) -> WJet:
    return jet_lift(spec.rho, point, order)


def project_to_boundary(spec: DomainSpec, q0: Sequence[complex]) -> BoundaryPoint:
    """
    Newton projection q <- q - rho(q) grad rho(q) / |grad rho(q)|^2 onto M.

    In Wirtinger terms the real gradient is 2 d rho/dzbar and
    |grad rho|^2 = 4 |d rho|^2.

    Args:
        spec: Domain specification
        q0: Starting point in C^n

    Returns:
        BoundaryPoint: Converged point with |rho| <= newton_tol (1 + |d rho|)

    Raises:
        ProjectionError: On a vanishing gradient, a point outside the domain of
            rho or non-convergence within max_newton_iters
    """
    sampling = spec.sampling
    q = np.asarray(q0, dtype=complex)
    if q.shape != (spec.n,):
        raise ProjectionError(f"starting point must have {spec.n} coordinates")
    for _ in range(sampling.max_newton_iters + 1):
        try:
            jet = _rho_jet(spec, q, 2)
        except ExprDomainError as e:
            raise ProjectionError(f"rho undefined along the Newton path: {e}") from e
        value = jet.value.real
        dz = jet.holomorphic_gradient()
        grad_norm = float(np.linalg.norm(dz))
        if not np.isfinite(value) or not np.isfinite(grad_norm):
            raise ProjectionError("rho is not finite along the Newton path")
        if grad_norm <= GRADIENT_FLOOR:
            raise ProjectionError(f"gradient of rho vanishes at {q.tolist()}")
        if abs(value) <= sampling.newton_tol * (1.0 + grad_norm):
            return BoundaryPoint(tuple(complex(c) for c in q), grad_norm)
        q = q - value * np.conj(dz) / (2.0 * grad_norm**2)
    raise ProjectionError(
        f"Newton projection did not converge in {sampling.max_newton_iters} iterations"
    )


def _try_project(spec: DomainSpec, q0: NDArray) -> Optional[BoundaryPoint]:
    try:
        return project_to_boundary(spec, q0)
    except ProjectionError:
        return None


def sample_boundary(spec: DomainSpec) -> List[BoundaryPoint]:
    """
    Draw `sampling.count` boundary points, deterministically for a fixed seed.

    Configured anchors are projected first; the rest come from uniform draws
    in the real box [-R, R]^{2n}, projected and de-duplicated.

    Raises:
        SamplerStarvationError: If fewer than count/4 points were found
    """
    sampling = spec.sampling
    n = spec.n
    rng = np.random.default_rng(sampling.seed)
    points: List[BoundaryPoint] = []
    arrays: List[NDArray] = []

    def accept(bp: Optional[BoundaryPoint]) -> None:
        if bp is None or len(points) >= sampling.count:
            return
        p = bp.as_array()
        # Skip points already found from another start
        if arrays and np.min(np.linalg.norm(np.asarray(arrays) - p, axis=1)) < DEDUP_DISTANCE:
            return
        points.append(bp)
        arrays.append(p)

    # Anchors first so that measure-zero weak sets are always represented
    for anchor in sampling.anchors:
        bp = _try_project(spec, np.asarray(anchor, dtype=complex))
        if bp is None:
            logger.warning(f"Anchor {list(anchor)} did not project onto the boundary")
        accept(bp)

    project = partial(_try_project, spec)
    for _ in range(MAX_SAMPLING_ROUNDS):
        if len(points) >= sampling.count:
            break
        # One batch of uniform draws in the box, projected in draw order
        draws = rng.uniform(-sampling.box_radius, sampling.box_radius, size=(sampling.count, 2 * n))
        candidates = draws[:, :n] + 1j * draws[:, n:]
        for bp in ordered_map(project, list(candidates), spec.workers):
            accept(bp)

    if len(points) < sampling.count / 4:
        raise SamplerStarvationError(
            f"only {len(points)} of {sampling.count} boundary points found; "
            f"does the zero set of rho meet the box of radius {sampling.box_radius}?"
        )
    if len(points) < sampling.count:
        logger.warning(f"Sampler found {len(points)} of {sampling.count} boundary points")
    logger.info(f"Sampled {len(points)} boundary points (seed {sampling.seed})")
    return points


def householder_frame(direction: NDArray) -> NDArray:
    """
    Unitary U with U e_n = direction (a unit vector).

    A complex Householder reflection maps the phase-aligned axis
    e^{i phi} e_n onto `direction`; a diagonal phase fixes the last column.
    """
    u = np.asarray(direction, dtype=complex)
    n = u.shape[0]
    phase = np.exp(1j * np.angle(u[-1])) if abs(u[-1]) > 0 else 1.0 + 0j
    e = np.zeros(n, dtype=complex)
    e[-1] = phase
    w = u - e
    h = np.eye(n, dtype=complex)
    norm2 = float(np.vdot(w, w).real)
    if norm2 > 1e-30:
        h -= 2.0 * np.outer(w, np.conj(w)) / norm2
    d = np.eye(n, dtype=complex)
    d[-1, -1] = phase
    return h @ d


def adapted_frame(spec: DomainSpec, p: BoundaryPoint, jet: Optional[WJet] = None) -> UnitaryFrame:
    """
    Frame with d rho/dw_j(0) = 0 for j < n and d rho/dw_n(0) = |d rho| > 0.

    The last column of U is (d rho/dzbar_1, ..., d rho/dzbar_n) / |d rho|.
    """
    jet = jet if jet is not None else _rho_jet(spec, p.p, 2)
    dzbar = np.conj(jet.holomorphic_gradient())
    return UnitaryFrame(householder_frame(dzbar / np.linalg.norm(dzbar)), spec.n)


def _hermitian_eigh(matrix: NDArray) -> Tuple[NDArray, NDArray]:
    if not np.all(np.isfinite(matrix)):
        raise EigenSolverError("non-finite entries in hermitian matrix")
    try:
        return scipy.linalg.eigh(0.5 * (matrix + matrix.conj().T))
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenSolverError(f"eigen-solver failure: {e}") from e


def levi_data(
    spec: DomainSpec, p: BoundaryPoint, frame: UnitaryFrame, jet: Optional[WJet] = None
) -> LeviData:
    """
    Levi form d^2 rho/dw_j dwbar_k(0), j, k < n, in the adapted frame.

    The null basis collects eigenvectors with eigenvalue below
    null_eig_rel_tol * max(1, largest eigenvalue). Eigenvectors are taken for
    the transposed matrix so that columns are coefficient vectors of tangent
    vectors (see module docstring).
    """
    tol = spec.tolerances
    n = spec.n
    jet = jet if jet is not None else _rho_jet(spec, p.p, 2)
    levi = jet.pullback(frame.U).complex_hessian()[: n - 1, : n - 1]
    eigvals, eigvecs = _hermitian_eigh(levi.T)
    scale = max(1.0, float(eigvals[-1]))
    cut = tol.null_eig_rel_tol * scale
    null_mask = eigvals <= cut
    pseudoconvex = bool(eigvals[0] >= -tol.psd_tol * scale)
    positive = eigvals[eigvals > cut]
    marginal = bool(positive.size and positive[0] <= MARGINAL_FACTOR * cut)
    if marginal:
        logger.warning(f"Marginal null-space cut at {list(p.p)}: eigenvalues {eigvals}")
    return LeviData(
        levi=levi,
        eigvals=eigvals,
        eigvecs=eigvecs,
        null_basis=eigvecs[:, null_mask],
        pseudoconvex=pseudoconvex,
        marginal=marginal,
    )


def dangelo_forms(
    spec: DomainSpec,
    p: BoundaryPoint,
    frame: UnitaryFrame,
    levi: LeviData,
    jet: Optional[WJet] = None,
) -> FormPair:
    """
    omega_rho and dbar_b omega_rho on Null from the order-3 jet of rho.

    With g = d rho/dwbar_n in the adapted frame, omega = d log g and
    dbar_b omega = -d dbar log g, i.e.

        v_j   = g_{w_j} / g
        A_jk  = -(g_{w_j wbar_k} g - g_{w_j} g_{wbar_k}) / g^2

    both contracted with the null basis.

    Raises:
        NullSpaceError: If the null space is trivial or g vanishes
    """
    if levi.null_dim == 0:
        raise NullSpaceError("D'Angelo forms need a nontrivial null space")
    n = spec.n
    jet = jet if jet is not None and jet.order >= 3 else _rho_jet(spec, p.p, 3)
    t = jet.pullback(frame.U).tensors
    nbar = 2 * n - 1
    g = complex(t[1][nbar])
    if g == 0:
        raise NullSpaceError(f"d rho/dwbar_n vanishes at {list(p.p)}")
    g_w = t[2][: n - 1, nbar]
    g_wbar = t[2][n : 2 * n - 1, nbar]
    g_wwbar = t[3][: n - 1, n : 2 * n - 1, nbar]

    omega = g_w / g
    dbar_omega = -(g_wwbar * g - np.outer(g_w, g_wbar)) / g**2

    basis = levi.null_basis
    v = basis.T @ omega
    a = basis.T @ dbar_omega @ np.conj(basis)
    defect = float(np.linalg.norm(a - a.conj().T) / (1.0 + np.linalg.norm(a)))
    return FormPair(v=v, A=0.5 * (a + a.conj().T), hermitian_defect=defect)


def analyse_point(spec: DomainSpec, p: BoundaryPoint) -> PointGeometry:
    """Frame, Levi data and (at weak points) D'Angelo forms of one sample."""
    jet = _rho_jet(spec, p.p, 3)
    frame = adapted_frame(spec, p, jet)
    levi = levi_data(spec, p, frame, jet)
    forms = dangelo_forms(spec, p, frame, levi, jet) if levi.null_dim else None
    return PointGeometry(point=p, frame=frame, levi=levi, forms=forms)


def analyse_points(spec: DomainSpec, points: Sequence[BoundaryPoint]) -> List[PointGeometry]:
    """
    Geometry of every sample, in sample order.

    Raises:
        PseudoconvexityError: On the first sample with a negative Levi eigenvalue
    """
    geometry = ordered_map(partial(analyse_point, spec), points, spec.workers)
    for item in geometry:
        if not item.levi.pseudoconvex:
            raise PseudoconvexityError(
                f"boundary is not pseudoconvex at {list(item.point.p)}: "
                f"Levi eigenvalues {item.levi.eigvals.tolist()}",
                item.point.p,
            )
    weak = sum(item.is_weak for item in geometry)
    logger.info(f"{weak} of {len(geometry)} samples are weakly pseudoconvex")
    return geometry
