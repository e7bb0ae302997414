"""Critical-point geometry of the factorization objective.

Global-minimum versus strict-saddle classification, factor balancing, lifting of
centralized directions to the network, and the consensus/optimality metrics
reported by every run.
"""

import logging
from dataclasses import dataclass
from typing import (
    Callable,
    Literal,
    NamedTuple,
    Optional,
    Sequence,
)

import numpy as np
from numpy.typing import NDArray

from .constants import (
    EIG_MAX_ITERS,
    EIG_SHIFT_MARGIN,
    SEED_STREAMS,
    TOLERANCES,
)
from .errors import (
    ClassificationError,
    DegenerateFactorsError,
    DimensionMismatchError,
)
from .matkit import (
    DenseMatrix,
    frob_inner,
    frob_norm,
    reduced_svd,
    tail_energy,
)
from .objective import (
    DataPartition,
    FactorPair,
    NetworkPoint,
    f_value,
    grad_f,
    grad_f_block,
    hvp_f,
    hvp_g,
    quadform_f,
    quadform_g,
)
from .topology import GDWeights

logger = logging.getLogger(__name__)

Vector = NDArray[np.float64]
VerdictKind = Literal["GlobalMin", "StrictSaddle", "NotCritical"]

# ------------------------------------------------------------------------------
# ---- Metrics -----------------------------------------------------------------
# ------------------------------------------------------------------------------


def consensus_error(z: NetworkPoint) -> float:
    """max_j ||U^j - mean copy||_F; zero for J = 1."""
    if z.J == 1:
        return 0.0
    mean = z.mean_copy()
    return max(frob_norm(c - mean) for c in z.copies)


def opt_gap(p: FactorPair, y: DenseMatrix, floor: Optional[float] = None) -> float:
    """f(U, V) minus the rank-r optimum ||Y - Y_r||_F^2.

    Args:
        p: Factor pair of width r
        y: Data matrix
        floor: Precomputed ||Y - Y_r||_F^2, recomputed by SVD when omitted

    Returns:
        The gap, reported as 0 when within 1e-12 of zero
    """
    if floor is None:
        floor = tail_energy(y, p.r)
    gap = f_value(p, y) - floor
    if gap <= TOLERANCES.clip * (1.0 + floor):
        return 0.0
    return gap


def symmetric_gradient_residual(u: DenseMatrix, v_j: DenseMatrix, y_j: DenseMatrix) -> float:
    """|<grad_U f_j, U> - <grad_V f_j, V_j>| / (1 + |<grad_U f_j, U>|)."""
    if u.shape[0] != y_j.shape[0] or v_j.shape[0] != y_j.shape[1] or u.shape[1] != v_j.shape[1]:
        raise DimensionMismatchError(
            f"U {u.shape}, V_j {v_j.shape} do not factor Y_j {y_j.shape}"
        )
    g_u, g_v = grad_f_block(u, v_j, y_j)
    left = frob_inner(g_u, u)
    right = frob_inner(g_v, v_j)
    return abs(left - right) / (1.0 + abs(left))


# ------------------------------------------------------------------------------
# ---- Quadratic Forms ---------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric quadratic form given by its value and its matrix-vector product."""
    value: Callable[[Vector], float]
    matvec: Callable[[Vector], Vector]
    dim: int

    @classmethod
    def from_matrix(cls, a: DenseMatrix) -> "QuadraticForm":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatchError(f"Quadratic form needs a square matrix, got {a.shape}")
        return cls(value=lambda x: float(x @ a @ x), matvec=lambda x: a @ x, dim=a.shape[0])

    @classmethod
    def of_f(cls, p: FactorPair, y: DenseMatrix) -> "QuadraticForm":
        """Hessian form of f at `p` on vectors (vec U, vec V)."""
        return cls(
            value=lambda x: quadform_f(p, p.from_vector(x), y),
            matvec=lambda x: hvp_f(p, p.from_vector(x), y).to_vector(),
            dim=p.dim,
        )

    @classmethod
    def of_g(cls, z: NetworkPoint, w: GDWeights, d: DataPartition) -> "QuadraticForm":
        """Hessian form of g at `z` on NetworkPoint vectors."""
        shape = z.shape
        return cls(
            value=lambda x: quadform_g(z, shape.from_vector(x), w, d),
            matvec=lambda x: hvp_g(z, shape.from_vector(x), w, d).to_vector(),
            dim=shape.dim,
        )


class EigenEstimate(NamedTuple):
    """Smallest Rayleigh quotient found and the unit direction attaining it."""
    value: float
    witness: Vector
    converged: bool


def _sign_fix(x: Vector) -> Vector:
    nonzero = np.flatnonzero(np.abs(x) > TOLERANCES.rank)
    if nonzero.size and x[nonzero[0]] < 0:
        return -x
    return x


def _dominant_magnitude(form: QuadraticForm, x: Vector, iters: int) -> float:
    """Largest |eigenvalue| estimate by plain power iteration."""
    estimate = 0.0
    for _ in range(iters):
        y = form.matvec(x)
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        x = y / norm
        if abs(norm - estimate) <= TOLERANCES.eig_stable * norm:
            return norm
        estimate = norm
    return estimate


def min_quadform_eig(
    form: QuadraticForm,
    iters: int = EIG_MAX_ITERS,
    seed: int = 0,
) -> EigenEstimate:
    """Estimate the smallest eigenvalue of a symmetric quadratic form.

    Runs power iteration on s I - A, where the shift s is a margin above the
    dominant-magnitude estimate of A. The returned value is the Rayleigh quotient
    form.value(witness) of the unit witness, so it never lies below the true
    minimum eigenvalue.

    Args:
        form: Symmetric quadratic form
        iters: Iteration cap for each of the two power iterations
        seed: Seed of the starting direction

    Returns:
        EigenEstimate; `converged` is False when the cap was hit before the
        Rayleigh quotient stabilized (a warning is logged as well)
    """
    if form.dim < 1:
        raise ValueError(f"Quadratic form dimension must be positive, got {form.dim}")
    if iters < 1:
        raise ValueError(f"iters must be positive, got {iters}")

    rng = np.random.default_rng([seed, SEED_STREAMS.eig])
    x = rng.standard_normal(form.dim)
    x /= np.linalg.norm(x)

    shift = EIG_SHIFT_MARGIN * _dominant_magnitude(form, x, iters)
    if shift == 0.0:
        return EigenEstimate(value=form.value(x), witness=_sign_fix(x), converged=True)

    ax = form.matvec(x)
    rayleigh = float(x @ ax)
    change = np.inf
    converged = False
    for _ in range(iters):
        y = shift * x - ax
        x = y / np.linalg.norm(y)
        ax = form.matvec(x)
        updated = float(x @ ax)
        change = abs(updated - rayleigh)
        rayleigh = updated
        if float(np.linalg.norm(ax - rayleigh * x)) <= TOLERANCES.eig_stable * shift:
            converged = True
            break

    if not converged and change <= TOLERANCES.eig_stable * max(1.0, abs(rayleigh)):
        converged = True
    if not converged:
        logger.warning(
            "Smallest-eigenvalue estimate %.6g did not stabilize in %d iterations "
            "(last change %.3e); treat it as low confidence", rayleigh, iters, change
        )

    witness = _sign_fix(x)
    return EigenEstimate(value=form.value(witness), witness=witness, converged=converged)


# ------------------------------------------------------------------------------
# ---- Classification ----------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalVerdict:
    """Outcome of classify_critical.

    `min_quadform` is the normalized Hessian form along `witness` and is only
    computed for critical points that are not global minima.
    """
    kind: VerdictKind
    grad_norm: float
    min_quadform: Optional[float] = None
    witness: Optional[FactorPair] = None
    low_confidence: bool = False

    def to_dict(self) -> dict[str, object]:
        return {"kind": self.kind, "grad_norm": self.grad_norm, "min_quadform": self.min_quadform}


def classify_critical(
    p: FactorPair,
    y: DenseMatrix,
    tol_grad: Optional[float] = None,
    tol_saddle: float = TOLERANCES.saddle,
    seed: int = 0,
    iters: int = EIG_MAX_ITERS,
) -> CriticalVerdict:
    """Classify `p` as NotCritical, GlobalMin or StrictSaddle for f(U, V) = ||U V^T - Y||_F^2.

    Args:
        p: Factor pair
        y: Data matrix
        tol_grad: Critical tolerance, default 1e-9 (1 + ||Y||_F)
        tol_saddle: The minimum normalized Hessian form must fall below -tol_saddle
        seed: Seed of the eigen-estimate
        iters: Iteration cap of the eigen-estimate

    Raises:
        ClassificationError: If `p` is critical, not a global minimum, and no
            direction of negative curvature is found
    """
    if tol_grad is None:
        tol_grad = TOLERANCES.grad_scale * (1.0 + frob_norm(y))
    if tol_grad <= 0 or tol_saddle <= 0:
        raise ValueError(f"Tolerances must be positive, got tol_grad={tol_grad}, tol_saddle={tol_saddle}")

    grad_norm = grad_f(p, y).norm()
    if grad_norm > tol_grad:
        return CriticalVerdict(kind="NotCritical", grad_norm=grad_norm)

    if opt_gap(p, y) <= tol_grad * (1.0 + frob_norm(y)**2):
        return CriticalVerdict(kind="GlobalMin", grad_norm=grad_norm)

    estimate = min_quadform_eig(QuadraticForm.of_f(p, y), iters=iters, seed=seed)
    if estimate.value < -tol_saddle:
        witness = p.from_vector(estimate.witness)
        mismatch = abs(quadform_f(p, witness, y) - estimate.value)
        if mismatch > TOLERANCES.witness * max(1.0, abs(estimate.value)):
            raise ArithmeticError("Stored witness does not reproduce the reported curvature")
        return CriticalVerdict(
            kind="StrictSaddle",
            grad_norm=grad_norm,
            min_quadform=estimate.value,
            witness=witness,
            low_confidence=not estimate.converged,
        )

    raise ClassificationError(
        f"Critical point (||grad f|| = {grad_norm:.3e}) with optimality gap {opt_gap(p, y):.6g} "
        f"shows no negative curvature (min normalized form {estimate.value:.6g} >= -{tol_saddle:g})"
    )


# ------------------------------------------------------------------------------
# ---- Balancing and Lifting ---------------------------------------------------
# ------------------------------------------------------------------------------


def _left_inverse_apply(a: DenseMatrix, b: DenseMatrix, rank_tol: float) -> DenseMatrix:
    """(A^T A)^{-1} A^T B through the reduced SVD of A."""
    svd = reduced_svd(a, rank_tol)
    if svd.sigma.size < a.shape[1]:
        raise DegenerateFactorsError(
            f"Factor of width {a.shape[1]} has numerical rank {svd.sigma.size}; its Gram matrix is singular"
        )
    return svd.q @ ((svd.p.T @ b) / svd.sigma[:, None])


def balance_factors(p: FactorPair, rank_tol: float = TOLERANCES.rank) -> FactorPair:
    """Rebalance (U, V) to (P S^1/2, Q S^1/2) without changing U V^T.

    P S Q^T is the reduced SVD of U V^T. The result satisfies U~^T U~ = V~^T V~.

    Raises:
        DegenerateFactorsError: If rank(U V^T) < r; degenerate pairs are
            handled by the rank-deficient analysis, not by balancing
    """
    svd = reduced_svd(p.product(), rank_tol)
    if svd.sigma.size < p.r:
        raise DegenerateFactorsError(
            f"U V^T has numerical rank {svd.sigma.size} < r = {p.r}; degenerate pairs cannot be balanced"
        )
    root = np.sqrt(svd.sigma)
    d = _left_inverse_apply(p.u, svd.p * root, rank_tol)
    g = _left_inverse_apply(p.v, svd.q * root, rank_tol)
    return FactorPair(p.u @ d, p.v @ g)


def lift_direction(q_x: DenseMatrix, q_y: Sequence[DenseMatrix], J: int) -> NetworkPoint:
    """Network direction with every copy block equal to `q_x` and locals `q_y`."""
    if len(q_y) != J:
        raise DimensionMismatchError(f"Need {J} local directions, got {len(q_y)}")
    return NetworkPoint(copies=tuple(np.array(q_x, copy=True) for _ in range(J)), locals=tuple(q_y))


def lift_pair(direction: FactorPair, d: DataPartition) -> NetworkPoint:
    """Lift a centralized direction, splitting its V part like the data columns."""
    return lift_direction(direction.u, d.split_rows(direction.v), d.J)
