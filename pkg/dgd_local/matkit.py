"""Dense linear-algebra kernel for small real matrices.

Matrices are plain two-dimensional float64 numpy arrays. `as_matrix` is the
single entry point that checks shape and finiteness; the remaining helpers
assume validated input and never modify their arguments.
"""

import os
from typing import (
    NamedTuple,
    Union,
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)

from .constants import (
    FLOAT_FORMAT,
    TOLERANCES,
)
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    NonFiniteError,
)

DenseMatrix = NDArray[np.float64]
PathLike = Union[str, os.PathLike]


class ReducedSvd(NamedTuple):
    """Reduced SVD A ~= P diag(sigma) Q^T with sigma sorted descending."""
    p: DenseMatrix
    sigma: NDArray[np.float64]
    q: DenseMatrix


def as_matrix(values: ArrayLike, name: str = "matrix") -> DenseMatrix:
    """Copy `values` into a validated dense matrix.

    Args:
        values: Anything numpy can turn into a 2-D real array
        name: Label used in error messages

    Returns:
        A fresh float64 array of shape (rows, cols)

    Raises:
        DimensionMismatchError: If the input is not 2-D or has an empty axis
        NonFiniteError: If any entry is NaN or infinite
    """
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatchError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return arr


def check_finite(a: DenseMatrix, name: str = "result") -> DenseMatrix:
    """Raise NonFiniteError if `a` holds NaN/Inf; return `a` otherwise."""
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return a


def require_shape(a: DenseMatrix, shape: tuple[int, int], name: str) -> None:
    """Raise DimensionMismatchError unless `a` has exactly `shape`."""
    if a.shape != shape:
        raise DimensionMismatchError(f"{name} has shape {a.shape}, expected {shape}")


# ------------------------------------------------------------------------------
# ---- Products and Norms ------------------------------------------------------
# ------------------------------------------------------------------------------


def matmul(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Matrix product a @ b.

    Raises:
        DimensionMismatchError: If a.cols != b.rows
        NonFiniteError: If the product overflows
    """
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(
            f"Cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return check_finite(a @ b, "product")


def frob_norm(a: DenseMatrix) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def frob_inner(a: DenseMatrix, b: DenseMatrix) -> float:
    """Frobenius inner product <a, b> = trace(a^T b)."""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Inner product of {a.shape} and {b.shape}")
    return float(np.vdot(a, b))


# ------------------------------------------------------------------------------
# ---- SVD ---------------------------------------------------------------------
# ------------------------------------------------------------------------------


def _singular_values(a: DenseMatrix) -> NDArray[np.float64]:
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"SVD of {a.shape[0]}x{a.shape[1]} matrix did not converge") from e


def reduced_svd(a: DenseMatrix, rank_tol: float = TOLERANCES.rank) -> ReducedSvd:
    """Reduced SVD truncated at relative tolerance `rank_tol`.

    Uses LAPACK's divide-and-conquer driver through numpy; its internal sweep cap
    is the iteration cap, and exhausting it surfaces as ConvergenceError.
    Singular values below rank_tol * sigma_max are dropped, so a zero matrix has
    an empty factorization (P and Q with zero columns).

    Sign convention: the first nonzero entry of every column of P is
    nonnegative; the matching column of Q is flipped with it.

    Args:
        a: Matrix to factor
        rank_tol: Relative truncation threshold

    Returns:
        ReducedSvd(p, sigma, q) with p (rows x k), sigma (k,), q (cols x k)

    Raises:
        ConvergenceError: If LAPACK does not converge
    """
    if rank_tol <= 0:
        raise ValueError(f"rank_tol must be positive, got {rank_tol}")
    try:
        p, sigma, qt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"SVD of {a.shape[0]}x{a.shape[1]} matrix did not converge") from e

    sigma_max = sigma[0] if sigma.size else 0.0
    keep = int(np.count_nonzero(sigma > rank_tol * sigma_max)) if sigma_max > 0 else 0
    p = p[:, :keep].copy()
    q = qt[:keep, :].T.copy()
    sigma = sigma[:keep].copy()

    for k in range(keep):
        column = p[:, k]
        nonzero = np.flatnonzero(np.abs(column) > TOLERANCES.rank)
        if nonzero.size and column[nonzero[0]] < 0:
            p[:, k] = -column
            q[:, k] = -q[:, k]

    return ReducedSvd(p=p, sigma=sigma, q=q)


def numerical_rank(a: DenseMatrix, rank_tol: float = TOLERANCES.rank) -> int:
    """Count singular values above rank_tol * sigma_max."""
    sigma = _singular_values(a)
    if not sigma.size or sigma[0] == 0:
        return 0
    return int(np.count_nonzero(sigma > rank_tol * sigma[0]))


def nuclear_norm(a: DenseMatrix) -> float:
    """Sum of singular values."""
    return float(np.sum(_singular_values(a)))


def tail_energy(a: DenseMatrix, r: int) -> float:
    """Squared Frobenius distance from `a` to its best rank-r approximation.

    Equals sum_{i > r} sigma_i^2 (Eckart-Young).
    """
    if r < 0:
        raise ValueError(f"rank must be nonnegative, got {r}")
    sigma = _singular_values(a)
    return float(np.sum(sigma[r:]**2))


def best_rank_approx(a: DenseMatrix, r: int, rank_tol: float = TOLERANCES.rank) -> DenseMatrix:
    """Truncated SVD Y_r of `a` keeping at most `r` singular triples."""
    svd = reduced_svd(a, rank_tol)
    k = min(r, svd.sigma.size)
    return (svd.p[:, :k] * svd.sigma[:k]) @ svd.q[:, :k].T


# ------------------------------------------------------------------------------
# ---- Text Format -------------------------------------------------------------
# ------------------------------------------------------------------------------


def write_matrix(path: PathLike, a: DenseMatrix) -> None:
    """Write `a` as `rows cols` followed by one line per row.

    Values use 17 significant digits so reading them back is exact.
    """
    rows, cols = a.shape
    np.savetxt(
        path,
        a,
        fmt=f"%{FLOAT_FORMAT}",
        delimiter=" ",
        header=f"{rows} {cols}",
        comments="",
    )


def read_matrix(path: PathLike) -> DenseMatrix:
    """Read a matrix written by `write_matrix`.

    Raises:
        FileNotFoundError: If `path` does not exist
        DimensionMismatchError: If the body disagrees with the header
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Matrix file not found: {path}")

    with open(path, "r") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: first line must be 'rows cols', got {header}")
        rows, cols = int(header[0]), int(header[1])
        body = np.loadtxt(f, dtype=np.float64, ndmin=2)

    if body.size != rows * cols:
        raise DimensionMismatchError(
            f"{path}: header says {rows}x{cols}, body holds {body.size} values"
        )
    return as_matrix(body.reshape(rows, cols), name=str(path))
