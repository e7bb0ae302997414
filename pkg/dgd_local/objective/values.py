"""Centralized objective f, augmented objective g, gradients and Hessian forms.

All values use the un-halved convention f(U, V) = ||U V^T - Y||_F^2 and

    g(z) = sum_j ( ||U^j V_j^T - Y_j||_F^2 + sum_i w_ji ||U^j - U^i||_F^2 ).

Per-block terms are accumulated in ascending j so results are reproducible
bit for bit.
"""

from typing import Optional

import numpy as np
from numpy.typing import NDArray

from ..constants import TOLERANCES
from ..errors import DimensionMismatchError
from ..matkit import (
    DenseMatrix,
    frob_inner,
    frob_norm,
)
from ..topology import GDWeights
from .network import (
    DataPartition,
    FactorPair,
    NetworkPoint,
)


def _check_pair(p: FactorPair, y: DenseMatrix) -> None:
    n, m = y.shape
    if p.u.shape[0] != n or p.v.shape[0] != m:
        raise DimensionMismatchError(
            f"U V^T is {p.u.shape[0]}x{p.v.shape[0]}, Y is {n}x{m}"
        )


def check_network(z: NetworkPoint, d: DataPartition, w: Optional[GDWeights] = None) -> None:
    shape = z.shape
    if shape.widths != d.widths:
        raise DimensionMismatchError(f"Local block widths {shape.widths} differ from partition {d.widths}")
    if shape.n != d.y.shape[0]:
        raise DimensionMismatchError(f"Copies have {shape.n} rows, Y has {d.y.shape[0]}")
    if w is not None:
        if w.J != z.J:
            raise DimensionMismatchError(f"Weights are {w.J}x{w.J}, network has J={z.J}")
        if not np.array_equal(w.w, w.w.T):
            raise ValueError("GD weights must be symmetric")


def _residual(u: DenseMatrix, v: DenseMatrix, y: DenseMatrix) -> DenseMatrix:
    return u @ v.T - y


# ------------------------------------------------------------------------------
# ---- Centralized Objective ---------------------------------------------------
# ------------------------------------------------------------------------------


def f_blocks(p: FactorPair, d: DataPartition) -> list[float]:
    """Per-node terms ||U V_j^T - Y_j||_F^2."""
    _check_pair(p, d.y)
    v_blocks = d.split_rows(p.v)
    return [frob_norm(_residual(p.u, v_j, y_j))**2 for v_j, y_j in zip(v_blocks, d.blocks)]


def f_value(p: FactorPair, y: DenseMatrix, partition: Optional[DataPartition] = None) -> float:
    """||U V^T - Y||_F^2.

    When `partition` is given, the block decomposition sum_j ||U V_j^T - Y_j||_F^2
    is evaluated too and must agree to a relative 1e-12.

    Raises:
        DimensionMismatchError: If the factors do not conform with Y
        ArithmeticError: If the block sum disagrees with the full value
    """
    _check_pair(p, y)
    value = frob_norm(_residual(p.u, p.v, y))**2
    if partition is not None:
        block_sum = sum(f_blocks(p, partition))
        if abs(block_sum - value) > TOLERANCES.block_sum * max(value, 1.0):
            raise ArithmeticError(f"Block sum {block_sum!r} disagrees with f = {value!r}")
    return value


def grad_f_block(u: DenseMatrix, v_j: DenseMatrix,
                 y_j: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
    """Gradient of ||U V_j^T - Y_j||_F^2 as (2 R V_j, 2 R^T U)."""
    r = _residual(u, v_j, y_j)
    return 2.0 * (r @ v_j), 2.0 * (r.T @ u)


def grad_f(p: FactorPair, y: DenseMatrix) -> FactorPair:
    """Gradient (2 (U V^T - Y) V, 2 (U V^T - Y)^T U) of f."""
    _check_pair(p, y)
    g_u, g_v = grad_f_block(p.u, p.v, y)
    return FactorPair(g_u, g_v)


def hvp_f_block(u: DenseMatrix, v: DenseMatrix, y: DenseMatrix, du: DenseMatrix,
                dv: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
    """Hessian of ||U V^T - Y||_F^2 applied to (dU, dV)."""
    r = _residual(u, v, y)
    dr = du @ v.T + u @ dv.T
    return 2.0 * (dr @ v + r @ dv), 2.0 * (dr.T @ u + r.T @ du)


def hvp_f(p: FactorPair, direction: FactorPair, y: DenseMatrix) -> FactorPair:
    """Hessian-vector product of f at `p` along `direction`."""
    _check_pair(p, y)
    if direction.u.shape != p.u.shape or direction.v.shape != p.v.shape:
        raise DimensionMismatchError("Direction does not match the factor shapes")
    h_u, h_v = hvp_f_block(p.u, p.v, y, direction.u, direction.v)
    return FactorPair(h_u, h_v)


def quadform_f_block(u: DenseMatrix, v: DenseMatrix, y: DenseMatrix, du: DenseMatrix,
                     dv: DenseMatrix) -> float:
    """2 ||dU V^T + U dV^T||_F^2 + 4 <U V^T - Y, dU dV^T>."""
    first = du @ v.T + u @ dv.T
    return 2.0 * frob_norm(first)**2 + 4.0 * frob_inner(_residual(u, v, y), du @ dv.T)


def quadform_f(p: FactorPair, direction: FactorPair, y: DenseMatrix) -> float:
    """Hessian quadratic form of f at `p` in `direction`.

    Raises:
        DimensionMismatchError: If shapes do not conform
    """
    _check_pair(p, y)
    if direction.u.shape != p.u.shape or direction.v.shape != p.v.shape:
        raise DimensionMismatchError("Direction does not match the factor shapes")
    return quadform_f_block(p.u, p.v, y, direction.u, direction.v)


# ------------------------------------------------------------------------------
# ---- Consensus Penalty -------------------------------------------------------
# ------------------------------------------------------------------------------


def penalty_value(z: NetworkPoint, w: GDWeights) -> float:
    """sum_j sum_i w_ji ||U^j - U^i||_F^2 over both ordered pairs."""
    total = 0.0
    for j in range(z.J):
        for i in range(z.J):
            if w.w[j, i] != 0:
                total += w.w[j, i] * frob_norm(z.copies[j] - z.copies[i])**2
    return total


def _laplacian_apply(w: GDWeights, stacked: NDArray[np.float64]) -> NDArray[np.float64]:
    """(L X)_j = sum_i w_ji (X_j - X_i) for stacked copies X of shape (J, n, r)."""
    degree = w.w.sum(axis=1)
    return degree[:, None, None] * stacked - np.einsum('ji,inr->jnr', w.w, stacked)


def penalty_gradient(z: NetworkPoint, w: GDWeights) -> NDArray[np.float64]:
    """Gradient 4 sum_i w_ji (U^j - U^i) of the penalty, stacked (J, n, r).

    Each pair appears twice in the double sum, which doubles the 2 w_ji term.
    """
    return 4.0 * _laplacian_apply(w, z.stacked_copies())


# ------------------------------------------------------------------------------
# ---- Augmented Objective -----------------------------------------------------
# ------------------------------------------------------------------------------


def g_value(z: NetworkPoint, w: GDWeights, d: DataPartition) -> float:
    """Augmented objective g at `z`.

    Raises:
        DimensionMismatchError: If z, w and d do not conform
    """
    check_network(z, d, w)
    data = sum(
        frob_norm(_residual(u_j, v_j, y_j))**2
        for u_j, v_j, y_j in zip(z.copies, z.locals, d.blocks)
    )
    return data + penalty_value(z, w)


def data_gradient(z: NetworkPoint, d: DataPartition) -> tuple[list[DenseMatrix], list[DenseMatrix]]:
    """Per-node data-term gradients (2 R_j V_j, 2 R_j^T U^j)."""
    grads = [grad_f_block(u_j, v_j, y_j) for u_j, v_j, y_j in zip(z.copies, z.locals, d.blocks)]
    return [gu for gu, _ in grads], [gv for _, gv in grads]


def grad_g(z: NetworkPoint, w: GDWeights, d: DataPartition) -> NetworkPoint:
    """Exact gradient of g.

    Copy j: 2 R_j V_j + 4 sum_i w_ji (U^j - U^i); local j: 2 R_j^T U^j, with
    R_j = U^j V_j^T - Y_j.
    """
    check_network(z, d, w)
    g_copies, g_locals = data_gradient(z, d)
    penalty = penalty_gradient(z, w)
    return NetworkPoint(
        copies=tuple(g + penalty[j] for j, g in enumerate(g_copies)),
        locals=tuple(g_locals),
    )


def quadform_g(z: NetworkPoint, q: NetworkPoint, w: GDWeights, d: DataPartition) -> float:
    """Hessian quadratic form of g at `z` in direction `q`.

    sum_j [Hessian of f_j](q_j) + sum_j sum_i 2 w_ji ||q^j - q^i||_F^2.
    """
    check_network(z, d, w)
    z.require_like(q)
    data = sum(
        quadform_f_block(u_j, v_j, y_j, du_j, dv_j) for u_j, v_j, y_j, du_j, dv_j in
        zip(z.copies, z.locals, d.blocks, q.copies, q.locals)
    )
    coupling = 2.0 * penalty_value(q, w)
    return data + coupling


def hvp_g(z: NetworkPoint, q: NetworkPoint, w: GDWeights, d: DataPartition) -> NetworkPoint:
    """Hessian of g at `z` applied to `q`; <q, hvp_g(z, q)> == quadform_g(z, q)."""
    check_network(z, d, w)
    z.require_like(q)
    products = [
        hvp_f_block(u_j, v_j, y_j, du_j, dv_j) for u_j, v_j, y_j, du_j, dv_j in
        zip(z.copies, z.locals, d.blocks, q.copies, q.locals)
    ]
    coupling = 4.0 * _laplacian_apply(w, q.stacked_copies())
    return NetworkPoint(
        copies=tuple(h_u + coupling[j] for j, (h_u, _) in enumerate(products)),
        locals=tuple(h_v for _, h_v in products),
    )
