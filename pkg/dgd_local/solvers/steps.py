"""Update rules: DGD+LOCAL, gradient descent on g, and centralized gradient descent.

Each rule reads only iteration-k values and returns a fresh iterate, so every
node of a round sees the same frozen previous state.
"""

from typing import Literal

import numpy as np

from ..errors import DimensionMismatchError
from ..geometry import consensus_error
from ..matkit import DenseMatrix
from ..objective import (
    DataPartition,
    FactorPair,
    NetworkPoint,
    data_gradient,
    f_value,
    g_value,
    grad_f,
    grad_g,
)
from ..objective.values import check_network
from ..topology import (
    GDWeights,
    MixingMatrix,
    to_gd_weights,
)
from ._base import Engine

EngineKind = Literal["dgd_local", "gd_on_g", "central"]
ENGINE_KINDS: tuple[str, ...] = ("dgd_local", "gd_on_g", "central")

# ------------------------------------------------------------------------------
# ---- Update Rules ------------------------------------------------------------
# ------------------------------------------------------------------------------


def dgd_local_step(z: NetworkPoint, m: MixingMatrix, mu: float, d: DataPartition) -> NetworkPoint:
    """One synchronous DGD+LOCAL round.

    U^j+ = sum_i wtilde_ji U^i - mu 2 R_j V_j and V_j+ = V_j - mu 2 R_j^T U^j,
    with R_j = U^j V_j^T - Y_j.

    Raises:
        DimensionMismatchError: If z, m and d do not conform
    """
    if m.J != z.J:
        raise DimensionMismatchError(f"Mixing matrix is {m.J}x{m.J}, network has J={z.J}")
    check_network(z, d)
    g_copies, g_locals = data_gradient(z, d)
    mixed = np.einsum('ji,inr->jnr', m.wtilde, z.stacked_copies())
    return NetworkPoint(
        copies=tuple(mixed[j] - mu * g for j, g in enumerate(g_copies)),
        locals=tuple(v - mu * g for v, g in zip(z.locals, g_locals)),
    )


def gd_g_step(z: NetworkPoint, w: GDWeights, mu: float, d: DataPartition) -> NetworkPoint:
    """Plain gradient step z - mu grad g(z)."""
    grad = grad_g(z, w, d)
    return NetworkPoint(
        copies=tuple(u - mu * g for u, g in zip(z.copies, grad.copies)),
        locals=tuple(v - mu * g for v, g in zip(z.locals, grad.locals)),
    )


def gd_central_step(p: FactorPair, mu: float, y: DenseMatrix) -> FactorPair:
    """(U, V) - mu grad f(U, V)."""
    grad = grad_f(p, y)
    return FactorPair(p.u - mu * grad.u, p.v - mu * grad.v)


# ------------------------------------------------------------------------------
# ---- Engines -----------------------------------------------------------------
# ------------------------------------------------------------------------------


class _NetworkEngine(Engine[NetworkPoint]):
    """Shared metrics for engines whose state is a NetworkPoint."""

    def __init__(self, weights: GDWeights, data: DataPartition):
        self.weights: GDWeights = weights
        self.data: DataPartition = data
        self.mu: float = weights.mu

    def prepare(self, z0: NetworkPoint) -> NetworkPoint:
        check_network(z0, self.data, self.weights)
        return z0

    def objective(self, state: NetworkPoint) -> float:
        return g_value(state, self.weights, self.data)

    def gradient_norm(self, state: NetworkPoint) -> float:
        return grad_g(state, self.weights, self.data).z_norm()

    def assemble(self, state: NetworkPoint) -> FactorPair:
        return state.assemble()

    def consensus_error(self, state: NetworkPoint) -> float:
        return consensus_error(state)

    def norm(self, state: NetworkPoint) -> float:
        return state.z_norm()


class DGDLocalEngine(_NetworkEngine):
    """DGD+LOCAL driven by the mixing matrix; reports g with w = wtilde / (4 mu)."""

    name = "dgd_local"

    def __init__(self, mixing: MixingMatrix, mu: float, data: DataPartition):
        super().__init__(to_gd_weights(mixing, mu), data)
        self.mixing: MixingMatrix = mixing

    def step(self, state: NetworkPoint) -> NetworkPoint:
        return dgd_local_step(state, self.mixing, self.mu, self.data)


class GDOnGEngine(_NetworkEngine):
    """Gradient descent on the augmented objective g."""

    name = "gd_on_g"

    def step(self, state: NetworkPoint) -> NetworkPoint:
        return gd_g_step(state, self.weights, self.mu, self.data)


class CentralEngine(Engine[FactorPair]):
    """Gradient descent on f; a network start is collapsed with NetworkPoint.assemble."""

    name = "central"

    def __init__(self, mu: float, data: DataPartition):
        if mu <= 0:
            raise ValueError(f"mu must be positive, got {mu}")
        self.mu: float = mu
        self.data: DataPartition = data

    def prepare(self, z0: NetworkPoint) -> FactorPair:
        check_network(z0, self.data)
        return z0.assemble()

    def step(self, state: FactorPair) -> FactorPair:
        return gd_central_step(state, self.mu, self.data.y)

    def objective(self, state: FactorPair) -> float:
        return f_value(state, self.data.y)

    def gradient_norm(self, state: FactorPair) -> float:
        return grad_f(state, self.data.y).norm()

    def assemble(self, state: FactorPair) -> FactorPair:
        return state

    def consensus_error(self, state: FactorPair) -> float:
        return 0.0

    def norm(self, state: FactorPair) -> float:
        return state.norm()


def build_engine(kind: EngineKind, m: MixingMatrix, mu: float, d: DataPartition) -> Engine:
    """Instantiate the engine named `kind`.

    Raises:
        ValueError: On an unknown kind or non-positive mu
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if kind == "dgd_local":
        return DGDLocalEngine(m, mu, d)
    elif kind == "gd_on_g":
        return GDOnGEngine(to_gd_weights(m, mu), d)
    elif kind == "central":
        return CentralEngine(mu, d)
    raise ValueError(f"Invalid engine '{kind}'. Must be one of {list(ENGINE_KINDS)}")
