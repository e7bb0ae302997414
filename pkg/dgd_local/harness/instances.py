"""Synthetic low-rank instances and random starting points in the ball B_rho."""

import math
from dataclasses import dataclass
from typing import (
    Literal,
    Optional,
    Union,
)

import numpy as np
from numpy.typing import NDArray

from ..constants import SEED_STREAMS
from ..matkit import (
    DenseMatrix,
    nuclear_norm,
)
from ..objective import (
    DataPartition,
    NetworkPoint,
    NetworkShape,
)
from ..topology import GRAPH_KINDS

RhoMode = Literal["auto", "auto_network"]


@dataclass(frozen=True)
class InstanceSpec:
    """Dimensions, network and seed of a synthetic rank-r problem."""
    n: int
    m: int
    r: int
    J: int
    topology: str
    seed: int = 0
    rho: Union[float, RhoMode] = "auto"
    p: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ('n', 'm', 'r', 'J'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.r > min(self.n, self.m):
            raise ValueError(f"r = {self.r} exceeds min(n, m) = {min(self.n, self.m)}")
        if self.J > self.m:
            raise ValueError(f"J = {self.J} exceeds m = {self.m}; every node needs a column")
        if self.topology not in GRAPH_KINDS:
            raise ValueError(f"Invalid topology '{self.topology}'. Must be one of {list(GRAPH_KINDS)}")
        if isinstance(self.rho, str):
            if self.rho not in ("auto", "auto_network"):
                raise ValueError(f"rho must be positive, auto or auto_network, got '{self.rho}'")
        elif not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")


def gen_instance(spec: InstanceSpec) -> tuple[DenseMatrix, DataPartition]:
    """Y = A B^T with standard-normal A (n x r), B (m x r) from the data stream.

    Columns are split evenly, the first (m mod J) blocks one wider.
    """
    rng = np.random.default_rng([spec.seed, SEED_STREAMS.data])
    a = rng.standard_normal((spec.n, spec.r))
    b = rng.standard_normal((spec.m, spec.r))
    y = a @ b.T
    return y, DataPartition.even(y, spec.J)


def resolve_rho(rho: Union[float, str], y: DenseMatrix, J: int) -> float:
    """Turn a rho setting into a radius.

    `auto` is sqrt(4 ||Y||_*): the balanced centralized minimizer has squared
    norm 2 ||Y||_*. `auto_network` is sqrt(2 (J + 1) ||Y||_*), the same margin for
    the consensus point with J copies of U, whose squared z-norm is (J + 1) ||Y||_*.
    """
    if rho == "auto":
        radius = math.sqrt(4.0 * nuclear_norm(y))
    elif rho == "auto_network":
        radius = math.sqrt(2.0 * (J + 1) * nuclear_norm(y))
    elif isinstance(rho, str):
        raise ValueError(f"Unknown rho mode '{rho}'")
    else:
        radius = float(rho)
    if not radius > 0:
        raise ValueError(f"rho resolved to {radius}; Y must be nonzero for automatic radii")
    return radius


def sample_ball(dim: int, rho: float, rng: np.random.Generator) -> NDArray[np.float64]:
    """Uniform sample from the open Euclidean ball of radius rho in R^dim."""
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    while True:
        direction = rng.standard_normal(dim)
        length = float(np.linalg.norm(direction))
        if length == 0.0:
            continue
        radius = rho * rng.random()**(1.0 / dim)
        x = direction * (radius / length)
        if np.linalg.norm(x) < rho:
            return x


def init_in_ball(shape: NetworkShape, rho: float, seed: int) -> NetworkPoint:
    """Random network point, uniform in the open z-norm ball of radius rho."""
    rng = np.random.default_rng([seed, SEED_STREAMS.init])
    while True:
        z = shape.from_vector(sample_ball(shape.dim, rho, rng))
        if z.z_norm() < rho:
            return z
