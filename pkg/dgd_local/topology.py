"""Network graphs, mixing matrices and the weights of the equivalent gradient descent.

Nodes are numbered 1..J in every public type and file; networkx graphs built
internally use 0-based node labels.
"""

import logging
from dataclasses import (
    dataclass,
    field,
)
from typing import (
    Literal,
    Optional,
)

import networkx as nx
import numpy as np

from .constants import (
    ERDOS_MAX_ATTEMPTS,
    TOLERANCES,
)
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
)
from .matkit import (
    DenseMatrix,
    PathLike,
    as_matrix,
    read_matrix,
    write_matrix,
)

logger = logging.getLogger(__name__)

GraphKind = Literal["ring", "star", "complete", "erdos"]
GRAPH_KINDS: tuple[str, ...] = ("ring", "star", "complete", "erdos")

# ------------------------------------------------------------------------------
# ---- Types -------------------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes 1..node_count.

    Edges are stored as (i, j) with i < j.
    """
    node_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError(f"node_count must be positive, got {self.node_count}")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"Self-loop ({i}, {j}) is not allowed")
            if not i < j:
                raise ValueError(f"Edge ({i}, {j}) must be stored as (min, max)")
            if not (1 <= i <= self.node_count and 1 <= j <= self.node_count):
                raise ValueError(f"Edge ({i}, {j}) out of range 1..{self.node_count}")

    @classmethod
    def from_pairs(cls, node_count: int, pairs: list[tuple[int, int]]) -> "Graph":
        """Build from unordered 1-based pairs; duplicates are rejected."""
        edges: set[tuple[int, int]] = set()
        for i, j in pairs:
            edge = (min(i, j), max(i, j))
            if edge in edges:
                raise ValueError(f"Duplicate edge {edge}")
            edges.add(edge)
        return cls(node_count=node_count, edges=frozenset(edges))

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        """Convert a networkx graph with nodes 0..J-1."""
        return cls(
            node_count=g.number_of_nodes(),
            edges=frozenset((min(i, j) + 1, max(i, j) + 1) for i, j in g.edges()),
        )

    def to_networkx(self) -> nx.Graph:
        """networkx view with 0-based node labels."""
        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from((i - 1, j - 1) for i, j in self.edges)
        return g

    @property
    def degrees(self) -> list[int]:
        """Degree of node 1..J (index 0..J-1)."""
        g = self.to_networkx()
        return [g.degree(v) for v in range(self.node_count)]

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Symmetric nonnegative J x J weights with unit row sums.

    Zero diagonals are admitted; a diagonal above 1/2 is only demanded when a
    stepsize is requested (see `omega`).
    """
    wtilde: DenseMatrix
    validated: bool = field(default=True)

    def __post_init__(self) -> None:
        wt = as_matrix(self.wtilde, name="wtilde")
        wt.setflags(write=False)
        object.__setattr__(self, "wtilde", wt)
        if self.validated:
            self._validate()

    @classmethod
    def unchecked(cls, wtilde: DenseMatrix) -> "MixingMatrix":
        """Wrap weights without checking symmetry, sign or row sums.

        Only meant for negative controls that deliberately break the row-sum
        assumption.
        """
        return cls(wtilde=wtilde, validated=False)

    def _validate(self) -> None:
        wt = self.wtilde
        if wt.shape[0] != wt.shape[1]:
            raise DimensionMismatchError(f"Mixing matrix must be square, got {wt.shape}")
        if np.any(wt < 0):
            raise ValueError("Mixing matrix has negative entries")
        if np.max(np.abs(wt - wt.T)) > TOLERANCES.symmetry:
            raise ValueError("Mixing matrix is not symmetric")
        row_sums = wt.sum(axis=1)
        worst = float(np.max(np.abs(row_sums - 1.0)))
        if worst > TOLERANCES.row_sum:
            raise ValueError(f"Mixing matrix rows must sum to 1 (worst deviation {worst:.3e})")

    @property
    def J(self) -> int:
        return self.wtilde.shape[0]

    def support_graph(self) -> Graph:
        """Graph with an edge wherever an off-diagonal weight is positive."""
        pairs = [(i + 1, j + 1)
                 for i in range(self.J)
                 for j in range(i + 1, self.J)
                 if self.wtilde[i, j] > 0 or self.wtilde[j, i] > 0]
        return Graph.from_pairs(self.J, pairs)

    def is_supported_on(self, graph: Graph) -> bool:
        """True if every positive off-diagonal weight sits on an edge of `graph`."""
        return self.support_graph().edges <= graph.edges


@dataclass(frozen=True, eq=False)
class GDWeights:
    """Weights w_ji = wtilde_ji / (4 mu) of the equivalent augmented objective."""
    w: DenseMatrix
    mu: float

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        w = as_matrix(self.w, name="w")
        if w.shape[0] != w.shape[1]:
            raise DimensionMismatchError(f"GD weights must be square, got {w.shape}")
        if np.any(np.diag(w) != 0):
            raise ValueError("GD weights must have a zero diagonal")
        if np.any(w < 0):
            raise ValueError("GD weights have negative entries")
        if np.max(np.abs(w - w.T)) > TOLERANCES.symmetry / (4.0 * self.mu):
            raise ValueError("GD weights are not symmetric")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def J(self) -> int:
        return self.w.shape[0]


# ------------------------------------------------------------------------------
# ---- Graph Construction ------------------------------------------------------
# ------------------------------------------------------------------------------


def build_graph(kind: GraphKind, J: int, seed: int = 0, p: Optional[float] = None) -> Graph:
    """Build a ring, star, complete or connected Erdos-Renyi graph.

    Args:
        kind: Graph family
        J: Number of nodes (>= 2)
        seed: Seed for the erdos family (ignored otherwise)
        p: Edge probability for the erdos family, 0 < p <= 1

    Returns:
        Graph on nodes 1..J; the star is centred on node 1

    Raises:
        ValueError: On J < 2, unknown kind or invalid p
        ConvergenceError: If no connected erdos sample is found within the cap
    """
    if J < 2:
        raise ValueError(f"A network needs at least 2 nodes, got J={J}")

    if kind == "ring":
        return Graph.from_networkx(nx.cycle_graph(J))
    elif kind == "star":
        return Graph.from_networkx(nx.star_graph(J - 1))
    elif kind == "complete":
        return Graph.from_networkx(nx.complete_graph(J))
    elif kind == "erdos":
        if p is None or not 0 < p <= 1:
            raise ValueError(f"erdos graphs need 0 < p <= 1, got p={p}")
        for attempt in range(ERDOS_MAX_ATTEMPTS):
            g = nx.gnp_random_graph(J, p, seed=seed + attempt)
            if nx.is_connected(g):
                if attempt:
                    logger.debug("erdos(J=%d, p=%g) connected after %d resamples", J, p, attempt)
                return Graph.from_networkx(g)
        raise ConvergenceError(
            f"No connected erdos(J={J}, p={p}) sample in {ERDOS_MAX_ATTEMPTS} attempts"
        )
    raise ValueError(f"Invalid graph kind '{kind}'. Must be one of {list(GRAPH_KINDS)}")


# ------------------------------------------------------------------------------
# ---- Mixing Matrices ---------------------------------------------------------
# ------------------------------------------------------------------------------


def metropolis_weights(g: Graph) -> MixingMatrix:
    """Metropolis-Hastings weights 1 / (1 + max(deg_i, deg_j)) on each edge.

    The diagonal takes the remaining row mass, so rows sum to one by
    construction.

    Raises:
        ValueError: If `g` is disconnected
    """
    if not g.is_connected():
        raise ValueError("Metropolis weights need a connected graph")

    degrees = g.degrees
    wt = np.zeros((g.node_count, g.node_count))
    for i, j in g.edges:
        weight = 1.0 / (1.0 + max(degrees[i - 1], degrees[j - 1]))
        wt[i - 1, j - 1] = weight
        wt[j - 1, i - 1] = weight
    np.fill_diagonal(wt, 1.0 - wt.sum(axis=1))
    return MixingMatrix(wt)


def lazy_fix(m: MixingMatrix) -> MixingMatrix:
    """Return (W~ + I) / 2; halves omega and lifts every diagonal above 1/2."""
    return MixingMatrix((m.wtilde + np.eye(m.J)) / 2.0)


def perturb_row_sums(m: MixingMatrix, factor: float) -> MixingMatrix:
    """Scale every weight by `factor`, so rows sum to `factor` instead of 1."""
    if factor <= 0:
        raise ValueError(f"factor must be positive, got {factor}")
    return MixingMatrix.unchecked(m.wtilde * factor)


def _off_diagonal(wt: DenseMatrix) -> DenseMatrix:
    off = np.array(wt, copy=True)
    np.fill_diagonal(off, 0.0)
    return off


def omega(m: MixingMatrix) -> float:
    """Largest off-diagonal row sum, max_j sum_{i != j} wtilde_ji."""
    return float(np.max(_off_diagonal(m.wtilde).sum(axis=1)))


def to_gd_weights(m: MixingMatrix, mu: float) -> GDWeights:
    """Convert mixing weights to w_ji = wtilde_ji / (4 mu), zero diagonal.

    Raises:
        ValueError: If mu <= 0
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return GDWeights(w=_off_diagonal(m.wtilde) / (4.0 * mu), mu=mu)


def is_connected(m: MixingMatrix) -> bool:
    """True if the support of the off-diagonal weights is a connected graph.

    The support of W~ and of the GD weights W coincide, so this also answers
    connectivity of W.
    """
    return m.support_graph().is_connected()


# ------------------------------------------------------------------------------
# ---- Text Format -------------------------------------------------------------
# ------------------------------------------------------------------------------


def write_graph(path: PathLike, g: Graph) -> None:
    """Write `J` on the first line, then one `i j` pair per line."""
    with open(path, "w") as f:
        f.write(f"{g.node_count}\n")
        for i, j in sorted(g.edges):
            f.write(f"{i} {j}\n")


def read_graph(path: PathLike) -> Graph:
    with open(path, "r") as f:
        lines = [line.split() for line in f if line.strip()]
    if not lines or len(lines[0]) != 1:
        raise ValueError(f"{path}: first line must hold the node count")
    pairs = [(int(i), int(j)) for i, j in lines[1:]]
    return Graph.from_pairs(int(lines[0][0]), pairs)


def write_mixing(path: PathLike, m: MixingMatrix) -> None:
    write_matrix(path, m.wtilde)


def read_mixing(path: PathLike) -> MixingMatrix:
    return MixingMatrix(read_matrix(path))
