"""Data partitions, factor pairs and stacked network points."""

from dataclasses import dataclass
from typing import (
    Iterator,
    Sequence,
)

import numpy as np
from numpy.typing import NDArray

from ..errors import DimensionMismatchError
from ..matkit import (
    DenseMatrix,
    as_matrix,
    frob_norm,
)


def even_widths(m: int, J: int) -> tuple[int, ...]:
    """Split m columns over J nodes, the first (m mod J) blocks one wider."""
    if J < 1:
        raise ValueError(f"J must be positive, got {J}")
    if J > m:
        raise ValueError(f"Every node needs at least one column (J={J} > m={m})")
    base, extra = divmod(m, J)
    return tuple(base + 1 if j < extra else base for j in range(J))


# ------------------------------------------------------------------------------
# ---- Data Partition ----------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DataPartition:
    """Column blocks Y_1..Y_J of Y with widths m_1..m_J."""
    y: DenseMatrix
    widths: tuple[int, ...]

    def __post_init__(self) -> None:
        y = as_matrix(self.y, name="Y")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if not self.widths or any(w < 1 for w in self.widths):
            raise ValueError(f"Block widths must be positive, got {self.widths}")
        if sum(self.widths) != y.shape[1]:
            raise DimensionMismatchError(
                f"Block widths {self.widths} sum to {sum(self.widths)}, Y has {y.shape[1]} columns"
            )

    @classmethod
    def even(cls, y: DenseMatrix, J: int) -> "DataPartition":
        return cls(y=y, widths=even_widths(np.shape(y)[1], J))

    @property
    def J(self) -> int:
        return len(self.widths)

    @property
    def offsets(self) -> tuple[int, ...]:
        """Column index where each block starts, plus the total width."""
        return (0, *np.cumsum(self.widths).tolist())

    @property
    def blocks(self) -> tuple[DenseMatrix, ...]:
        o = self.offsets
        return tuple(self.y[:, o[j]:o[j + 1]] for j in range(self.J))

    def block_norms(self) -> list[float]:
        return [frob_norm(block) for block in self.blocks]

    def assemble(self) -> DenseMatrix:
        """Horizontal concatenation of the blocks (reproduces Y)."""
        return np.hstack(self.blocks)

    def split_rows(self, v: DenseMatrix) -> tuple[DenseMatrix, ...]:
        """Partition the rows of an (m x r) factor like the columns of Y."""
        if v.shape[0] != self.y.shape[1]:
            raise DimensionMismatchError(f"V has {v.shape[0]} rows, Y has {self.y.shape[1]} columns")
        o = self.offsets
        return tuple(v[o[j]:o[j + 1], :].copy() for j in range(self.J))


# ------------------------------------------------------------------------------
# ---- Factor Pair -------------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FactorPair:
    """Centralized variables (U, V) with U (n x r) and V (m x r)."""
    u: DenseMatrix
    v: DenseMatrix

    def __post_init__(self) -> None:
        u = as_matrix(self.u, name="U")
        v = as_matrix(self.v, name="V")
        if u.shape[1] != v.shape[1]:
            raise DimensionMismatchError(f"U has {u.shape[1]} columns, V has {v.shape[1]}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def __iter__(self) -> Iterator[DenseMatrix]:
        return iter((self.u, self.v))

    @property
    def r(self) -> int:
        return self.u.shape[1]

    @property
    def dim(self) -> int:
        return self.u.size + self.v.size

    def norm(self) -> float:
        """sqrt(||U||_F^2 + ||V||_F^2)."""
        return float(np.sqrt(frob_norm(self.u)**2 + frob_norm(self.v)**2))

    def product(self) -> DenseMatrix:
        return self.u @ self.v.T

    def to_vector(self) -> NDArray[np.float64]:
        return np.concatenate([self.u.ravel(), self.v.ravel()])

    def from_vector(self, vec: NDArray[np.float64]) -> "FactorPair":
        """Pair shaped like `self` holding the entries of `vec`."""
        if vec.size != self.dim:
            raise DimensionMismatchError(f"Vector has {vec.size} entries, expected {self.dim}")
        cut = self.u.size
        return FactorPair(vec[:cut].reshape(self.u.shape), vec[cut:].reshape(self.v.shape))

    def __add__(self, other: "FactorPair") -> "FactorPair":
        return FactorPair(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "FactorPair") -> "FactorPair":
        return FactorPair(self.u - other.u, self.v - other.v)

    def __mul__(self, alpha: float) -> "FactorPair":
        return FactorPair(alpha * self.u, alpha * self.v)

    __rmul__ = __mul__


# ------------------------------------------------------------------------------
# ---- Network Point -----------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkShape:
    """Dimensions of a network point: J copies of (n x r), locals (m_j x r)."""
    n: int
    r: int
    widths: tuple[int, ...]

    @property
    def J(self) -> int:
        return len(self.widths)

    @property
    def dim(self) -> int:
        return self.J * self.n * self.r + sum(self.widths) * self.r

    def zeros(self) -> "NetworkPoint":
        return NetworkPoint(
            copies=tuple(np.zeros((self.n, self.r)) for _ in self.widths),
            locals=tuple(np.zeros((w, self.r)) for w in self.widths),
        )

    def from_vector(self, vec: NDArray[np.float64]) -> "NetworkPoint":
        """Inverse of NetworkPoint.to_vector for this shape."""
        if vec.size != self.dim:
            raise DimensionMismatchError(f"Vector has {vec.size} entries, expected {self.dim}")
        block = self.n * self.r
        copies = [vec[j * block:(j + 1) * block].reshape(self.n, self.r) for j in range(self.J)]
        cursor = self.J * block
        local_blocks = []
        for w in self.widths:
            local_blocks.append(vec[cursor:cursor + w * self.r].reshape(w, self.r))
            cursor += w * self.r
        return NetworkPoint(copies=tuple(copies), locals=tuple(local_blocks))


@dataclass(frozen=True, eq=False)
class NetworkPoint:
    """Stacked variable z = (U^1, ..., U^J, V_1, ..., V_J).

    Also used for gradients of g and for Hessian directions q.
    """
    copies: tuple[DenseMatrix, ...]
    locals: tuple[DenseMatrix, ...]

    def __post_init__(self) -> None:
        copies = tuple(as_matrix(c, name=f"U^{j + 1}") for j, c in enumerate(self.copies))
        local_blocks = tuple(as_matrix(v, name=f"V_{j + 1}") for j, v in enumerate(self.locals))
        if not copies or len(copies) != len(local_blocks):
            raise DimensionMismatchError(
                f"Need one copy per local block, got {len(copies)} and {len(local_blocks)}"
            )
        shape = copies[0].shape
        for j, c in enumerate(copies):
            if c.shape != shape:
                raise DimensionMismatchError(f"U^{j + 1} has shape {c.shape}, U^1 has {shape}")
        for j, v in enumerate(local_blocks):
            if v.shape[1] != shape[1]:
                raise DimensionMismatchError(f"V_{j + 1} has {v.shape[1]} columns, expected {shape[1]}")
        object.__setattr__(self, "copies", copies)
        object.__setattr__(self, "locals", local_blocks)

    @classmethod
    def consensus(cls, p: FactorPair, widths: Sequence[int]) -> "NetworkPoint":
        """Every copy equal to U, V split into blocks of the given widths."""
        offsets = np.concatenate([[0], np.cumsum(widths)]).astype(int)
        if offsets[-1] != p.v.shape[0]:
            raise DimensionMismatchError(f"Widths {tuple(widths)} do not partition V ({p.v.shape[0]} rows)")
        return cls(
            copies=tuple(p.u.copy() for _ in widths),
            locals=tuple(p.v[offsets[j]:offsets[j + 1], :].copy() for j in range(len(widths))),
        )

    @property
    def J(self) -> int:
        return len(self.copies)

    @property
    def shape(self) -> NetworkShape:
        n, r = self.copies[0].shape
        return NetworkShape(n=n, r=r, widths=tuple(v.shape[0] for v in self.locals))

    def stacked_copies(self) -> NDArray[np.float64]:
        """Copies as one (J, n, r) array."""
        return np.stack(self.copies)

    def mean_copy(self) -> DenseMatrix:
        """Entrywise mean of the copies, or the common copy itself at exact consensus."""
        first = self.copies[0]
        if all(np.array_equal(c, first) for c in self.copies[1:]):
            return np.array(first, copy=True)
        return np.mean(self.stacked_copies(), axis=0)

    def assemble(self) -> FactorPair:
        """Centralized pair (mean copy, stacked locals)."""
        return FactorPair(self.mean_copy(), np.vstack(self.locals))

    def z_norm(self) -> float:
        """sqrt(sum_j ||U^j||_F^2 + sum_j ||V_j||_F^2)."""
        total = sum(frob_norm(c)**2 for c in self.copies) + sum(frob_norm(v)**2 for v in self.locals)
        return float(np.sqrt(total))

    def to_vector(self) -> NDArray[np.float64]:
        return np.concatenate([c.ravel() for c in self.copies] + [v.ravel() for v in self.locals])

    def require_like(self, other: "NetworkPoint", name: str = "direction") -> None:
        """Raise DimensionMismatchError unless `other` has the same shape."""
        if other.shape != self.shape:
            raise DimensionMismatchError(f"{name} has shape {other.shape}, expected {self.shape}")

    def __add__(self, other: "NetworkPoint") -> "NetworkPoint":
        self.require_like(other, "operand")
        return NetworkPoint(
            copies=tuple(a + b for a, b in zip(self.copies, other.copies)),
            locals=tuple(a + b for a, b in zip(self.locals, other.locals)),
        )

    def __sub__(self, other: "NetworkPoint") -> "NetworkPoint":
        self.require_like(other, "operand")
        return NetworkPoint(
            copies=tuple(a - b for a, b in zip(self.copies, other.copies)),
            locals=tuple(a - b for a, b in zip(self.locals, other.locals)),
        )

    def __mul__(self, alpha: float) -> "NetworkPoint":
        return NetworkPoint(
            copies=tuple(alpha * c for c in self.copies),
            locals=tuple(alpha * v for v in self.locals),
        )

    __rmul__ = __mul__
