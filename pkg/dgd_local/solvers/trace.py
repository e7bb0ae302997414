"""Run configuration, per-iteration records and their CSV/JSON writers."""

import csv
import json
import math
from dataclasses import (
    dataclass,
    field,
)
from enum import Enum
from typing import (
    Literal,
    NamedTuple,
    Optional,
    Union,
)

from ..constants import (
    DEFAULT_MAX_ITERS,
    DEFAULT_SAFETY,
    FLOAT_FORMAT,
    SUMMARY_FIELDS,
    TOLERANCES,
    TRACE_FIELDS,
)
from ..matkit import PathLike

Auto = Literal["auto"]


class RunStatus(str, Enum):
    """Terminal status of a run."""
    GRAD_TOLERANCE_MET = "GradToleranceMet"
    MAX_ITERS = "MaxIters"
    LEFT_BALL = "LeftBall"


@dataclass(frozen=True)
class RunConfig:
    """Stepsize, monitoring ball and stopping rules of one run.

    `mu = "auto"` resolves to safety * stepsize_mf(rho, omega, block norms) and
    `tol_grad = "auto"` to 1e-9 (1 + ||Y||_F) when the run starts.
    """
    rho: float
    mu: Union[float, Auto] = "auto"
    max_iters: int = DEFAULT_MAX_ITERS
    tol_grad: Union[float, Auto] = "auto"
    tol_consensus: float = TOLERANCES.consensus
    seed: int = 0
    safety: float = DEFAULT_SAFETY
    halt_on_leave: bool = False

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.mu != "auto" and not (isinstance(self.mu, (int, float)) and self.mu > 0):
            raise ValueError(f"mu must be positive or 'auto', got {self.mu!r}")
        if self.tol_grad != "auto" and not (isinstance(self.tol_grad, (int, float)) and self.tol_grad > 0):
            raise ValueError(f"tol_grad must be positive or 'auto', got {self.tol_grad!r}")
        if not self.tol_consensus > 0:
            raise ValueError(f"tol_consensus must be positive, got {self.tol_consensus}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be nonnegative, got {self.max_iters}")
        if not 0 < self.safety <= 1:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety}")


class TraceRecord(NamedTuple):
    """Metrics of one iterate; field order is the CSV column order."""
    iter: int
    f_central: float
    g_value: float
    grad_norm: float
    consensus_err: float
    opt_gap: float
    z_norm: float
    in_ball: bool


@dataclass
class IterateTrace:
    """Records of one run plus its terminal status and resolved parameters."""
    engine: str
    mu: float
    rho: float
    tol_grad: float
    records: list[TraceRecord] = field(default_factory=list)
    status: Optional[RunStatus] = None
    descent_violations: int = 0
    diverged: bool = False

    @property
    def final(self) -> TraceRecord:
        if not self.records:
            raise ValueError("Trace holds no records")
        return self.records[-1]

    @property
    def iters(self) -> int:
        return self.final.iter

    @property
    def left_ball_ever(self) -> bool:
        return self.diverged or any(not rec.in_ball for rec in self.records)

    def column(self, name: str) -> list[float]:
        idx = TRACE_FIELDS.index(name)
        return [rec[idx] for rec in self.records]

    def summary(self) -> dict[str, object]:
        """Terminal summary with the keys of SUMMARY_FIELDS."""
        if self.status is None:
            raise ValueError("Run has not finished")
        final = self.final
        values = {
            'status': self.status.value,
            'iters': final.iter,
            'final_f': final.f_central,
            'final_consensus_err': final.consensus_err,
            'final_opt_gap': final.opt_gap,
            'left_ball_ever': self.left_ball_ever,
        }
        return {key: values[key] for key in SUMMARY_FIELDS}


# ------------------------------------------------------------------------------
# ---- Writers -----------------------------------------------------------------
# ------------------------------------------------------------------------------


def format_float(x: float) -> str:
    """17 significant digits, which read back to the same double; inf/nan spelled out."""
    if math.isfinite(x):
        return format(x, FLOAT_FORMAT)
    return str(x)


def _json_safe(value: object) -> object:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value


def write_trace_csv(path: PathLike, trace: IterateTrace) -> None:
    """Write one row per record under the header of TRACE_FIELDS.

    Floats carry 17 significant digits and in_ball is written as 1/0, so equal
    traces give byte-identical files.
    """
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_FIELDS)
        for rec in trace.records:
            writer.writerow([
                rec.iter,
                *(format_float(x) for x in rec[1:7]),
                int(rec.in_ball),
            ])


def write_summary_json(path: PathLike, trace: IterateTrace) -> None:
    write_json(path, trace.summary())


def write_json(path: PathLike, payload: dict[str, object]) -> None:
    """Write `payload` as indented JSON; non-finite floats become strings."""
    with open(path, "w") as f:
        json.dump(_json_safe(payload), f, indent=2)
        f.write("\n")
