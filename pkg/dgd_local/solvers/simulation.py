"""Synchronous network simulation, the run loop and the equivalence check."""

import logging
from typing import (
    Any,
    Generic,
    Optional,
)

import numpy as np

from ..constants import (
    EQUIV_ITERS,
    TOLERANCES,
)
from ..errors import NonFiniteError
from ..geometry import opt_gap
from ..matkit import (
    DenseMatrix,
    frob_norm,
    tail_energy,
)
from ..objective import (
    DataPartition,
    NetworkPoint,
    f_value,
    safe_stepsize,
    stepsize_mf,
)
from ..topology import (
    MixingMatrix,
    omega,
    to_gd_weights,
)
from ._base import (
    Engine,
    State,
)
from .steps import (
    EngineKind,
    build_engine,
    dgd_local_step,
    gd_g_step,
)
from .trace import (
    IterateTrace,
    RunConfig,
    RunStatus,
    TraceRecord,
)

logger = logging.getLogger(__name__)


def resolve_stepsize(cfg: RunConfig, m: MixingMatrix, d: DataPartition) -> float:
    """cfg.mu, or safety * stepsize_mf(rho, omega, block norms) for mu = "auto".

    Raises:
        StepsizeError: If mu is "auto" and omega(m) >= 1/2
    """
    if cfg.mu == "auto":
        return safe_stepsize(stepsize_mf(cfg.rho, omega(m), d.block_norms()), cfg.safety)
    return float(cfg.mu)


def resolve_tol_grad(cfg: RunConfig, y: DenseMatrix) -> float:
    if cfg.tol_grad == "auto":
        return TOLERANCES.grad_scale * (1.0 + frob_norm(y))
    return float(cfg.tol_grad)


# ------------------------------------------------------------------------------
# ---- Simulation --------------------------------------------------------------
# ------------------------------------------------------------------------------


class NetworkSimulation(Generic[State]):
    """Step-by-step driver of one engine with ball and descent monitoring.

    `reset` records iterate 0; each `step` performs one synchronous round and
    returns (record, terminated, truncated). A run is terminated when the
    gradient tolerance is met, or when the iterate leaves B_rho with
    `halt_on_leave` set or becomes non-finite; it is truncated at `max_iters`.
    """

    def __init__(
        self,
        engine: Engine[State],
        data: DataPartition,
        rho: float,
        tol_grad: float,
        max_iters: int,
        halt_on_leave: bool = False,
    ):
        if rho <= 0 or tol_grad <= 0:
            raise ValueError(f"rho and tol_grad must be positive, got rho={rho}, tol_grad={tol_grad}")
        if max_iters < 0:
            raise ValueError(f"max_iters must be nonnegative, got {max_iters}")

        self.engine: Engine[State] = engine
        self.data: DataPartition = data
        self.rho: float = rho
        self.tol_grad: float = tol_grad
        self.max_iters: int = max_iters
        self.halt_on_leave: bool = halt_on_leave

        self._floor: float = 0.0
        self._state: Optional[State] = None
        self._trace: Optional[IterateTrace] = None
        self._done: bool = True

    @property
    def trace(self) -> IterateTrace:
        if self._trace is None:
            raise RuntimeError("Simulation has not been reset")
        return self._trace

    @property
    def state(self) -> State:
        if self._state is None:
            raise RuntimeError("Simulation has not been reset")
        return self._state

    @property
    def done(self) -> bool:
        return self._done

    def reset(self, z0: NetworkPoint) -> TraceRecord:
        """Start a new run from `z0` and return the record of iterate 0."""
        state = self.engine.prepare(z0)
        self._floor = tail_energy(self.data.y, self.engine.assemble(state).r)
        self._state = state
        self._trace = IterateTrace(
            engine=self.engine.name,
            mu=self.engine.mu,
            rho=self.rho,
            tol_grad=self.tol_grad,
        )
        self._done = False

        record = self._record(0, state)
        self._trace.records.append(record)
        self._check_done(record)
        return record

    def step(self) -> tuple[TraceRecord, bool, bool]:
        """Advance one round.

        Returns:
            Tuple of (record, terminated, truncated)

        Raises:
            RuntimeError: If the run already finished
        """
        if self._done:
            raise RuntimeError("Run already finished; call reset() first")
        trace = self.trace
        previous = trace.final

        try:
            with np.errstate(over="ignore", invalid="ignore"):
                state = self.engine.step(self.state)
                record = self._record(previous.iter + 1, state)
        except NonFiniteError:
            logger.warning("Iterate became non-finite after iteration %d; stopping", previous.iter)
            trace.diverged = True
            trace.status = RunStatus.LEFT_BALL
            self._done = True
            return previous, True, False

        self._state = state
        trace.records.append(record)

        slack = TOLERANCES.descent_slack * max(1.0, abs(previous.g_value))
        if not record.g_value <= previous.g_value + slack:
            trace.descent_violations += 1
            logger.warning(
                "Objective increased at iteration %d: %.17g -> %.17g", record.iter, previous.g_value,
                record.g_value
            )
        if previous.in_ball and not record.in_ball:
            logger.info("Iterate left B_rho at iteration %d (norm %.6g >= rho %.6g)", record.iter,
                        record.z_norm, self.rho)

        terminated, truncated = self._check_done(record)
        return record, terminated, truncated

    def info(self) -> dict[str, Any]:
        trace = self.trace
        return {
            'engine': trace.engine,
            'iter': trace.final.iter,
            'mu': trace.mu,
            'rho': trace.rho,
            'tol_grad': trace.tol_grad,
            'status': trace.status.value if trace.status else None,
            'descent_violations': trace.descent_violations,
            'left_ball_ever': trace.left_ball_ever,
        }

    def _record(self, k: int, state: State) -> TraceRecord:
        p = self.engine.assemble(state)
        z_norm = self.engine.norm(state)
        return TraceRecord(
            iter=k,
            f_central=f_value(p, self.data.y),
            g_value=self.engine.objective(state),
            grad_norm=self.engine.gradient_norm(state),
            consensus_err=self.engine.consensus_error(state),
            opt_gap=opt_gap(p, self.data.y, self._floor),
            z_norm=z_norm,
            in_ball=bool(z_norm < self.rho),
        )

    def _check_done(self, record: TraceRecord) -> tuple[bool, bool]:
        trace = self.trace
        terminated = truncated = False
        if record.grad_norm <= self.tol_grad:
            trace.status = RunStatus.GRAD_TOLERANCE_MET
            terminated = True
        elif self.halt_on_leave and not record.in_ball:
            trace.status = RunStatus.LEFT_BALL
            terminated = True
        elif record.iter >= self.max_iters:
            trace.status = RunStatus.MAX_ITERS
            truncated = True
        self._done = terminated or truncated
        return terminated, truncated


# ------------------------------------------------------------------------------
# ---- Drivers -----------------------------------------------------------------
# ------------------------------------------------------------------------------


def run(
    engine: EngineKind,
    z0: NetworkPoint,
    cfg: RunConfig,
    m: MixingMatrix,
    d: DataPartition,
) -> IterateTrace:
    """Iterate `engine` from `z0` until a stopping rule fires.

    Stops when ||grad|| <= tol_grad, at cfg.max_iters, or on leaving B_rho when
    cfg.halt_on_leave is set. Leaving the ball is otherwise only recorded.

    Args:
        engine: "dgd_local", "gd_on_g" or "central"
        z0: Starting point
        cfg: Run configuration
        m: Mixing matrix (also the source of omega for mu = "auto")
        d: Data partition

    Returns:
        The full trace with its terminal status

    Raises:
        StepsizeError: If mu is "auto" and omega(m) >= 1/2
        DimensionMismatchError: If z0, m and d do not conform
    """
    mu = resolve_stepsize(cfg, m, d)
    sim = NetworkSimulation(
        build_engine(engine, m, mu, d),
        d,
        rho=cfg.rho,
        tol_grad=resolve_tol_grad(cfg, d.y),
        max_iters=cfg.max_iters,
        halt_on_leave=cfg.halt_on_leave,
    )
    logger.info("Starting %s run: mu=%.6g rho=%.6g tol_grad=%.3g max_iters=%d", engine, mu, cfg.rho,
                sim.tol_grad, cfg.max_iters)

    sim.reset(z0)
    while not sim.done:
        sim.step()

    trace = sim.trace
    final = trace.final
    logger.info(
        "Finished %s run: %s after %d iterations (f=%.6g, consensus=%.3e, gap=%.3e, "
        "descent violations=%d)", engine, trace.status.value if trace.status else None, final.iter,
        final.f_central, final.consensus_err, final.opt_gap, trace.descent_violations
    )
    return trace


def equivalence_check(
    z0: NetworkPoint,
    m: MixingMatrix,
    mu: float,
    d: DataPartition,
    K: int = EQUIV_ITERS,
) -> float:
    """Largest relative distance between DGD+LOCAL and GD on g over K steps from z0.

    Both engines start at z0; GD on g uses w = wtilde / (4 mu). The distance at
    each step is ||z_dgd - z_gd|| / max(||z_dgd||, ||z_gd||).

    Returns:
        The maximum over steps, or inf once either iterate becomes non-finite
    """
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    w = to_gd_weights(m, mu)
    a = b = z0
    worst = 0.0
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(K):
                a = dgd_local_step(a, m, mu, d)
                b = gd_g_step(b, w, mu, d)
                diff = (a - b).z_norm()
                scale = max(a.z_norm(), b.z_norm())
                if diff:
                    worst = max(worst, diff / scale if scale else float("inf"))
    except NonFiniteError:
        return float("inf")
    return worst
