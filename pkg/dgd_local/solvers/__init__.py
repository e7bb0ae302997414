"""Iteration engines, the run loop and run traces."""

from ._base import Engine
from .simulation import (
    NetworkSimulation,
    equivalence_check,
    resolve_stepsize,
    resolve_tol_grad,
    run,
)
from .steps import (
    ENGINE_KINDS,
    CentralEngine,
    DGDLocalEngine,
    EngineKind,
    GDOnGEngine,
    build_engine,
    dgd_local_step,
    gd_central_step,
    gd_g_step,
)
from .trace import (
    IterateTrace,
    RunConfig,
    RunStatus,
    TraceRecord,
    write_json,
    write_summary_json,
    write_trace_csv,
)

__all__ = [
    'ENGINE_KINDS',
    'CentralEngine',
    'DGDLocalEngine',
    'Engine',
    'EngineKind',
    'GDOnGEngine',
    'IterateTrace',
    'NetworkSimulation',
    'RunConfig',
    'RunStatus',
    'TraceRecord',
    'build_engine',
    'dgd_local_step',
    'equivalence_check',
    'gd_central_step',
    'gd_g_step',
    'resolve_stepsize',
    'resolve_tol_grad',
    'run',
    'write_json',
    'write_summary_json',
    'write_trace_csv',
]
