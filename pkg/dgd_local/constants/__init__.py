"""
All constants for dgd_local. Tolerances, finite-difference steps, iteration
caps, seed streams and the field names of the trace and summary files live here
so that every module (and every test) reads the same values.
"""

from .defaults import (
    DEFAULT_MAX_ITERS,
    DEFAULT_SAFETY,
    EIG_MAX_ITERS,
    EIG_SHIFT_MARGIN,
    EQUIV_ITERS,
    ERDOS_MAX_ATTEMPTS,
    FINITE_DIFF,
    FLOAT_FORMAT,
    SEED_STREAMS,
    SUMMARY_FIELDS,
    TOLERANCES,
    TRACE_FIELDS,
    FiniteDiffSteps,
    SeedStreams,
    Tolerances,
)

__all__ = [
    'DEFAULT_MAX_ITERS',
    'DEFAULT_SAFETY',
    'EIG_MAX_ITERS',
    'EIG_SHIFT_MARGIN',
    'EQUIV_ITERS',
    'ERDOS_MAX_ATTEMPTS',
    'FINITE_DIFF',
    'FLOAT_FORMAT',
    'SEED_STREAMS',
    'SUMMARY_FIELDS',
    'TOLERANCES',
    'TRACE_FIELDS',
    'FiniteDiffSteps',
    'SeedStreams',
    'Tolerances',
]
