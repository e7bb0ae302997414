"""Objective functions, derivatives and bounds for distributed matrix factorization."""

from .bounds import (
    BoundsTriple,
    WindowEval,
    lipschitz_Lg,
    local_bounds,
    safe_stepsize,
    stepsize_generic,
    stepsize_local,
    stepsize_mf,
    window_eval,
    window_gradient,
    window_hessian,
    window_value,
    windowed_g_value,
)
from .network import (
    DataPartition,
    FactorPair,
    NetworkPoint,
    NetworkShape,
    even_widths,
)
from .values import (
    data_gradient,
    f_blocks,
    f_value,
    g_value,
    grad_f,
    grad_f_block,
    grad_g,
    hvp_f,
    hvp_g,
    penalty_gradient,
    penalty_value,
    quadform_f,
    quadform_g,
)

__all__ = [
    'BoundsTriple',
    'DataPartition',
    'FactorPair',
    'NetworkPoint',
    'NetworkShape',
    'WindowEval',
    'data_gradient',
    'even_widths',
    'f_blocks',
    'f_value',
    'g_value',
    'grad_f',
    'grad_f_block',
    'grad_g',
    'hvp_f',
    'hvp_g',
    'lipschitz_Lg',
    'local_bounds',
    'penalty_gradient',
    'penalty_value',
    'quadform_f',
    'quadform_g',
    'safe_stepsize',
    'stepsize_generic',
    'stepsize_local',
    'stepsize_mf',
    'window_eval',
    'window_gradient',
    'window_hessian',
    'window_value',
    'windowed_g_value',
]
