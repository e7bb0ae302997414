"""DGD+LOCAL simulator for distributed low-rank matrix factorization."""

from .constants import *
from .errors import (
    ClassificationError,
    ConfigError,
    ConvergenceError,
    DegenerateFactorsError,
    DimensionMismatchError,
    NonFiniteError,
    StepsizeError,
)
from .geometry import (
    CriticalVerdict,
    balance_factors,
    classify_critical,
    lift_pair,
)
from .harness import ExperimentConfig
from .harness.experiment import (
    monte_carlo,
    run_experiment,
)
from .objective import (
    DataPartition,
    FactorPair,
    NetworkPoint,
)
from .solvers import (
    IterateTrace,
    NetworkSimulation,
    RunConfig,
    RunStatus,
    equivalence_check,
    run,
)
from .topology import (
    Graph,
    MixingMatrix,
    build_graph,
    lazy_fix,
    metropolis_weights,
)

__version__ = "0.1.0"
__all__ = [
    "DataPartition",
    "FactorPair",
    "NetworkPoint",
    "Graph",
    "MixingMatrix",
    "build_graph",
    "metropolis_weights",
    "lazy_fix",
    "RunConfig",
    "RunStatus",
    "IterateTrace",
    "NetworkSimulation",
    "run",
    "equivalence_check",
    "CriticalVerdict",
    "classify_critical",
    "balance_factors",
    "lift_pair",
    "ExperimentConfig",
    "run_experiment",
    "monte_carlo",
    "ClassificationError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateFactorsError",
    "DimensionMismatchError",
    "NonFiniteError",
    "StepsizeError",
]
