"""Exception types raised by dgd_local.

Every type derives from a builtin so callers may catch either the specific type
or the builtin it refines.
"""


class DimensionMismatchError(ValueError):
    """Operands are not conformable."""


class NonFiniteError(ValueError):
    """A NaN or Inf entry was admitted into a dense matrix."""


class StepsizeError(ValueError):
    """No stepsize exists for the requested weights (omega >= 1/2)."""


class ConfigError(ValueError):
    """Experiment configuration could not be parsed or validated."""


class DegenerateFactorsError(ValueError):
    """Factor pair has numerical rank below its factor width."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration or attempt cap."""


class ClassificationError(RuntimeError):
    """A critical point is neither a global minimum nor a strict saddle."""
