"""Default tolerances, step sizes and stream identifiers for dgd_local."""

from dataclasses import dataclass

# ------------------------------------------------------------------------------
# ---- Numerical Tolerances ----------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    """Tolerances shared across modules.

    Relative values are relative to the natural scale of the quantity they guard
    (e.g. sigma_max for rank decisions, 1 + ||Y||_F for gradient stopping).
    """
    rank: float  # Relative singular value cutoff
    row_sum: float  # |row sum - 1| admitted in a mixing matrix
    symmetry: float  # |w_ij - w_ji| admitted in a mixing matrix
    grad_scale: float  # tol_grad = grad_scale * (1 + ||Y||_F)
    saddle: float  # Rayleigh quotient below -saddle certifies a strict saddle
    consensus: float
    block_sum: float  # Relative agreement of block-summed and full objective
    descent_slack: float  # Slack admitted in g(z_{k+1}) <= g(z_k)
    eig_stable: float  # Rayleigh quotient change regarded as stabilized
    witness: float  # Agreement of stored witness with reported value
    clip: float  # Optimality gaps within this of zero are reported as zero
    relative_gap: float  # opt_gap / ||Y||_F^2 counted as solved in Monte-Carlo studies


TOLERANCES = Tolerances(
    rank=1e-12,
    row_sum=1e-12,
    symmetry=1e-15,
    grad_scale=1e-9,
    saddle=1e-8,
    consensus=1e-6,
    block_sum=1e-12,
    descent_slack=1e-12,
    eig_stable=1e-9,
    witness=1e-8,
    clip=1e-12,
    relative_gap=1e-4,
)

# ------------------------------------------------------------------------------
# ---- Finite Differences ------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteDiffSteps:
    """Step sizes used by finite-difference oracles."""
    first_order_scale: float  # h = first_order_scale * (1 + ||point||)
    second_order: float  # t in (f(p+t d) - 2 f(p) + f(p-t d)) / t^2


FINITE_DIFF = FiniteDiffSteps(first_order_scale=1e-5, second_order=1e-3)

# ------------------------------------------------------------------------------
# ---- Iteration Caps and Defaults ---------------------------------------------
# ------------------------------------------------------------------------------

DEFAULT_SAFETY: float = 0.99
DEFAULT_MAX_ITERS: int = 200_000
ERDOS_MAX_ATTEMPTS: int = 1000
EIG_MAX_ITERS: int = 20_000
EIG_SHIFT_MARGIN: float = 1.05  # Multiplies the dominant-magnitude estimate
EQUIV_ITERS: int = 200

# ------------------------------------------------------------------------------
# ---- Seed Streams ------------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class SeedStreams:
    """Fixed offsets mixed into the master seed, one per purpose.

    A generator for purpose P is np.random.default_rng([seed, P]); changing what
    one stage draws cannot perturb another stage.
    """
    data: int
    init: int
    eig: int
    graph: int


SEED_STREAMS = SeedStreams(data=0, init=1, eig=2, graph=3)

# ------------------------------------------------------------------------------
# ---- File Formats ------------------------------------------------------------
# ------------------------------------------------------------------------------

TRACE_FIELDS: tuple[str, ...] = (
    'iter',
    'f_central',
    'g_value',
    'grad_norm',
    'consensus_err',
    'opt_gap',
    'z_norm',
    'in_ball',
)
SUMMARY_FIELDS: tuple[str, ...] = (
    'status',
    'iters',
    'final_f',
    'final_consensus_err',
    'final_opt_gap',
    'left_ball_ever',
)
FLOAT_FORMAT: str = '.17g'  # Round-trips doubles exactly
