"""Lipschitz constants, stepsize rules and the smooth window function.

The window w(x) equals 1 inside the ball of radius rho, 0 outside radius 2 rho,
and on rho < ||x|| < 2 rho

    w(x) = 2 - ||x|| / rho + sin(2 pi ||x|| / rho) / (2 pi).

It is C^2 with ||grad w|| <= 2 / rho and ||hess w|| <= (2 + 2 pi) / rho^2, which
is what turns local derivative bounds L0, L1, L2 on the 2 rho ball into a
global Lipschitz constant for the windowed objective.
"""

import math
from dataclasses import dataclass
from typing import (
    NamedTuple,
    Sequence,
)

import numpy as np
from numpy.typing import NDArray

from ..constants import DEFAULT_SAFETY
from ..errors import StepsizeError
from ..matkit import frob_norm
from ..topology import GDWeights
from .network import (
    DataPartition,
    NetworkPoint,
)
from .values import (
    _residual,
    check_network,
    penalty_value,
)

# (212 + 64 pi) rho^2 + 34 ||Y_j|| + (4 + 4 pi) ||Y_j||^2 / rho^2
MF_RHO_COEFF: float = 212.0 + 64.0 * math.pi
MF_LINEAR_COEFF: float = 34.0
MF_QUADRATIC_COEFF: float = 4.0 + 4.0 * math.pi

WINDOW_HESS_BOUND: float = 2.0 + 2.0 * math.pi  # Times 1 / rho^2

# ------------------------------------------------------------------------------
# ---- Types -------------------------------------------------------------------
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundsTriple:
    """Bounds |f_j| <= l0, ||grad f_j|| <= l1, ||hess f_j|| <= l2 on the 2 rho ball."""
    l0: float
    l1: float
    l2: float
    rho: float


class WindowEval(NamedTuple):
    """Radial evaluation of the window function."""
    value: float
    slope: float  # |dw/d||x|||
    hess_bound_ok: bool


# ------------------------------------------------------------------------------
# ---- Lipschitz Constants -----------------------------------------------------
# ------------------------------------------------------------------------------


def lipschitz_Lg(L: float, omega: float, mu: float) -> float:
    """Lipschitz constant L + 2 omega / mu of grad g."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return L + 2.0 * omega / mu


def local_bounds(rho: float, ynorm: float) -> BoundsTriple:
    """Closed-form bounds on one matrix-factorization block over the 2 rho ball.

    L0 = 32 rho^4 + 2 ||Y_j||^2, L1 = 32 rho^3 + 8 rho ||Y_j||,
    L2 = 20 rho^2 + 2 ||Y_j||.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if ynorm < 0:
        raise ValueError(f"||Y_j||_F must be nonnegative, got {ynorm}")
    return BoundsTriple(
        l0=32.0 * rho**4 + 2.0 * ynorm**2,
        l1=32.0 * rho**3 + 8.0 * rho * ynorm,
        l2=20.0 * rho**2 + 2.0 * ynorm,
        rho=rho,
    )


# ------------------------------------------------------------------------------
# ---- Stepsize Rules ----------------------------------------------------------
# ------------------------------------------------------------------------------


def _check_omega(omega: float) -> None:
    if omega < 0:
        raise ValueError(f"omega must be nonnegative, got {omega}")
    if omega >= 0.5:
        raise StepsizeError(
            f"omega = {omega:.6g} >= 1/2 admits no stepsize; apply lazy_fix to the mixing "
            "matrix (W~ + I) / 2, which halves omega"
        )


def stepsize_generic(L: float, omega: float) -> float:
    """Open upper bound (1 - 2 omega) / L for globally L-smooth blocks.

    Callers must use a strictly smaller stepsize, see `safe_stepsize`.

    Raises:
        StepsizeError: If omega >= 1/2
    """
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    _check_omega(omega)
    return (1.0 - 2.0 * omega) / L


def local_denominator(b: BoundsTriple) -> float:
    """L2 + 4 L1 / rho + (2 + 2 pi) L0 / rho^2 for one block."""
    return b.l2 + 4.0 * b.l1 / b.rho + WINDOW_HESS_BOUND * b.l0 / b.rho**2


def stepsize_local(bounds: Sequence[BoundsTriple], omega: float) -> float:
    """Open bound (1 - 2 omega) / max_j (L2j + 4 L1j / rho + (2 + 2 pi) L0j / rho^2).

    Rule for blocks whose derivatives are only bounded on the 2 rho ball.
    """
    if not bounds:
        raise ValueError("Need bounds for at least one block")
    _check_omega(omega)
    return (1.0 - 2.0 * omega) / max(local_denominator(b) for b in bounds)


def mf_denominator(rho: float, ynorm: float) -> float:
    """(212 + 64 pi) rho^2 + 34 ||Y_j|| + (4 + 4 pi) ||Y_j||^2 / rho^2."""
    return MF_RHO_COEFF * rho**2 + MF_LINEAR_COEFF * ynorm + MF_QUADRATIC_COEFF * ynorm**2 / rho**2


def stepsize_mf(rho: float, omega: float, block_norms: Sequence[float]) -> float:
    """Open stepsize bound for DGD+LOCAL on matrix factorization.

    (1 - 2 omega) / max_j mf_denominator(rho, ||Y_j||_F). The closed form is
    cross-checked against the composition `stepsize_local(local_bounds(...))`.

    Raises:
        StepsizeError: If omega >= 1/2
        ArithmeticError: If the closed form and the composition disagree
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not block_norms:
        raise ValueError("Need at least one block norm")
    _check_omega(omega)

    denominators = [mf_denominator(rho, y) for y in block_norms]
    for y, closed in zip(block_norms, denominators):
        composed = local_denominator(local_bounds(rho, y))
        if abs(composed - closed) > 1e-12 * closed:
            raise ArithmeticError(f"Denominator mismatch at ||Y_j||={y}: {closed!r} vs {composed!r}")

    return (1.0 - 2.0 * omega) / max(denominators)


def safe_stepsize(bound: float, safety: float = DEFAULT_SAFETY) -> float:
    """Stepsize strictly below an open bound: safety * bound, 0 < safety <= 1."""
    if not 0 < safety <= 1:
        raise ValueError(f"safety must lie in (0, 1], got {safety}")
    return safety * bound


# ------------------------------------------------------------------------------
# ---- Window Function ---------------------------------------------------------
# ------------------------------------------------------------------------------


def _radial(radius: float, rho: float) -> tuple[float, float, float]:
    """Window value and its first two radial derivatives (signed)."""
    if radius <= rho or radius >= 2.0 * rho:
        return (1.0 if radius <= rho else 0.0), 0.0, 0.0
    t = radius / rho
    value = 2.0 - t + math.sin(2.0 * math.pi * t) / (2.0 * math.pi)
    first = -(2.0 / rho) * math.sin(math.pi * t)**2
    second = -(2.0 * math.pi / rho**2) * math.sin(2.0 * math.pi * t)
    return value, first, second


def window_eval(radius: float, rho: float) -> WindowEval:
    """Window value, radial slope magnitude and Hessian-bound check at `radius`.

    The Hessian of a radial function has eigenvalues w'' (radial) and w' / r
    (tangential); both must stay within (2 + 2 pi) / rho^2.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    value, first, second = _radial(radius, rho)
    tangential = abs(first) / radius if radius > 0 else 0.0
    hess_norm = max(abs(second), tangential)
    return WindowEval(
        value=value,
        slope=abs(first),
        hess_bound_ok=hess_norm <= WINDOW_HESS_BOUND / rho**2 * (1.0 + 1e-12),
    )


def window_value(x: NDArray[np.float64], rho: float) -> float:
    return _radial(float(np.linalg.norm(x)), rho)[0]


def window_gradient(x: NDArray[np.float64], rho: float) -> NDArray[np.float64]:
    """w'(||x||) x / ||x||; zero off the transition shell."""
    radius = float(np.linalg.norm(x))
    _, first, _ = _radial(radius, rho)
    if first == 0.0:
        return np.zeros_like(x, dtype=np.float64)
    return first * x / radius


def window_hessian(x: NDArray[np.float64], rho: float) -> NDArray[np.float64]:
    """w'' u u^T + (w' / r)(I - u u^T) with u = x / ||x||, as a dense matrix."""
    x = np.ravel(x).astype(np.float64)
    radius = float(np.linalg.norm(x))
    _, first, second = _radial(radius, rho)
    if first == 0.0 and second == 0.0:
        return np.zeros((x.size, x.size))
    unit = x / radius
    radial = np.outer(unit, unit)
    return second * radial + (first / radius) * (np.eye(x.size) - radial)


def windowed_g_value(z: NetworkPoint, w: GDWeights, d: DataPartition, rho: float) -> float:
    """g with every data term multiplied by the window of its own block (U^j, V_j).

    Agrees with g_value on the rho ball; the data terms vanish once a block leaves
    the 2 rho ball, which bounds the gradient Lipschitz constant globally.
    """
    check_network(z, d, w)
    data = 0.0
    for u_j, v_j, y_j in zip(z.copies, z.locals, d.blocks):
        block_radius = math.sqrt(frob_norm(u_j)**2 + frob_norm(v_j)**2)
        weight = _radial(block_radius, rho)[0]
        if weight:
            data += weight * frob_norm(_residual(u_j, v_j, y_j))**2
    return data + penalty_value(z, w)
