"""Base class for iteration engines."""

from abc import (
    ABC,
    abstractmethod,
)
from typing import (
    Generic,
    TypeVar,
)

from ..objective import (
    FactorPair,
    NetworkPoint,
)

State = TypeVar("State", NetworkPoint, FactorPair)


class Engine(ABC, Generic[State]):
    """One synchronous update rule together with the metrics it reports.

    Subclasses own their stepsize and problem data; `step` must read only the
    state it is given and return a fresh state.
    """

    name: str
    mu: float

    @abstractmethod
    def prepare(self, z0: NetworkPoint) -> State:
        """Turn a network starting point into this engine's state.

        Args:
            z0: Starting point of the network

        Returns:
            Initial state for `step`
        """
        pass

    @abstractmethod
    def step(self, state: State) -> State:
        """Advance one round.

        Args:
            state: Iterate k

        Returns:
            Iterate k + 1
        """
        pass

    @abstractmethod
    def objective(self, state: State) -> float:
        """Objective the engine descends (g for network engines, f for central)."""
        pass

    @abstractmethod
    def gradient_norm(self, state: State) -> float:
        """Norm of the gradient of `objective` at `state`."""
        pass

    @abstractmethod
    def assemble(self, state: State) -> FactorPair:
        """Centralized pair the state represents."""
        pass

    @abstractmethod
    def consensus_error(self, state: State) -> float:
        """Spread of the copies, zero for centralized engines."""
        pass

    @abstractmethod
    def norm(self, state: State) -> float:
        """Norm used for the ball B_rho."""
        pass
