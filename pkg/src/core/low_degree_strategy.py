"""
Abstract interface for the MIS subroutine run by committed nodes on their low-degree subgraph.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict

from src.core.protocol import NodeContext, NodeProgram


class LowDegreeStrategy(ABC):
    """MIS on a subgraph of degree O(log n), played inside a fixed window of rounds.

    Every participant starts at the same round and must return within `round_budget()` rounds;
    the caller sleeps out whatever remains of the window, so non-participants and participants
    meet again at the same offset.
    """

    name: str = 'strategy'

    @abstractmethod
    def round_budget(self) -> int:
        """Deterministic worst-case span T_G of one execution."""
        pass

    @abstractmethod
    def participate(self, node: NodeContext, phase: int) -> NodeProgram:
        """Run the subroutine; returns IN_MIS, OUT_MIS or None when it failed to decide."""
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Constants of the strategy for the config snapshot."""
        pass
