"""
Protocol interface driven by the radio engine.

A protocol hands the engine one program per node. A program is a generator: it yields the RoundAction
for the current round and receives the Observation of that round back from `send()`. Its frame is the
node's state. Sub-protocols compose with `yield from` and return their result to the caller.
"""
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Generator, Optional

import numpy as np

from src.core.radio import ChannelModel, NodeStatus, Observation, RoundAction

NodeProgram = Generator[RoundAction, Optional[Observation], Any]


class ProtocolError(RuntimeError):
    """Raised when a node program breaks the engine contract."""


class PhaseRecorder(ABC):
    """Sink for per-phase bookkeeping reported by node programs."""

    @abstractmethod
    def status_changed(self, round_number: int, node: int, status: NodeStatus) -> None:
        pass

    @abstractmethod
    def phase_event(self, phase: int, kind: str, node: int, value: Any = None) -> None:
        pass


class NodeContext:
    """A node's handle on its own randomness, clock and status.

    `node_id` is simulator bookkeeping only; nodes are anonymous and programs must not branch on it.
    """

    def __init__(self, node_id: int, rng: np.random.Generator, clock: Callable[[], int], recorder: PhaseRecorder):
        self.node_id = node_id
        self.rng = rng
        self._clock = clock
        self._recorder = recorder
        self.status = NodeStatus.UNDECIDED
        self.terminated = False
        self.capped = False

    @property
    def now(self) -> int:
        """Round in which the node's next action takes place."""
        return self._clock()

    def set_status(self, status: NodeStatus) -> None:
        if status is self.status:
            return
        self.status = status
        self._recorder.status_changed(self.now, self.node_id, status)

    def decide(self, status: NodeStatus, terminate: bool = True) -> None:
        """Record a final decision; a terminating node must not act again."""
        if not status.is_decided:
            raise ProtocolError(f"{status.value} is not a decision")
        self.set_status(status)
        if terminate:
            self.terminated = True

    def note_rank(self, phase: int, bits: str) -> None:
        self._recorder.phase_event(phase, 'rank', self.node_id, bits)

    def note_winner(self, phase: int) -> None:
        self._recorder.phase_event(phase, 'winner', self.node_id)

    def note_commit(self, phase: int, bitty_phase: int) -> None:
        self._recorder.phase_event(phase, 'commit', self.node_id, bitty_phase)

    def note_low_degree(self, phase: int, resolved: bool = True) -> None:
        self._recorder.phase_event(phase, 'low_degree' if resolved else 'low_degree_unresolved', self.node_id)


class Protocol(ABC):
    """Per-node state machine family runnable by the radio engine."""

    name: str = 'protocol'
    channel: ChannelModel = ChannelModel.CD

    @property
    @abstractmethod
    def phase_length(self) -> int:
        """Rounds per Luby phase; the engine checks for global decision at these boundaries."""
        pass

    @abstractmethod
    def round_budget(self) -> int:
        """Hard round limit of one run."""
        pass

    @abstractmethod
    def program(self, node: NodeContext) -> NodeProgram:
        """Program executed by one node from round 0."""
        pass

    @abstractmethod
    def config_snapshot(self) -> Dict[str, Any]:
        """Effective constants, embedded in every trace."""
        pass

    def allows_early_stop(self) -> bool:
        """Whether the run may end at the first phase boundary where every node is decided."""
        return True

    def capped_status(self, status: NodeStatus) -> NodeStatus:
        """Decision forced on a node that exhausted its energy cap: join unless already decided."""
        return status if status.is_decided else NodeStatus.IN_MIS


def sleep_for(rounds: int) -> NodeProgram:
    """Sleep for `rounds` rounds; zero is a no-op."""
    if rounds < 0:
        raise ProtocolError(f"Cannot sleep a negative number of rounds ({rounds})")
    if rounds:
        yield RoundAction.sleep(rounds)


def sleep_until(node: NodeContext, round_number: int) -> NodeProgram:
    """Sleep until `round_number` is the node's next round."""
    yield from sleep_for(round_number - node.now)
