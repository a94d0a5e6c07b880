"""
Energy-optimal MIS for radio networks with collision detection (and for the beeping model).

Each Luby phase draws a random rank and compares it with the neighbors' ranks bit by bit, one Bitty
phase per bit. A node that hears a neighbor while holding a 0 bit is knocked out and sleeps until the
phase's final round, where it listens for a winner. Survivors transmit in that round and join the MIS.

The phase logic is written against abstract round primitives so the same code runs natively (one
round per CD round) or simulated over backoffs in the no-CD model.
"""
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from src.core.protocol import NodeContext, NodeProgram, Protocol, sleep_for
from src.core.radio import (LISTEN, TRANSMIT, ActionKind, ChannelModel, NodeStatus, scaled_log2)
from src.core.rng import bits_to_string, fair_bits
from src.core.trace import Trace


@dataclass(frozen=True)
class CdConfig:
    n: int
    C: int = 8
    beta: int = 4
    channel: ChannelModel = ChannelModel.CD

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"Network size bound must be positive, got {self.n}")
        if self.C < 1 or self.beta < 1:
            raise ValueError(f"C and beta must be at least 1, got C={self.C}, beta={self.beta}")
        if self.channel not in (ChannelModel.CD, ChannelModel.BEEP):
            raise ValueError(f"CD MIS needs a CD or beep channel, got {self.channel.value}")

    @property
    def rank_length(self) -> int:
        return scaled_log2(self.beta, self.n)

    @property
    def phases(self) -> int:
        return scaled_log2(self.C, self.n)

    @property
    def phase_length(self) -> int:
        return self.rank_length + 1

    @property
    def round_budget(self) -> int:
        return self.phases * self.phase_length


class CdRoundPrimitives(ABC):
    """How one CD round is carried out: natively or as a simulated span of rounds."""

    span: int = 1

    @abstractmethod
    def transmit(self, node: NodeContext) -> NodeProgram:
        pass

    @abstractmethod
    def listen(self, node: NodeContext) -> NodeProgram:
        """Returns True when a neighbor's transmission was noticed."""
        pass


class NativeRounds(CdRoundPrimitives):
    span = 1

    def transmit(self, node: NodeContext) -> NodeProgram:
        yield TRANSMIT

    def listen(self, node: NodeContext) -> NodeProgram:
        observation = yield LISTEN
        return observation.is_signal


def luby_phase(node: NodeContext, rounds: CdRoundPrimitives, rank_length: int,
               phase: Optional[int] = None) -> NodeProgram:
    """One Luby phase spanning (rank_length + 1) * rounds.span rounds.

    Returns IN_MIS for a winner, OUT_MIS for a loser that heard a winner in the final round, and
    None for a node that stays undecided. Ranks and winners are reported when `phase` is given.
    """
    bits = fair_bits(node.rng, rank_length)
    if phase is not None:
        node.note_rank(phase, bits_to_string(bits))

    for bitty, bit in enumerate(bits):
        if bit:
            yield from rounds.transmit(node)
            continue
        heard = yield from rounds.listen(node)
        if heard:
            yield from sleep_for((rank_length - bitty - 1) * rounds.span)
            heard_winner = yield from rounds.listen(node)
            return NodeStatus.OUT_MIS if heard_winner else None

    if phase is not None:
        node.note_winner(phase)
    yield from rounds.transmit(node)
    return NodeStatus.IN_MIS


class CdMisProtocol(Protocol):
    """Algorithm for the CD and beeping channels; O(log n) energy, O(log^2 n) rounds."""

    name = 'cd-mis'

    def __init__(self, config: CdConfig):
        self.config = config
        self.channel = config.channel
        self.rounds = NativeRounds()
        if config.channel is ChannelModel.BEEP:
            self.name = 'beep-mis'

    @property
    def phase_length(self) -> int:
        return self.config.phase_length

    def round_budget(self) -> int:
        return self.config.round_budget

    def config_snapshot(self) -> Dict[str, Any]:
        snapshot = asdict(self.config)
        snapshot['channel'] = self.config.channel.value
        snapshot['rank_length'] = self.config.rank_length
        snapshot['phases'] = self.config.phases
        return snapshot

    def program(self, node: NodeContext) -> NodeProgram:
        for phase in range(self.config.phases):
            outcome = yield from luby_phase(node, self.rounds, self.config.rank_length, phase)
            if outcome is not None:
                node.decide(outcome)
                return


def check_phase_budget(trace: Trace) -> bool:
    """True iff the trace respects the round budget and the knocked-out sleep schedule."""
    rank_length = int(trace.config['rank_length'])
    phase_length = rank_length + 1
    budget = int(trace.config['phases']) * phase_length
    if trace.round_count > budget:
        return False

    per_phase = defaultdict(list)
    for round_number, node, action, observation in trace.rounds:
        per_phase[(node, round_number // phase_length)].append((round_number % phase_length, action, observation))

    for (node, _), events in per_phase.items():
        if not _phase_follows_schedule(events, rank_length, trace.capped[node]):
            return False
    return True


def _phase_follows_schedule(events, rank_length: int, capped: bool) -> bool:
    offsets = [offset for offset, _, _ in events]
    if len(set(offsets)) != len(offsets):
        return False
    knocked_out_at = None
    for offset, action, observation in events:
        if offset < rank_length and action is ActionKind.LISTEN and observation.is_signal:
            knocked_out_at = offset
            break
    if knocked_out_at is None:
        return True
    # Asleep from the next Bitty phase through the last one, then a listen in the final round.
    for offset, action, _ in events:
        if knocked_out_at < offset < rank_length:
            return False
        if offset == rank_length and action is not ActionKind.LISTEN:
            return False
    if not capped and rank_length not in offsets:
        return False
    return True
