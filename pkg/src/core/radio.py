"""
Radio channel vocabulary shared by the engine, the protocols and the verifiers.
"""
import math
from dataclasses import dataclass
from enum import Enum


class ChannelModel(str, Enum):
    """Listener-side semantics of a shared radio channel."""
    CD = 'cd'
    NO_CD = 'nocd'
    BEEP = 'beep'


class ActionKind(str, Enum):
    TRANSMIT = 'T'
    LISTEN = 'L'
    SLEEP = 'S'


@dataclass(frozen=True)
class RoundAction:
    """What a node does in a round. Sleep may span several rounds at once."""
    kind: ActionKind
    rounds: int = 1

    @property
    def is_awake(self) -> bool:
        return self.kind is not ActionKind.SLEEP

    @staticmethod
    def sleep(rounds: int = 1) -> 'RoundAction':
        if rounds < 1:
            raise ValueError(f"Sleep must span at least one round, got {rounds}")
        return RoundAction(ActionKind.SLEEP, rounds)


# Messages carry only the unary symbol "1", so a transmit action has no payload.
TRANSMIT = RoundAction(ActionKind.TRANSMIT)
LISTEN = RoundAction(ActionKind.LISTEN)
SLEEP = RoundAction(ActionKind.SLEEP)


class Observation(str, Enum):
    """What a node perceives at the end of a round."""
    SILENCE = 'silence'
    MESSAGE = 'message'
    COLLISION = 'collision'
    BEEP_HEARD = 'beep'
    NOTHING = 'nothing'

    @property
    def is_signal(self) -> bool:
        """True when at least one neighbor transmitted and the channel let the listener notice."""
        return self in (Observation.MESSAGE, Observation.COLLISION, Observation.BEEP_HEARD)


class NodeStatus(str, Enum):
    UNDECIDED = 'undecided'
    WIN = 'win'
    LOSE = 'lose'
    COMMIT = 'commit'
    IN_MIS = 'in-MIS'
    OUT_MIS = 'out-MIS'

    @property
    def is_decided(self) -> bool:
        return self in (NodeStatus.IN_MIS, NodeStatus.OUT_MIS)


def allowed_observations(model: ChannelModel) -> frozenset:
    """Observations a listener can legally make under the given channel model."""
    if model is ChannelModel.CD:
        return frozenset({Observation.SILENCE, Observation.MESSAGE, Observation.COLLISION})
    if model is ChannelModel.NO_CD:
        return frozenset({Observation.SILENCE, Observation.MESSAGE})
    return frozenset({Observation.SILENCE, Observation.BEEP_HEARD})


def observe(model: ChannelModel, transmitting_neighbors: int) -> Observation:
    """Observation of a listener with the given number of transmitting neighbors."""
    if model is ChannelModel.BEEP:
        return Observation.BEEP_HEARD if transmitting_neighbors >= 1 else Observation.SILENCE
    if transmitting_neighbors == 1:
        return Observation.MESSAGE
    if transmitting_neighbors >= 2 and model is ChannelModel.CD:
        return Observation.COLLISION
    return Observation.SILENCE


def ceil_log2(value: int) -> int:
    """Exact ceil(log2(value)) for a positive integer."""
    if value < 1:
        raise ValueError(f"ceil_log2 needs a positive integer, got {value}")
    return (value - 1).bit_length()


def window_length(delta: int) -> int:
    """Backoff window max(1, ceil(log2 delta)); degree bound 1 still gets one round."""
    return max(1, ceil_log2(delta))


def scaled_log2(multiplier: float, n: int) -> int:
    """ceil(multiplier * log2 n), never below 1 so single-node networks still get a round."""
    if n < 1:
        raise ValueError(f"Network size bound must be positive, got {n}")
    return max(1, math.ceil(multiplier * math.log2(n)))
