"""
Energy-efficient k-repeated backoff procedures.

Both procedures occupy exactly k * window rounds whatever happens, so callers running them side by side
stay in lockstep. Senders transmit once per iteration in a geometrically chosen round; receivers listen
in the first `listen_window` rounds of each iteration until they hear a message, then sleep out the
whole remaining span.
"""
from dataclasses import dataclass
from typing import Optional

from src.core.protocol import NodeContext, NodeProgram, sleep_for
from src.core.radio import LISTEN, TRANSMIT, Observation, window_length
from src.core.rng import geometric_half


@dataclass(frozen=True)
class BackoffParams:
    k: int
    delta: int
    delta_est: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"Backoff needs at least one iteration, got k={self.k}")
        if self.delta < 1:
            raise ValueError(f"Degree bound must be positive, got {self.delta}")
        if self.delta_est is None:
            object.__setattr__(self, 'delta_est', self.delta)
        if not 1 <= self.delta_est <= self.delta:
            raise ValueError(f"Degree estimate {self.delta_est} must lie in [1, {self.delta}]")

    @property
    def window(self) -> int:
        return window_length(self.delta)

    @property
    def listen_window(self) -> int:
        return window_length(self.delta_est)

    @property
    def span(self) -> int:
        """T_B(k): rounds occupied by either procedure."""
        return self.k * self.window


def backoff_span(k: int, delta: int) -> int:
    return k * window_length(delta)


def snd_ebackoff(node: NodeContext, params: BackoffParams) -> NodeProgram:
    """Sender side: exactly one transmission per iteration, k awake rounds in total."""
    window = params.window
    for _ in range(params.k):
        slot = min(geometric_half(node.rng), window)
        yield from sleep_for(slot - 1)
        yield TRANSMIT
        yield from sleep_for(window - slot)


def rec_ebackoff(node: NodeContext, params: BackoffParams) -> NodeProgram:
    """Receiver side: returns True iff a lone sender neighbor was heard."""
    window, listen_window = params.window, params.listen_window
    for iteration in range(params.k):
        for slot in range(1, listen_window + 1):
            observation = yield LISTEN
            if observation is Observation.MESSAGE:
                remaining = (window - slot) + (params.k - iteration - 1) * window
                yield from sleep_for(remaining)
                return True
        yield from sleep_for(window - listen_window)
    return False
