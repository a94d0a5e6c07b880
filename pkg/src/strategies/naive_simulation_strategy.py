"""
Low-degree MIS by naive simulation of the CD algorithm over energy-efficient backoffs.
"""
from typing import Any, Dict

from src.core.low_degree_strategy import LowDegreeStrategy
from src.core.protocol import NodeContext, NodeProgram, sleep_until
from src.core.radio import scaled_log2
from src.protocols.backoff import BackoffParams, rec_ebackoff, snd_ebackoff
from src.protocols.cd_mis import CdRoundPrimitives, luby_phase


class BackoffRounds(CdRoundPrimitives):
    """One CD round played as a k-repeated energy-efficient backoff pair."""

    def __init__(self, repetitions: int, delta: int):
        self.params = BackoffParams(repetitions, delta, delta)
        self.span = self.params.span

    def transmit(self, node: NodeContext) -> NodeProgram:
        yield from snd_ebackoff(node, self.params)

    def listen(self, node: NodeContext) -> NodeProgram:
        heard = yield from rec_ebackoff(node, self.params)
        return heard


class NaiveSimulationStrategy(LowDegreeStrategy):
    """Runs the CD MIS on the committed subgraph; windows and estimates use the small degree bound."""

    name = 'naive-sim'

    def __init__(self, n: int, delta_small: int, repetitions: int, C: int = 8, beta: int = 4):
        self.n = n
        self.delta_small = max(1, delta_small)
        self.rounds = BackoffRounds(repetitions, self.delta_small)
        self.rank_length = scaled_log2(beta, n)
        self.phases = scaled_log2(C, n)
        self.C = C
        self.beta = beta

    def round_budget(self) -> int:
        return self.phases * (self.rank_length + 1) * self.rounds.span

    def participate(self, node: NodeContext, phase: int) -> NodeProgram:
        end = node.now + self.round_budget()
        outcome = None
        for _ in range(self.phases):
            outcome = yield from luby_phase(node, self.rounds, self.rank_length)
            if outcome is not None:
                break
        yield from sleep_until(node, end)
        return outcome

    def describe(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'delta_small': self.delta_small,
            'repetitions': self.rounds.params.k,
            'C': self.C,
            'beta': self.beta,
            'round_budget': self.round_budget(),
        }
