"""
Energy-efficient MIS for radio networks without collision detection.

A Luby phase has four blocks at fixed offsets, and every node sleeps to the next block when it has
nothing to do there, so all nodes stay in lockstep:

  1. competition      bit-by-bit rank comparison over K-repeated backoffs (undecided nodes only)
  2. first check      in-MIS nodes announce; winners run a deep check and join unless they hear one
  3. second check     in-MIS nodes announce; committed nodes run a deep check, then the low-degree MIS
  4. shallow check    in-MIS nodes announce once; everybody else listens once

The naive baseline at the end of the module simulates every CD round of the CD algorithm with a
traditional (always awake) backoff and exists only as an energy yardstick.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict

from src.core.low_degree_strategy import LowDegreeStrategy
from src.core.protocol import NodeContext, NodeProgram, Protocol, sleep_for, sleep_until
from src.core.radio import (LISTEN, TRANSMIT, ChannelModel, NodeStatus, Observation, scaled_log2,
                            window_length)
from src.core.rng import bits_to_string, fair_bits
from src.protocols.backoff import BackoffParams, backoff_span, rec_ebackoff, snd_ebackoff
from src.protocols.cd_mis import CdRoundPrimitives, luby_phase
from src.strategies.naive_simulation_strategy import NaiveSimulationStrategy

# ceil(4 / log2(64/63)): enough Luby phases for the 63/64 residual decay to empty the graph.
STRICT_PHASE_MULTIPLIER = 177
# 5 * ceil(1 / log2(8/7)): deep checks fail with probability at most n^-5.
STRICT_REPETITION_MULTIPLIER = 30


@dataclass(frozen=True)
class NoCdConfig:
    n: int
    delta: int
    beta: int = 4
    kappa: int = 5
    C: int = STRICT_PHASE_MULTIPLIER
    C_prime: int = 5
    low_degree_strategy: str = 'naive-sim'
    low_degree_C: int = 8
    early_stop: bool = True

    def __post_init__(self):
        if self.n < 1 or self.delta < 1:
            raise ValueError(f"n and delta must be positive, got n={self.n}, delta={self.delta}")
        if self.beta < 4:
            raise ValueError(f"beta must be at least 4, got {self.beta}")
        if self.kappa < 5:
            raise ValueError(f"kappa must be at least 5, got {self.kappa}")
        if self.C < 1 or self.C_prime < 1 or self.low_degree_C < 1:
            raise ValueError("C, C_prime and low_degree_C must be at least 1")

    @classmethod
    def strict(cls, n: int, delta: int, **overrides) -> 'NoCdConfig':
        """Phase count that bounds the no-CD decay, high-probability deep checks and the full schedule."""
        values = dict(C=STRICT_PHASE_MULTIPLIER, C_prime=STRICT_REPETITION_MULTIPLIER, early_stop=False)
        values.update(overrides)
        return cls(n=n, delta=delta, **values)

    @property
    def rank_length(self) -> int:
        return scaled_log2(self.beta, self.n)

    @property
    def repetitions(self) -> int:
        """K: iterations of every deep-check and competition backoff."""
        return scaled_log2(self.C_prime, self.n)

    @property
    def phases(self) -> int:
        return scaled_log2(self.C, self.n)

    @property
    def delta_small(self) -> int:
        """Degree estimate after committing, min(delta, ceil(kappa log2 n))."""
        return min(self.delta, scaled_log2(self.kappa, self.n))


def create_low_degree_strategy(config: NoCdConfig) -> LowDegreeStrategy:
    if config.low_degree_strategy == NaiveSimulationStrategy.name:
        return NaiveSimulationStrategy(config.n, config.delta_small, config.repetitions,
                                       C=config.low_degree_C, beta=config.beta)
    raise ValueError(f"Unknown low-degree strategy {config.low_degree_strategy!r}")


@dataclass(frozen=True)
class Schedule:
    """Round budgets of one Luby phase; every block starts at the same offset for every node."""
    delta: int
    repetitions: int
    rank_length: int
    low_degree_rounds: int

    @classmethod
    def from_config(cls, config: NoCdConfig, strategy: LowDegreeStrategy) -> 'Schedule':
        return cls(config.delta, config.repetitions, config.rank_length, strategy.round_budget())

    def backoff(self, k: int) -> int:
        """T_B(k)."""
        return backoff_span(k, self.delta)

    @property
    def competition(self) -> int:
        """T_C: one K-repeated backoff per Bitty phase."""
        return self.rank_length * self.backoff(self.repetitions)

    @property
    def first_check_offset(self) -> int:
        return self.competition

    @property
    def second_check_offset(self) -> int:
        return self.competition + self.backoff(self.repetitions)

    @property
    def shallow_check_offset(self) -> int:
        return self.competition + 2 * self.backoff(self.repetitions) + self.low_degree_rounds

    @property
    def luby_phase(self) -> int:
        """T_L."""
        return self.shallow_check_offset + self.backoff(1)

    def block_offsets(self) -> Dict[str, int]:
        return {
            'competition': 0,
            'first_check': self.first_check_offset,
            'second_check': self.second_check_offset,
            'shallow_check': self.shallow_check_offset,
        }


class NoCdMisProtocol(Protocol):
    """O(log^2 n log log n) energy MIS for the no-CD channel."""

    name = 'nocd-mis'
    channel = ChannelModel.NO_CD

    def __init__(self, config: NoCdConfig, strategy: LowDegreeStrategy = None):
        self.config = config
        self.strategy = strategy or create_low_degree_strategy(config)
        self.schedule = Schedule.from_config(config, self.strategy)
        self.deep = BackoffParams(config.repetitions, config.delta)
        self.shallow = BackoffParams(1, config.delta)

    @property
    def phase_length(self) -> int:
        return self.schedule.luby_phase

    def round_budget(self) -> int:
        return self.config.phases * self.schedule.luby_phase

    def allows_early_stop(self) -> bool:
        return self.config.early_stop

    def config_snapshot(self) -> Dict[str, Any]:
        snapshot = asdict(self.config)
        snapshot.update(
            rank_length=self.config.rank_length,
            repetitions=self.config.repetitions,
            phases=self.config.phases,
            delta_small=self.config.delta_small,
            low_degree=self.strategy.describe(),
            schedule={
                'T_B_K': self.schedule.backoff(self.config.repetitions),
                'T_B_1': self.schedule.backoff(1),
                'T_C': self.schedule.competition,
                'T_G': self.schedule.low_degree_rounds,
                'T_L': self.schedule.luby_phase,
                'offsets': self.schedule.block_offsets(),
            },
        )
        return snapshot

    def program(self, node: NodeContext) -> NodeProgram:
        schedule = self.schedule
        for phase in range(self.config.phases):
            start = phase * schedule.luby_phase

            if node.status is NodeStatus.UNDECIDED:
                yield from self.competition(node, phase)
            else:
                yield from sleep_until(node, start + schedule.first_check_offset)

            if node.status is NodeStatus.IN_MIS:
                yield from snd_ebackoff(node, self.deep)
            elif node.status is NodeStatus.WIN:
                heard = yield from rec_ebackoff(node, self.deep)
                if heard:
                    node.decide(NodeStatus.OUT_MIS)
                    return
                node.decide(NodeStatus.IN_MIS, terminate=False)
            else:
                yield from sleep_until(node, start + schedule.second_check_offset)

            if node.status is NodeStatus.IN_MIS:
                yield from snd_ebackoff(node, self.deep)
            elif node.status is NodeStatus.COMMIT:
                heard = yield from rec_ebackoff(node, self.deep)
                if heard:
                    node.decide(NodeStatus.OUT_MIS)
                    return
                node.set_status(NodeStatus.UNDECIDED)
                outcome = yield from self.strategy.participate(node, phase)
                node.note_low_degree(phase, resolved=outcome is not None)
                if outcome is NodeStatus.OUT_MIS:
                    node.decide(NodeStatus.OUT_MIS)
                    return
                if outcome is NodeStatus.IN_MIS:
                    node.decide(NodeStatus.IN_MIS, terminate=False)
            yield from sleep_until(node, start + schedule.shallow_check_offset)

            if node.status is NodeStatus.IN_MIS:
                yield from snd_ebackoff(node, self.shallow)
            else:
                heard = yield from rec_ebackoff(node, self.shallow)
                if heard:
                    node.decide(NodeStatus.OUT_MIS)
                    return
                node.set_status(NodeStatus.UNDECIDED)

    def competition(self, node: NodeContext, phase: int) -> NodeProgram:
        """Rank competition spanning exactly T_C rounds; leaves status win, lose or commit."""
        config = self.config
        bitty_span = self.schedule.backoff(config.repetitions)
        delta_est = config.delta
        heard = False
        bits = fair_bits(node.rng, config.rank_length)
        node.note_rank(phase, bits_to_string(bits))

        for bitty, bit in enumerate(bits):
            if node.status is NodeStatus.LOSE:
                yield from sleep_for((config.rank_length - bitty) * bitty_span)
                break
            if bit:
                yield from snd_ebackoff(node, self.deep)
                continue
            # Always listen: a committed node that already heard still owes its backoff.
            heard_now = yield from rec_ebackoff(node, BackoffParams(config.repetitions, config.delta, delta_est))
            heard = heard or heard_now
            if heard and node.status is not NodeStatus.COMMIT:
                node.set_status(NodeStatus.LOSE)
            elif not heard:
                # Not hearing implies O(log n) undecided neighbors.
                delta_est = config.delta_small
                if node.status is not NodeStatus.COMMIT:
                    node.set_status(NodeStatus.COMMIT)
                    node.note_commit(phase, bitty)

        if not heard:
            node.set_status(NodeStatus.WIN)
            node.note_winner(phase)


class DecayRounds(CdRoundPrimitives):
    """One CD round played as a k-repeated traditional backoff; participants never sleep inside it."""

    def __init__(self, repetitions: int, delta: int):
        self.repetitions = repetitions
        self.window = window_length(delta)
        self.span = repetitions * self.window

    def transmit(self, node: NodeContext) -> NodeProgram:
        for _ in range(self.repetitions):
            sending = True
            for _ in range(self.window):
                if sending:
                    yield TRANSMIT
                    sending = bool(node.rng.integers(0, 2))
                else:
                    yield LISTEN

    def listen(self, node: NodeContext) -> NodeProgram:
        heard = False
        for _ in range(self.span):
            observation = yield LISTEN
            heard = heard or observation is Observation.MESSAGE
        return heard


class NaiveBaselineProtocol(Protocol):
    """CD algorithm with every round simulated by traditional backoff; Theta(log^3 n)-style energy."""

    name = 'nocd-naive'
    channel = ChannelModel.NO_CD

    def __init__(self, config: NoCdConfig):
        self.config = config
        self.rounds = DecayRounds(config.repetitions, config.delta)

    @property
    def phase_length(self) -> int:
        return (self.config.rank_length + 1) * self.rounds.span

    def round_budget(self) -> int:
        return self.config.phases * self.phase_length

    def allows_early_stop(self) -> bool:
        return self.config.early_stop

    def config_snapshot(self) -> Dict[str, Any]:
        snapshot = asdict(self.config)
        snapshot.update(
            rank_length=self.config.rank_length,
            repetitions=self.config.repetitions,
            phases=self.config.phases,
            simulated_round_span=self.rounds.span,
        )
        return snapshot

    def program(self, node: NodeContext) -> NodeProgram:
        for phase in range(self.config.phases):
            outcome = yield from luby_phase(node, self.rounds, self.config.rank_length, phase)
            if outcome is not None:
                node.decide(outcome)
                return
        logging.debug(f"Baseline node {node.node_id} still undecided after {self.config.phases} phases")
