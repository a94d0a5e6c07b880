"""
Synchronous radio-network engine with sleeping-model energy accounting.

The global round clock is a simpy environment. Awake actions of round r are gathered at time r and
resolved at r + 0.5; the acting nodes resume at r + 1. A sleeping node schedules a single timeout,
so rounds in which everybody sleeps cost nothing to simulate.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set

import simpy

from src.core.protocol import NodeContext, PhaseRecorder, Protocol, ProtocolError
from src.core.radio import (ActionKind, ChannelModel, NodeStatus, Observation, RoundAction,
                            observe)
from src.core.rng import rng_for
from src.core.topology import Graph
from src.core.trace import PhaseRecord, Trace

# Offsets inside one time unit: actions at r, resolution at r + 0.5, boundary checks at r + 0.25.
RESOLVE_OFFSET = 0.5
MONITOR_OFFSET = 0.25


def resolve_listeners(graph: Graph, transmitters: Set[int], listeners: Iterable[int],
                      model: ChannelModel) -> Dict[int, Observation]:
    """Observations of the given listeners when exactly `transmitters` transmit."""
    listening = set(listeners)
    counts: Dict[int, int] = defaultdict(int)
    for sender in transmitters:
        for neighbor in graph.neighbors(sender):
            if neighbor in listening:
                counts[neighbor] += 1
    return {node: observe(model, counts.get(node, 0)) for node in listening}


def resolve_round(graph: Graph, actions: Sequence[RoundAction], model: ChannelModel) -> List[Observation]:
    """Per-node observations for one round; transmitting and sleeping nodes observe nothing."""
    if len(actions) != graph.node_count:
        raise ProtocolError(f"Expected {graph.node_count} actions, got {len(actions)}")
    transmitters = {node for node, action in enumerate(actions) if action.kind is ActionKind.TRANSMIT}
    listeners = [node for node, action in enumerate(actions) if action.kind is ActionKind.LISTEN]
    heard = resolve_listeners(graph, transmitters, listeners, model)
    return [heard.get(node, Observation.NOTHING) for node in range(graph.node_count)]


@dataclass
class _PendingRound:
    done: simpy.Event
    actions: Dict[int, RoundAction] = field(default_factory=dict)


class TraceRecorder(PhaseRecorder):
    """Collects everything a Trace needs while the engine runs."""

    def __init__(self, node_count: int, record_rounds: bool = True):
        self.record_rounds = record_rounds
        self.rounds = []
        self.transitions = []
        self.energy = [0] * node_count
        self._phases: Dict[int, Dict[str, list]] = defaultdict(lambda: defaultdict(list))

    def record_round(self, round_number: int, node: int, action: ActionKind, observation: Observation) -> None:
        self.energy[node] += 1
        if self.record_rounds:
            self.rounds.append((round_number, node, action, observation))

    def status_changed(self, round_number: int, node: int, status: NodeStatus) -> None:
        self.transitions.append((round_number, node, status))

    def phase_event(self, phase: int, kind: str, node: int, value: Any = None) -> None:
        entry = (node, value) if value is not None else node
        self._phases[phase][kind].append(entry)

    def phase_records(self, phase_length: int, round_count: int) -> List[PhaseRecord]:
        records = []
        for index in sorted(self._phases):
            start = index * phase_length
            if start >= round_count:
                continue
            events = self._phases[index]
            records.append(PhaseRecord(
                index=index,
                start_round=start,
                ranks=tuple(sorted(events.get('rank', []))),
                winners=tuple(sorted(events.get('winner', []))),
                committed=tuple(sorted(events.get('commit', []))),
                low_degree=tuple(sorted(events.get('low_degree', []))),
                low_degree_unresolved=tuple(sorted(events.get('low_degree_unresolved', []))),
            ))
        return records


class RadioEngine:
    """Runs one protocol on one graph for one seed."""

    def __init__(self, graph: Graph, protocol: Protocol, seed: int, energy_cap: Optional[int] = None,
                 record_rounds: bool = True, graph_ref: str = ''):
        if energy_cap is not None and energy_cap < 0:
            raise ValueError(f"Energy cap must be non-negative, got {energy_cap}")
        self.graph = graph
        self.protocol = protocol
        self.seed = seed
        self.energy_cap = energy_cap
        self.record_rounds = record_rounds
        self.graph_ref = graph_ref

    def run(self) -> Trace:
        self.env = simpy.Environment()
        self.recorder = TraceRecorder(self.graph.node_count, self.record_rounds)
        self._pending: Dict[int, _PendingRound] = {}
        self.contexts = [
            NodeContext(node, rng_for(self.seed, node), self._clock, self.recorder)
            for node in range(self.graph.node_count)
        ]
        self._finished = [False] * self.graph.node_count

        for context in self.contexts:
            self.env.process(self._drive(context))
        stop = self.env.event()
        self.env.process(self._monitor(stop))
        round_count = self.env.run(until=stop)

        undecided = sum(1 for context in self.contexts if not context.status.is_decided)
        if undecided:
            logging.warning(f"{self.protocol.name}: {undecided} node(s) undecided after {round_count} rounds")
        logging.debug(f"{self.protocol.name}: finished after {round_count} rounds, seed {self.seed}")
        return self._build_trace(round_count)

    def _clock(self) -> int:
        return int(self.env.now)

    def _drive(self, node: NodeContext):
        program = self.protocol.program(node)
        observation = None
        started = False
        while True:
            try:
                action = program.send(observation) if started else next(program)
            except StopIteration:
                node.terminated = True
                self._finished[node.node_id] = True
                return
            started = True

            if node.terminated:
                raise ProtocolError(f"Node {node.node_id} emitted {action!r} after terminating in round {self._clock()}")
            if not isinstance(action, RoundAction):
                raise ProtocolError(f"Node {node.node_id} emitted {action!r}, expected a RoundAction")

            if action.kind is ActionKind.SLEEP:
                observation = None
                yield self.env.timeout(action.rounds)
                continue

            if self.energy_cap is not None and self.recorder.energy[node.node_id] >= self.energy_cap:
                self._cap(node)
                program.close()
                return

            observations = yield self._register(node.node_id, action)
            observation = observations.get(node.node_id, Observation.NOTHING)
            yield self.env.timeout(RESOLVE_OFFSET)

    def _cap(self, node: NodeContext) -> None:
        node.capped = True
        node.set_status(self.protocol.capped_status(node.status))
        node.terminated = True
        self._finished[node.node_id] = True
        logging.debug(f"Node {node.node_id} reached the energy cap {self.energy_cap} in round {self._clock()}")

    def _register(self, node_id: int, action: RoundAction) -> simpy.Event:
        now = self._clock()
        pending = self._pending.get(now)
        if pending is None:
            pending = _PendingRound(self.env.event())
            self._pending[now] = pending
            self.env.process(self._resolve(now))
        pending.actions[node_id] = action
        return pending.done

    def _resolve(self, round_number: int):
        yield self.env.timeout(RESOLVE_OFFSET)
        pending = self._pending.pop(round_number)
        transmitters = {node for node, action in pending.actions.items() if action.kind is ActionKind.TRANSMIT}
        listeners = [node for node, action in pending.actions.items() if action.kind is ActionKind.LISTEN]
        observations = resolve_listeners(self.graph, transmitters, listeners, self.protocol.channel)
        for node_id in sorted(pending.actions):
            self.recorder.record_round(round_number, node_id, pending.actions[node_id].kind,
                                       observations.get(node_id, Observation.NOTHING))
        pending.done.succeed(observations)

    def _monitor(self, stop: simpy.Event):
        budget = self.protocol.round_budget()
        step = max(1, self.protocol.phase_length)
        boundary = min(step, budget)
        while True:
            yield self.env.timeout(boundary + MONITOR_OFFSET - self.env.now)
            if boundary >= budget or all(self._finished):
                break
            if self.protocol.allows_early_stop() and all(c.status.is_decided for c in self.contexts):
                break
            boundary = min(boundary + step, budget)
        stop.succeed(boundary)

    def _build_trace(self, round_count: int) -> Trace:
        config = dict(self.protocol.config_snapshot())
        config['energy_cap'] = self.energy_cap
        config['rounds_recorded'] = self.record_rounds
        return Trace(
            seed=self.seed,
            model=self.protocol.channel,
            protocol=self.protocol.name,
            config=config,
            graph=self.graph,
            graph_ref=self.graph_ref,
            round_count=round_count,
            phase_length=self.protocol.phase_length,
            rounds=tuple(self.recorder.rounds),
            transitions=tuple(self.recorder.transitions),
            phases=tuple(self.recorder.phase_records(self.protocol.phase_length, round_count)),
            final=tuple(context.status for context in self.contexts),
            terminated=tuple(context.terminated for context in self.contexts),
            capped=tuple(context.capped for context in self.contexts),
            energy=tuple(self.recorder.energy),
        )


def run_protocol(graph: Graph, protocol: Protocol, seed: int, energy_cap: Optional[int] = None,
                 record_rounds: bool = True, graph_ref: str = '') -> Trace:
    """Simulate `protocol` on `graph` until every node decided or the round budget is exhausted."""
    return RadioEngine(graph, protocol, seed, energy_cap, record_rounds, graph_ref).run()
