"""
Immutable simulation traces and their JSON document form.

Sleep is the default action, so a trace stores only awake node-rounds. A (round, node) pair that does
not appear in `rounds` was spent asleep and observed nothing.
"""
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from packaging.version import InvalidVersion, Version

from src.core.radio import ActionKind, ChannelModel, NodeStatus, Observation
from src.core.topology import Graph, GraphError

SCHEMA_VERSION = '1.0'

RoundEvent = Tuple[int, int, ActionKind, Observation]
StatusTransition = Tuple[int, int, NodeStatus]

REQUIRED_KEYS = (
    'schema_version', 'seed', 'model', 'protocol', 'config', 'graph_ref', 'graph', 'round_count',
    'phase_length', 'rounds', 'transitions', 'phases', 'final', 'terminated', 'capped', 'energy',
)
PER_NODE_KEYS = ('final', 'terminated', 'capped', 'energy')


class TraceFormatError(ValueError):
    """Raised when a trace document is malformed or has an unsupported schema."""


@dataclass(frozen=True)
class PhaseRecord:
    """What happened inside one Luby phase."""
    index: int
    start_round: int
    ranks: Tuple[Tuple[int, str], ...] = ()
    winners: Tuple[int, ...] = ()
    committed: Tuple[Tuple[int, int], ...] = ()
    low_degree: Tuple[int, ...] = ()
    low_degree_unresolved: Tuple[int, ...] = ()

    @property
    def participants(self) -> Tuple[int, ...]:
        return tuple(node for node, _ in self.ranks)

    @property
    def committed_nodes(self) -> Tuple[int, ...]:
        return tuple(node for node, _ in self.committed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'index': self.index,
            'start_round': self.start_round,
            'ranks': [[node, bits] for node, bits in self.ranks],
            'winners': list(self.winners),
            'committed': [[node, bitty] for node, bitty in self.committed],
            'low_degree': list(self.low_degree),
            'low_degree_unresolved': list(self.low_degree_unresolved),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PhaseRecord':
        return cls(
            index=int(data['index']),
            start_round=int(data['start_round']),
            ranks=tuple((int(node), str(bits)) for node, bits in data.get('ranks', [])),
            winners=tuple(int(node) for node in data.get('winners', [])),
            committed=tuple((int(node), int(bitty)) for node, bitty in data.get('committed', [])),
            low_degree=tuple(int(node) for node in data.get('low_degree', [])),
            low_degree_unresolved=tuple(int(node) for node in data.get('low_degree_unresolved', [])),
        )


@dataclass(frozen=True)
class Trace:
    seed: int
    model: ChannelModel
    protocol: str
    config: Dict[str, Any]
    graph: Graph
    graph_ref: str
    round_count: int
    phase_length: int
    rounds: Tuple[RoundEvent, ...]
    transitions: Tuple[StatusTransition, ...]
    phases: Tuple[PhaseRecord, ...]
    final: Tuple[NodeStatus, ...]
    terminated: Tuple[bool, ...]
    capped: Tuple[bool, ...]
    energy: Tuple[int, ...]
    schema_version: str = field(default=SCHEMA_VERSION)

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    @property
    def phases_used(self) -> int:
        if self.phase_length <= 0:
            return 0
        return -(-self.round_count // self.phase_length)

    def phase_boundary(self, phase_index: int) -> int:
        """First round after phase `phase_index` (0-based)."""
        return (phase_index + 1) * self.phase_length

    def statuses_at(self, round_number: int) -> List[NodeStatus]:
        """Statuses in effect during `round_number`, replayed from the transition log.

        A transition logged at round r was made before the node's action in round r.
        """
        statuses = [NodeStatus.UNDECIDED] * self.node_count
        for when, node, status in self.transitions:
            if when > round_number:
                break
            statuses[node] = status
        return statuses

    def events_for(self, node: int) -> List[RoundEvent]:
        return [event for event in self.rounds if event[1] == node]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': self.schema_version,
            'seed': self.seed,
            'model': self.model.value,
            'protocol': self.protocol,
            'config': self.config,
            'graph_ref': self.graph_ref,
            'graph': {'node_count': self.graph.node_count, 'edges': [list(edge) for edge in self.graph.sorted_edges()]},
            'round_count': self.round_count,
            'phase_length': self.phase_length,
            'rounds': [[r, node, action.value, observation.value] for r, node, action, observation in self.rounds],
            'transitions': [[r, node, status.value] for r, node, status in self.transitions],
            'phases': [phase.to_dict() for phase in self.phases],
            'final': [status.value for status in self.final],
            'terminated': list(self.terminated),
            'capped': list(self.capped),
            'energy': list(self.energy),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':')) + '\n'

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Trace':
        missing = [key for key in REQUIRED_KEYS if key not in data]
        if missing:
            raise TraceFormatError(f"Trace is missing keys: {', '.join(missing)}")
        _check_schema_version(data['schema_version'])

        try:
            graph = Graph.from_pairs(int(data['graph']['node_count']), (tuple(edge) for edge in data['graph']['edges']))
            trace = cls(
                seed=int(data['seed']),
                model=ChannelModel(data['model']),
                protocol=str(data['protocol']),
                config=dict(data['config']),
                graph=graph,
                graph_ref=str(data['graph_ref']),
                round_count=int(data['round_count']),
                phase_length=int(data['phase_length']),
                rounds=tuple((int(r), int(node), ActionKind(action), Observation(observation))
                             for r, node, action, observation in data['rounds']),
                transitions=tuple((int(r), int(node), NodeStatus(status)) for r, node, status in data['transitions']),
                phases=tuple(PhaseRecord.from_dict(phase) for phase in data['phases']),
                final=tuple(NodeStatus(status) for status in data['final']),
                terminated=tuple(bool(flag) for flag in data['terminated']),
                capped=tuple(bool(flag) for flag in data['capped']),
                energy=tuple(int(value) for value in data['energy']),
                schema_version=str(data['schema_version']),
            )
        except (KeyError, TypeError, ValueError, GraphError) as e:
            raise TraceFormatError(f"Malformed trace document: {e}") from e
        _check_shape(trace)
        return trace

    @classmethod
    def from_json(cls, text: str) -> 'Trace':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise TraceFormatError(f"Trace is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise TraceFormatError("Trace document must be a JSON object")
        return cls.from_dict(data)


def _check_schema_version(raw: Optional[str]) -> None:
    try:
        found = Version(str(raw))
    except InvalidVersion as e:
        raise TraceFormatError(f"Invalid trace schema version {raw!r}") from e
    if found.major != Version(SCHEMA_VERSION).major:
        raise TraceFormatError(f"Unsupported trace schema version {found} (reader supports {SCHEMA_VERSION})")


def _check_shape(trace: 'Trace') -> None:
    """Per-node vectors must cover every node and every referenced node id must exist."""
    n = trace.node_count
    for name in PER_NODE_KEYS:
        length = len(getattr(trace, name))
        if length != n:
            raise TraceFormatError(f"'{name}' has {length} entries for a graph of {n} nodes")

    referenced = [('rounds', node) for _, node, _, _ in trace.rounds]
    referenced += [('transitions', node) for _, node, _ in trace.transitions]
    for phase in trace.phases:
        nodes = (phase.participants + phase.winners + phase.committed_nodes + phase.low_degree
                 + phase.low_degree_unresolved)
        referenced += [('phases', node) for node in nodes]
    for section, node in referenced:
        if not 0 <= node < n:
            raise TraceFormatError(f"'{section}' names node {node} outside [0, {n})")
