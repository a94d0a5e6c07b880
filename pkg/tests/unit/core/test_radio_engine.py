import pytest

from src.core.protocol import NodeContext, Protocol, ProtocolError
from src.core.radio import (LISTEN, TRANSMIT, ActionKind, ChannelModel, NodeStatus, Observation, RoundAction)
from src.core.radio_engine import resolve_round, run_protocol
from src.core.topology import Graph, generate_star


class ScriptedProtocol(Protocol):
    """Test protocol: every node plays a fixed list of actions, then optionally decides."""

    name = 'scripted'

    def __init__(self, scripts, channel=ChannelModel.CD, budget=10, decide=None, early_stop=True, phase=None):
        self.scripts = scripts
        self.channel = channel
        self.budget = budget
        self.phase = phase or budget
        self.decide = decide or {}
        self.early_stop = early_stop
        self.observed = {}

    @property
    def phase_length(self):
        return self.phase

    def round_budget(self):
        return self.budget

    def allows_early_stop(self):
        return self.early_stop

    def config_snapshot(self):
        return {'budget': self.budget}

    def program(self, node: NodeContext):
        seen = self.observed.setdefault(node.node_id, [])
        for action in self.scripts.get(node.node_id, []):
            observation = yield action
            seen.append((node.now - 1, observation))
        if node.node_id in self.decide:
            node.decide(self.decide[node.node_id])


class AfterTerminationProtocol(ScriptedProtocol):
    def program(self, node: NodeContext):
        node.decide(NodeStatus.OUT_MIS)
        yield LISTEN


class TestResolveRound:
    """Test cases for single-round resolution."""

    def setup_method(self):
        """Star with center 0 and leaves 1..3."""
        self.graph = generate_star(4)

    def test_two_senders_per_model(self):
        """Test a listening center with two transmitting leaves under every model."""
        actions = [LISTEN, TRANSMIT, TRANSMIT, RoundAction.sleep()]
        assert resolve_round(self.graph, actions, ChannelModel.CD)[0] is Observation.COLLISION
        assert resolve_round(self.graph, actions, ChannelModel.NO_CD)[0] is Observation.SILENCE
        assert resolve_round(self.graph, actions, ChannelModel.BEEP)[0] is Observation.BEEP_HEARD

    def test_single_sender_is_heard(self):
        """Test one transmitting neighbor delivers a message."""
        actions = [LISTEN, TRANSMIT, LISTEN, RoundAction.sleep()]
        observations = resolve_round(self.graph, actions, ChannelModel.NO_CD)
        assert observations[0] is Observation.MESSAGE
        # Leaves are not adjacent to each other.
        assert observations[2] is Observation.SILENCE

    def test_transmitters_and_sleepers_observe_nothing(self):
        """Test only listeners observe the channel."""
        actions = [TRANSMIT, TRANSMIT, RoundAction.sleep(), LISTEN]
        observations = resolve_round(self.graph, actions, ChannelModel.CD)
        assert observations[0] is Observation.NOTHING
        assert observations[1] is Observation.NOTHING
        assert observations[2] is Observation.NOTHING
        assert observations[3] is Observation.MESSAGE

    def test_action_vector_length_must_match(self):
        """Test the action vector needs one entry per node."""
        with pytest.raises(ProtocolError, match="Expected 4 actions"):
            resolve_round(self.graph, [LISTEN], ChannelModel.CD)


class TestRadioEngine:
    """Test cases for the engine loop, energy ledger and trace."""

    def setup_method(self):
        self.edge = Graph.from_pairs(2, [(0, 1)])

    def test_observations_are_delivered_in_order(self):
        """Test each node receives the observation of the round it acted in."""
        protocol = ScriptedProtocol({
            0: [TRANSMIT, RoundAction.sleep(2), LISTEN],
            1: [LISTEN, LISTEN, LISTEN, TRANSMIT],
        }, channel=ChannelModel.NO_CD)
        trace = run_protocol(self.edge, protocol, seed=0)

        assert protocol.observed[1][:3] == [
            (0, Observation.MESSAGE), (1, Observation.SILENCE), (2, Observation.SILENCE)]
        assert protocol.observed[0][-1] == (3, Observation.MESSAGE)
        assert trace.energy == (2, 4)
        assert (0, 0, ActionKind.TRANSMIT, Observation.NOTHING) in trace.rounds
        assert (3, 0, ActionKind.LISTEN, Observation.MESSAGE) in trace.rounds

    def test_sleeping_costs_no_energy(self):
        """Test a node that only sleeps ends with zero energy."""
        protocol = ScriptedProtocol({0: [RoundAction.sleep(5)], 1: [RoundAction.sleep(1)]})
        trace = run_protocol(self.edge, protocol, seed=0)
        assert trace.energy == (0, 0)
        assert trace.rounds == ()

    def test_stops_at_budget_when_nodes_never_decide(self):
        """Test the run lasts the whole round budget when nobody decides."""
        protocol = ScriptedProtocol({0: [LISTEN], 1: [LISTEN]}, budget=10)
        trace = run_protocol(self.edge, protocol, seed=0)
        assert trace.round_count == 10
        assert trace.final == (NodeStatus.UNDECIDED, NodeStatus.UNDECIDED)
        assert trace.terminated == (True, True)

    def test_early_stop_at_first_decided_boundary(self):
        """Test the run ends at the first phase boundary where every node has decided."""
        protocol = ScriptedProtocol({0: [TRANSMIT], 1: [LISTEN]}, budget=12, phase=4,
                                    decide={0: NodeStatus.IN_MIS, 1: NodeStatus.OUT_MIS})
        trace = run_protocol(self.edge, protocol, seed=0)
        assert trace.round_count == 4
        assert trace.phases_used == 1
        assert trace.final == (NodeStatus.IN_MIS, NodeStatus.OUT_MIS)
        assert sorted(trace.transitions) == [(1, 0, NodeStatus.IN_MIS), (1, 1, NodeStatus.OUT_MIS)]

    def test_energy_cap_forces_join(self):
        """Test a node reaching its cap joins the MIS and stops acting."""
        protocol = ScriptedProtocol({0: [LISTEN, LISTEN, LISTEN], 1: []})
        trace = run_protocol(self.edge, protocol, seed=0, energy_cap=1)
        assert trace.energy[0] == 1
        assert trace.capped == (True, False)
        assert trace.final[0] is NodeStatus.IN_MIS
        assert trace.config['energy_cap'] == 1

    def test_zero_cap_caps_before_first_action(self):
        """Test a zero cap stops a node before it is ever awake."""
        protocol = ScriptedProtocol({0: [TRANSMIT], 1: [LISTEN]})
        trace = run_protocol(self.edge, protocol, seed=0, energy_cap=0)
        assert trace.energy == (0, 0)
        assert trace.final == (NodeStatus.IN_MIS, NodeStatus.IN_MIS)

    def test_negative_cap_rejected(self):
        """Test a negative energy cap is invalid."""
        with pytest.raises(ValueError, match="non-negative"):
            run_protocol(self.edge, ScriptedProtocol({}), seed=0, energy_cap=-1)

    def test_action_after_termination_is_an_error(self):
        """Test a terminated node may not act again."""
        with pytest.raises(ProtocolError, match="after terminating"):
            run_protocol(self.edge, AfterTerminationProtocol({}), seed=0)

    def test_unrecorded_rounds_still_count_energy(self):
        """Test the energy ledger is kept even when awake rounds are not stored."""
        protocol = ScriptedProtocol({0: [LISTEN, LISTEN], 1: [TRANSMIT]})
        trace = run_protocol(self.edge, protocol, seed=0, record_rounds=False)
        assert trace.rounds == ()
        assert trace.energy == (2, 1)
        assert trace.config['rounds_recorded'] is False
