import pytest

from src.core.protocol import NodeContext, Protocol
from src.core.radio import ActionKind, ChannelModel, NodeStatus, Observation
from src.core.radio_engine import TraceRecorder, run_protocol
from src.core.rng import rng_for
from src.core.topology import generate_star
from src.protocols.backoff import BackoffParams, backoff_span, rec_ebackoff, snd_ebackoff


def drive(program, respond):
    """Play a node program by hand; returns (actions, return value)."""
    actions = []
    try:
        action = next(program)
        while True:
            actions.append(action)
            action = program.send(respond(action, len(actions)) if action.is_awake else None)
    except StopIteration as stop:
        return actions, stop.value


def context(seed=0):
    return NodeContext(0, rng_for(seed, 0), lambda: 0, TraceRecorder(1))


def rounds_spanned(actions):
    return sum(action.rounds for action in actions)


def awake(actions):
    return [action for action in actions if action.is_awake]


class StarBackoffProtocol(Protocol):
    """Center runs the receiver, every leaf runs the sender; the center joins iff it heard."""

    name = 'backoff-trial'
    channel = ChannelModel.NO_CD

    def __init__(self, params: BackoffParams):
        self.params = params

    @property
    def phase_length(self):
        return self.params.span

    def round_budget(self):
        return self.params.span

    def config_snapshot(self):
        return {'k': self.params.k, 'delta': self.params.delta}

    def program(self, node):
        if node.node_id == 0:
            heard = yield from rec_ebackoff(node, self.params)
            node.decide(NodeStatus.IN_MIS if heard else NodeStatus.OUT_MIS)
        else:
            yield from snd_ebackoff(node, self.params)
            node.decide(NodeStatus.OUT_MIS)


class TestBackoffParams:
    """Test cases for backoff parameters."""

    def test_span_and_windows(self):
        """Test T_B(k) = k * max(1, ceil(log2 delta)) and the shrunk listen window."""
        params = BackoffParams(k=3, delta=64, delta_est=8)
        assert params.window == 6
        assert params.listen_window == 3
        assert params.span == 18
        assert backoff_span(3, 64) == 18

    def test_estimate_defaults_to_delta(self):
        """Test the degree estimate defaults to the degree bound."""
        assert BackoffParams(k=1, delta=16).delta_est == 16

    def test_invalid_parameters(self):
        """Test k, delta and the estimate are validated."""
        with pytest.raises(ValueError):
            BackoffParams(k=0, delta=4)
        with pytest.raises(ValueError):
            BackoffParams(k=1, delta=0)
        with pytest.raises(ValueError):
            BackoffParams(k=1, delta=4, delta_est=8)


class TestSender:
    """Test cases for the sender side."""

    @pytest.mark.parametrize('k,delta', [(1, 8), (3, 64), (10, 1)])
    def test_awake_exactly_k_rounds_over_the_full_span(self, k, delta):
        """Test the sender transmits once per iteration and spans exactly T_B(k) rounds."""
        params = BackoffParams(k, delta)
        for seed in range(20):
            actions, _ = drive(snd_ebackoff(context(seed), params), lambda action, index: Observation.NOTHING)
            assert rounds_spanned(actions) == params.span
            assert [action.kind for action in awake(actions)] == [ActionKind.TRANSMIT] * k

    def test_last_slot_absorbs_the_geometric_tail(self):
        """Test with a three-round window the last slot is used with probability 1/4."""
        params = BackoffParams(k=100_000, delta=8)
        actions, _ = drive(snd_ebackoff(context(9), params), lambda action, index: Observation.NOTHING)
        slots = []
        position = 0
        for action in actions:
            if action.kind is ActionKind.TRANSMIT:
                slots.append(position % params.window + 1)
            position += action.rounds
        assert len(slots) == params.k
        assert abs(slots.count(1) / params.k - 0.5) <= 0.01
        assert abs(slots.count(3) / params.k - 0.25) <= 0.01


class TestReceiver:
    """Test cases for the receiver side."""

    def test_silence_keeps_listening_in_every_iteration(self):
        """Test a receiver that hears nothing listens listen_window rounds per iteration."""
        params = BackoffParams(k=4, delta=64, delta_est=4)
        actions, heard = drive(rec_ebackoff(context(), params), lambda action, index: Observation.SILENCE)
        assert heard is False
        assert rounds_spanned(actions) == params.span
        assert len(awake(actions)) == 4 * 2

    def test_message_ends_listening(self):
        """Test hearing a message returns True after sleeping the rest of the span."""
        params = BackoffParams(k=4, delta=64)
        actions, heard = drive(rec_ebackoff(context(), params),
                               lambda action, index: Observation.MESSAGE if index == 3 else Observation.SILENCE)
        assert heard is True
        assert rounds_spanned(actions) == params.span
        assert len(awake(actions)) == 3

    def test_collision_silence_is_not_heard(self):
        """Test only a message counts as hearing."""
        params = BackoffParams(k=2, delta=8)
        _, heard = drive(rec_ebackoff(context(), params), lambda action, index: Observation.SILENCE)
        assert heard is False


class TestBackoffOnTheChannel:
    """Runs sender and receiver together on the no-CD channel."""

    def test_single_sender_is_always_heard(self):
        """Test one sender within the listen window is heard in the first iteration."""
        params = BackoffParams(k=3, delta=8)
        for seed in range(10):
            trace = run_protocol(generate_star(2), StarBackoffProtocol(params), seed)
            assert trace.final[0] is NodeStatus.IN_MIS
            assert trace.energy[1] == 3
            assert trace.round_count == params.span

    @pytest.mark.parametrize('senders', [2, 3, 8])
    def test_success_probability_bound(self, senders):
        """Test P(heard) >= 1 - (7/8)^k with Monte-Carlo slack for several sender counts."""
        params = BackoffParams(k=3, delta=8)
        trials = 300
        heard = 0
        for seed in range(trials):
            trace = run_protocol(generate_star(senders + 1), StarBackoffProtocol(params), seed, record_rounds=False)
            heard += trace.final[0] is NodeStatus.IN_MIS
            assert all(energy == params.k for energy in trace.energy[1:])
        assert heard / trials >= 1 - (7 / 8) ** params.k - 0.05
