"""
Monte-Carlo checks of the probabilistic guarantees. Slow; deselect with -m "not slow".
"""
import math

import pytest

from src.core.protocol import Protocol
from src.core.radio import ChannelModel, NodeStatus
from src.core.radio_engine import run_protocol
from src.core.run_spec import RunSpec
from src.core.topology import Graph, generate_gnp, generate_star
from src.protocols.backoff import BackoffParams, rec_ebackoff, snd_ebackoff
from src.protocols.cd_mis import CdConfig, CdMisProtocol
from src.services.protocol_factory import build_protocol
from src.services.verification_service import (decay_summary, failure_rate_nonincreasing, lower_bound_experiment,
                                               lower_bound_floor, model_ratios, phase_stats, scaling_fit)

pytestmark = [pytest.mark.integration, pytest.mark.slow]


class CenterListensProtocol(Protocol):
    """Star center receives, leaves send once; the center joins iff it heard a leaf."""

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


def rate_with_error(successes: int, trials: int):
    rate = successes / trials
    return rate, (rate * (1 - rate) / trials) ** 0.5


class TestBackoffGuarantee:
    """k backoff iterations reach a listener with probability at least 1 - (7/8)^k."""

    TRIALS = 400

    @pytest.mark.parametrize('k', [1, 3, 10])
    @pytest.mark.parametrize('delta,senders', [(8, 1), (8, 2), (8, 3), (8, 8), (64, 1), (64, 2), (64, 6), (64, 64)])
    def test_success_rate_over_k_iterations(self, k, delta, senders):
        """Test the success rate stays above 1 - (7/8)^k minus three standard errors of that bound."""
        params = BackoffParams(k=k, delta=delta)
        heard = sum(
            run_protocol(generate_star(senders + 1), CenterListensProtocol(params), seed,
                         record_rounds=False).final[0] is NodeStatus.IN_MIS
            for seed in range(self.TRIALS)
        )
        bound = 1 - (7 / 8) ** k
        slack = 3 * math.sqrt(bound * (1 - bound) / self.TRIALS)
        assert heard / self.TRIALS >= bound - slack


class TestResidualDecay:
    """Expected per-phase shrinkage of the residual graph."""

    def test_cd_residual_halves(self):
        """Test the CD residual edge count shrinks by at least half per phase on average."""
        stats = []
        for seed in range(20):
            graph = generate_gnp(64, 0.1, seed=seed)
            trace = run_protocol(graph, CdMisProtocol(CdConfig(n=64)), seed, record_rounds=False)
            stats.append(phase_stats(trace, 'cd'))
        summary = decay_summary(stats)
        assert summary.samples > 0
        assert summary.within(0.5)

    def test_nocd_residual_shrinks(self):
        """Test the no-CD residual shrinks by at least a 63/64 factor per phase on average."""
        stats = []
        for seed in range(5):
            graph = generate_gnp(32, 0.15, seed=seed)
            protocol = build_protocol(RunSpec(model='nocd', seed=seed), graph)
            trace = run_protocol(graph, protocol, seed, record_rounds=False)
            stats.append(phase_stats(trace, 'nocd'))
        summary = decay_summary(stats)
        assert summary.samples > 0
        assert summary.within(63 / 64)


class TestEnergyCapLowerBound:
    """Failure rates under an energy cap on the matching instance."""

    def test_failure_rate_respects_floor_and_falls_with_cap(self):
        """Test every cap fails at least as often as the floor and more energy never hurts."""
        protocol = CdMisProtocol(CdConfig(n=64))
        results = [lower_bound_experiment(64, cap, 30, protocol) for cap in (0, 1, 2, 10_000)]
        for result in results:
            assert result.failure_rate >= result.floor - 3 * result.standard_error
        assert failure_rate_nonincreasing(results)
        assert results[-1].failure_rate == 0.0
        assert lower_bound_floor(64, 10_000) == pytest.approx(0.0, abs=1e-12)


def mean_max_energy(model: str, sizes, trials: int):
    """Per-size mean of the largest node energy on sparse random graphs with average degree about 8."""
    points = []
    for n in sizes:
        energies = []
        for seed in range(trials):
            graph = generate_gnp(n, 8 / n, seed=seed)
            trace = run_protocol(graph, build_protocol(RunSpec(model=model, seed=seed), graph), seed,
                                 record_rounds=False)
            energies.append(max(trace.energy))
        points.append((n, sum(energies) / trials))
    return points


def ratios_stay_within(ratios, factor: float) -> bool:
    values = [ratios[n] for n in sorted(ratios)]
    return all(1 / factor <= later / earlier <= factor for earlier, later in zip(values, values[1:]))


class TestEnergyScaling:
    """Growth of the worst-case node energy with the network size."""

    def test_cd_energy_grows_like_log_n(self):
        """Test CD energy fits a log2 n model with R^2 >= 0.9 and stable per-size ratios."""
        points = mean_max_energy('cd', (16, 32, 64, 128, 256), trials=8)
        assert scaling_fit(points, 'log').r_squared >= 0.9
        assert ratios_stay_within(model_ratios(points, 'log'), 1.5)

    def test_nocd_energy_tracks_log2_loglog(self):
        """Test no-CD energy divided by log2^2 n log2 log2 n stays within a factor 1.5 between sizes."""
        points = mean_max_energy('nocd', (32, 64, 128), trials=6)
        assert ratios_stay_within(model_ratios(points, 'log2loglog'), 1.5)


class TestBaselineComparison:
    """The naive no-CD simulation against the energy-aware one."""

    def test_baseline_spends_more_on_a_single_edge(self):
        """Test on one edge with n = 256 the baseline's worst node outspends the no-CD MIS in most runs."""
        edge = Graph(2, frozenset({(0, 1)}))
        trials = 100
        baseline_heavier = 0
        for seed in range(trials):
            energy = {}
            for model in ('nocd', 'nocd-naive'):
                protocol = build_protocol(RunSpec(model=model, n=256, seed=seed), edge)
                energy[model] = max(run_protocol(edge, protocol, seed, record_rounds=False).energy)
            baseline_heavier += energy['nocd-naive'] > energy['nocd']
        assert baseline_heavier > trials / 2
