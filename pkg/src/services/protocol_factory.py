"""
Turns a RunSpec and a graph into a runnable protocol instance.
"""
import logging

from src.core.protocol import Protocol
from src.core.radio import ChannelModel
from src.core.run_spec import RunSpec, RunSpecError
from src.core.topology import Graph, max_degree
from src.protocols.cd_mis import CdConfig, CdMisProtocol
from src.protocols.nocd_mis import NaiveBaselineProtocol, NoCdConfig, NoCdMisProtocol

CD_DEFAULT_C = 8
# Smallest degree bound whose backoff window has two rounds; one-round windows always collide
# when both neighbors of a degree-2 node send.
NOCD_MIN_DELTA = 3
NOCD_MODELS = ('nocd', 'nocd-naive')


def network_bounds(spec: RunSpec, graph: Graph) -> tuple:
    """Size and degree bounds known to the nodes; overrides may only loosen the true values.

    Without --delta the no-CD models get at least NOCD_MIN_DELTA, a loose but valid upper bound.
    """
    n = spec.n if spec.n is not None else graph.node_count
    actual_degree = max_degree(graph)
    if spec.delta is not None:
        delta = spec.delta
    elif spec.model in NOCD_MODELS and actual_degree < NOCD_MIN_DELTA:
        delta = NOCD_MIN_DELTA
        logging.info(f"Loosening the degree bound from {actual_degree} to {delta} so backoff windows span two rounds")
    else:
        delta = max(1, actual_degree)
    if n < graph.node_count:
        raise RunSpecError(f"n={n} is smaller than the graph's {graph.node_count} nodes")
    if delta < actual_degree:
        raise RunSpecError(f"delta={delta} is smaller than the graph's maximum degree {actual_degree}")
    return n, delta


def nocd_config(spec: RunSpec, n: int, delta: int) -> NoCdConfig:
    common = dict(beta=spec.beta, kappa=spec.kappa, low_degree_strategy=spec.low_degree,
                  low_degree_C=spec.low_degree_C)
    if spec.strict:
        if spec.C is not None or spec.C_prime is not None:
            logging.warning("Strict mode uses the fixed phase and repetition constants; --C and --C-prime are ignored")
        return NoCdConfig.strict(n, delta, **common)
    overrides = {}
    if spec.C is not None:
        overrides['C'] = spec.C
    if spec.C_prime is not None:
        overrides['C_prime'] = spec.C_prime
    return NoCdConfig(n=n, delta=delta, **common, **overrides)


def build_protocol(spec: RunSpec, graph: Graph) -> Protocol:
    n, delta = network_bounds(spec, graph)
    try:
        if spec.model in ('cd', 'beep'):
            channel = ChannelModel.CD if spec.model == 'cd' else ChannelModel.BEEP
            protocol = CdMisProtocol(CdConfig(n=n, C=spec.C or CD_DEFAULT_C, beta=spec.beta, channel=channel))
        elif spec.model == 'nocd':
            protocol = NoCdMisProtocol(nocd_config(spec, n, delta))
        else:
            protocol = NaiveBaselineProtocol(nocd_config(spec, n, delta))
    except ValueError as e:
        raise RunSpecError(f"Invalid protocol constants: {e}") from e
    logging.debug(f"Built {protocol.name} with n={n}, delta={delta}, phase length {protocol.phase_length}")
    return protocol
