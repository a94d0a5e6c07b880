"""
Oracles and statistics over simulation traces.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from src.core.protocol import Protocol
from src.core.radio import NodeStatus
from src.core.radio_engine import run_protocol
from src.core.topology import Edge, Graph, generate_matching_lower_bound
from src.core.trace import Trace

RESIDUAL_DEFINITIONS = ('cd', 'nocd')

SCALING_MODELS: Dict[str, Callable[[float], float]] = {
    'log': lambda n: math.log2(n),
    'log2': lambda n: math.log2(n) ** 2,
    'log2loglog': lambda n: math.log2(n) ** 2 * math.log2(math.log2(n)),
}

MIN_FIT_POINTS = 4


@dataclass
class MisReport:
    """Outcome of checking a final status vector against the MIS definition."""
    independence_violations: List[Edge] = field(default_factory=list)
    coverage_violations: List[int] = field(default_factory=list)
    undecided_nodes: List[int] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (self.independence_violations or self.coverage_violations or self.undecided_nodes)

    def to_dict(self) -> Dict[str, object]:
        return {
            'valid': self.valid,
            'independence_violations': [list(edge) for edge in self.independence_violations],
            'coverage_violations': list(self.coverage_violations),
            'undecided_nodes': list(self.undecided_nodes),
        }

    def summary(self) -> str:
        if self.valid:
            return "valid MIS"
        return (f"invalid MIS: {len(self.independence_violations)} adjacent in-MIS pair(s), "
                f"{len(self.coverage_violations)} uncovered node(s), {len(self.undecided_nodes)} undecided node(s)")


def check_mis(graph: Graph, statuses: Sequence[NodeStatus]) -> MisReport:
    if len(statuses) != graph.node_count:
        raise ValueError(f"Status vector has {len(statuses)} entries for a graph of {graph.node_count} nodes")

    report = MisReport()
    in_mis = {node for node, status in enumerate(statuses) if status is NodeStatus.IN_MIS}
    for u, v in graph.sorted_edges():
        if u in in_mis and v in in_mis:
            report.independence_violations.append((u, v))
    for node, status in enumerate(statuses):
        if node not in in_mis and not any(neighbor in in_mis for neighbor in graph.neighbors(node)):
            report.coverage_violations.append(node)
        if not status.is_decided:
            report.undecided_nodes.append(node)
    return report


def in_residual(status: NodeStatus, definition: str) -> bool:
    """CD residual keeps undecided nodes only; the no-CD residual keeps every node not out of the MIS."""
    if definition == 'cd':
        return not status.is_decided
    return status is not NodeStatus.OUT_MIS


@dataclass
class PhaseStats:
    """Residual-graph sizes at every phase boundary; index 0 is the initial graph."""
    definition: str
    residual_edges: List[int] = field(default_factory=list)
    residual_nodes: List[int] = field(default_factory=list)
    winners: List[int] = field(default_factory=list)
    committed: List[int] = field(default_factory=list)
    dominated_edges: List[int] = field(default_factory=list)

    @property
    def ratios(self) -> List[float]:
        """|E_i| / |E_(i-1)|, skipping phases that started from an empty residual."""
        return [current / previous
                for previous, current in zip(self.residual_edges, self.residual_edges[1:]) if previous > 0]

    def to_dict(self) -> Dict[str, object]:
        return {
            'definition': self.definition,
            'residual_edges': self.residual_edges,
            'residual_nodes': self.residual_nodes,
            'winners': self.winners,
            'committed': self.committed,
            'dominated_edges': self.dominated_edges,
            'ratios': self.ratios,
        }


def phase_stats(trace: Trace, definition: str) -> PhaseStats:
    if definition not in RESIDUAL_DEFINITIONS:
        raise ValueError(f"Unknown residual definition {definition!r}; use one of {', '.join(RESIDUAL_DEFINITIONS)}")

    graph = trace.graph
    stats = PhaseStats(definition)
    stats.residual_nodes.append(graph.node_count)
    stats.residual_edges.append(len(graph.edges))
    records = {record.index: record for record in trace.phases}

    for index in range(trace.phases_used):
        statuses = trace.statuses_at(min(trace.phase_boundary(index), trace.round_count))
        residual = {node for node, status in enumerate(statuses) if in_residual(status, definition)}
        edges = graph.induced_edges(residual)
        stats.residual_nodes.append(len(residual))
        stats.residual_edges.append(len(edges))

        record = records.get(index)
        stats.winners.append(len(record.winners) if record else 0)
        stats.committed.append(len(record.committed) if record else 0)

        dominated = {
            node for node in residual
            if statuses[node] is not NodeStatus.IN_MIS
            and any(statuses[neighbor] is NodeStatus.IN_MIS for neighbor in graph.neighbors(node))
        }
        stats.dominated_edges.append(sum(1 for u, v in edges if u in dominated or v in dominated))
    return stats


@dataclass(frozen=True)
class DecaySummary:
    mean_ratio: float
    standard_error: float
    samples: int

    def within(self, bound: float, standard_errors: float = 3.0) -> bool:
        return self.mean_ratio <= bound + standard_errors * self.standard_error


def decay_summary(stats: Iterable[PhaseStats]) -> DecaySummary:
    """Pooled per-phase decay ratio with its normal-approximation standard error."""
    ratios = np.array([ratio for item in stats for ratio in item.ratios], dtype=float)
    if ratios.size == 0:
        return DecaySummary(0.0, 0.0, 0)
    error = float(ratios.std(ddof=1) / math.sqrt(ratios.size)) if ratios.size > 1 else 0.0
    return DecaySummary(float(ratios.mean()), error, int(ratios.size))


@dataclass
class EnergyStats:
    max: int = 0
    mean: float = 0.0
    distribution: Dict[int, int] = field(default_factory=dict)
    capped: int = 0
    runs: int = 0

    def to_dict(self) -> Dict[str, object]:
        return {
            'max': self.max,
            'mean': self.mean,
            'distribution': {str(energy): count for energy, count in sorted(self.distribution.items())},
            'capped': self.capped,
            'runs': self.runs,
        }


def energy_stats(traces: Iterable[Trace]) -> EnergyStats:
    """Worst-case and average awake rounds per node, pooled over the given runs."""
    distribution = Counter()
    stats = EnergyStats()
    for trace in traces:
        distribution.update(trace.energy)
        stats.capped += sum(trace.capped)
        stats.runs += 1
    if distribution:
        total_nodes = sum(distribution.values())
        stats.max = max(distribution)
        stats.mean = sum(energy * count for energy, count in distribution.items()) / total_nodes
        stats.distribution = dict(distribution)
    return stats


@dataclass(frozen=True)
class ScalingFit:
    model: str
    coefficient: float
    intercept: float
    r_squared: float
    points: int

    def to_dict(self) -> Dict[str, object]:
        return {
            'model': self.model,
            'coefficient': self.coefficient,
            'intercept': self.intercept,
            'r_squared': self.r_squared,
            'points': self.points,
        }


def scaling_fit(points: Sequence[Tuple[int, float]], model: str) -> ScalingFit:
    """Least-squares fit of value = a * f(n) + b for the named growth model f."""
    if model not in SCALING_MODELS:
        raise ValueError(f"Unknown scaling model {model!r}; use one of {', '.join(SCALING_MODELS)}")
    distinct = {n for n, _ in points}
    if len(distinct) < MIN_FIT_POINTS:
        raise ValueError(f"Scaling fit needs at least {MIN_FIT_POINTS} distinct n values, got {len(distinct)}")

    regressor = SCALING_MODELS[model]
    x = np.array([regressor(n) for n, _ in points], dtype=float)
    y = np.array([value for _, value in points], dtype=float)
    design = np.column_stack([x, np.ones_like(x)])
    (coefficient, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)

    residual = y - (coefficient * x + intercept)
    ss_res = float(residual @ residual)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return ScalingFit(model, float(coefficient), float(intercept), r_squared, len(points))


def model_ratios(points: Sequence[Tuple[int, float]], model: str) -> Dict[int, float]:
    """Mean observed / f(n) per n; a stable ratio across n means the shape fits."""
    regressor = SCALING_MODELS[model]
    grouped: Dict[int, List[float]] = {}
    for n, value in points:
        grouped.setdefault(n, []).append(value)
    return {n: float(np.mean(values)) / regressor(n) for n, values in sorted(grouped.items()) if regressor(n) > 0}


def lower_bound_floor(n: int, cap: int) -> float:
    """Failure probability every cap-limited algorithm suffers on the matching instance."""
    return 1.0 - math.exp(-n / 4 ** (cap + 1))


@dataclass(frozen=True)
class LowerBoundResult:
    n: int
    cap: int
    trials: int
    failures: int
    floor: float

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def standard_error(self) -> float:
        if not self.trials:
            return 0.0
        rate = self.failure_rate
        return math.sqrt(rate * (1.0 - rate) / self.trials)

    def to_dict(self) -> Dict[str, object]:
        return {
            'n': self.n,
            'cap': self.cap,
            'trials': self.trials,
            'failures': self.failures,
            'failure_rate': self.failure_rate,
            'standard_error': self.standard_error,
            'floor': self.floor,
        }


def lower_bound_experiment(n: int, cap: int, trials: int, protocol: Protocol,
                           first_seed: int = 0) -> LowerBoundResult:
    """Run `protocol` on n/4 disjoint edges under a per-node energy cap and count invalid outputs."""
    graph = generate_matching_lower_bound(n)
    failures = 0
    for seed in range(first_seed, first_seed + trials):
        trace = run_protocol(graph, protocol, seed, energy_cap=cap, record_rounds=False, graph_ref=f"matching:{n}")
        if not check_mis(graph, trace.final).valid:
            failures += 1
    result = LowerBoundResult(n, cap, trials, failures, lower_bound_floor(n, cap))
    logging.info(f"Lower bound n={n} cap={cap}: failure rate {result.failure_rate:.3f} (floor {result.floor:.3f})")
    return result


def failure_rate_nonincreasing(results: Sequence[LowerBoundResult], standard_errors: float = 3.0) -> bool:
    """True when no later cap fails noticeably more often than an earlier one."""
    ordered = sorted(results, key=lambda result: result.cap)
    for earlier, later in zip(ordered, ordered[1:]):
        slack = standard_errors * math.hypot(earlier.standard_error, later.standard_error)
        if later.failure_rate > earlier.failure_rate + slack:
            return False
    return True
