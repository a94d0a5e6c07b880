"""
Single runs and parameter sweeps over the radio engine.
"""
import concurrent.futures
import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterator, List, Optional

from src.core.radio_engine import run_protocol
from src.core.run_spec import RunSpec, SweepSpec
from src.core.topology import Graph
from src.core.trace import Trace
from src.providers.graph_provider import GraphProvider, create_graph_provider
from src.services.protocol_factory import build_protocol, network_bounds
from src.services.verification_service import MisReport, check_mis


@dataclass
class RunOutcome:
    spec: RunSpec
    graph: Graph
    trace: Trace
    report: MisReport

    @property
    def undecided(self) -> bool:
        return bool(self.report.undecided_nodes)

    def summary_line(self) -> str:
        return (f"{self.trace.protocol} on {self.trace.graph_ref or 'graph'} seed={self.trace.seed}: "
                f"{self.report.summary()}; max energy {max(self.trace.energy, default=0)}, "
                f"{self.trace.round_count} rounds, {self.trace.phases_used} phases")


@dataclass(frozen=True)
class SweepRow:
    """One finished run of a sweep; the first seven fields are the CSV columns."""
    n: int
    model: str
    seed: int
    valid: bool
    max_energy: int
    rounds: int
    phases_used: int
    cap: Optional[int] = None
    mean_energy: float = 0.0
    capped: int = 0

    def csv_record(self) -> Dict[str, object]:
        return {
            'n': self.n,
            'model': self.model,
            'seed': self.seed,
            'valid': self.valid,
            'max_energy': self.max_energy,
            'rounds': self.rounds,
            'phases_used': self.phases_used,
        }


class SimulationService:
    """Builds graphs and protocols from run specs and drives the engine."""

    def __init__(self, provider_factory: Callable[..., GraphProvider] = create_graph_provider):
        self.provider_factory = provider_factory

    def load_graph(self, spec: RunSpec) -> Graph:
        spec.require_graph_source()
        return self.provider_factory(graph_file=spec.graph_file, generator=spec.generator, seed=spec.seed).load()

    def run(self, spec: RunSpec, graph: Optional[Graph] = None) -> RunOutcome:
        graph = graph if graph is not None else self.load_graph(spec)
        protocol = build_protocol(spec, graph)
        n, _ = network_bounds(spec, graph)
        cap = spec.energy_cap(n)
        logging.info(f"Running {protocol.name} on {graph.node_count} nodes (seed {spec.seed}, cap {cap})")
        trace = run_protocol(graph, protocol, spec.seed, energy_cap=cap, record_rounds=spec.record_rounds,
                             graph_ref=spec.graph_ref())
        report = check_mis(graph, trace.final)
        return RunOutcome(spec, graph, trace, report)


def simulate_row(spec: RunSpec, n: int, cap: Optional[int] = None) -> SweepRow:
    """Worker entry point; module-level so process pools can pickle it."""
    outcome = SimulationService().run(spec)
    trace = outcome.trace
    energy = trace.energy
    return SweepRow(
        n=n,
        model=spec.model,
        seed=spec.seed,
        valid=outcome.report.valid,
        max_energy=max(energy, default=0),
        rounds=trace.round_count,
        phases_used=trace.phases_used,
        cap=cap,
        mean_energy=sum(energy) / len(energy) if energy else 0.0,
        capped=sum(trace.capped),
    )


class SweepService:
    """Expands a SweepSpec into runs and executes them, optionally across processes."""

    def __init__(self, sweep: SweepSpec):
        self.sweep = sweep
        self.errors = 0

    def scaling_tasks(self) -> Iterator[tuple]:
        base = replace(self.sweep.run, graph_file=None, record_rounds=False)
        for n in self.sweep.n_list:
            for trial in range(self.sweep.trials):
                spec = replace(base, generator=self.sweep.generator_for(n), seed=base.seed + trial, n=None)
                yield spec, n, None

    def cap_tasks(self) -> Iterator[tuple]:
        base = replace(self.sweep.run, graph_file=None, record_rounds=False)
        for n in self.sweep.n_list:
            if n % 4:
                logging.warning(f"Skipping cap sweep at n={n}: the matching instance needs a multiple of 4")
                continue
            for cap in self.sweep.cap_list:
                for trial in range(self.sweep.trials):
                    spec = replace(base, generator=f"matching:{n}", seed=base.seed + trial, n=None, cap=str(cap))
                    yield spec, n, cap

    def run(self, on_row: Callable[[SweepRow], None] = None) -> List[SweepRow]:
        """Runs every task; rows reach `on_row` in completion order from the calling process only."""
        tasks = list(self.scaling_tasks()) + list(self.cap_tasks())
        logging.info(f"Sweep of {len(tasks)} runs with {self.sweep.workers} worker(s)")
        rows: List[SweepRow] = []
        self.errors = 0

        def collect(row: SweepRow) -> None:
            rows.append(row)
            if on_row:
                on_row(row)

        if self.sweep.workers == 1:
            for task in tasks:
                try:
                    collect(simulate_row(*task))
                except Exception as e:
                    self.errors += 1
                    logging.error(f"Sweep run n={task[1]} seed={task[0].seed} failed: {e}")
            return rows

        with concurrent.futures.ProcessPoolExecutor(max_workers=self.sweep.workers) as executor:
            futures = [executor.submit(simulate_row, *task) for task in tasks]
            for future in concurrent.futures.as_completed(futures):
                try:
                    collect(future.result())
                except Exception as e:
                    self.errors += 1
                    logging.error(f"Sweep run failed: {e}")
        return rows
