"""
Command handlers for the simulator's subcommands.

Exit codes: 2 for unusable input (bad flags, unreadable graph or trace), 1 when a simulation or audit
fails, 0 otherwise.
"""
import logging
import os
import sys
from dataclasses import replace
from typing import Any, Optional

from src.core.run_spec import (RunSpec, SweepSpec, default_output_dir, parse_int_list)
from src.core.topology import save_edge_list
from src.core.trace import Trace, TraceFormatError
from src.providers.graph_provider import GeneratorSpecProvider
from src.services.config_service import ConfigurationService
from src.services.report_generator import ReportGenerator
from src.services.simulation_service import SimulationService, SweepService
from src.services.trace_audit_service import TraceAuditService
from src.services.verification_service import check_mis, energy_stats

EXIT_FAILURE = 1
EXIT_USAGE = 2


def _config_value(args: Any, config_service: Optional[ConfigurationService], attribute: str, key: str, default=None):
    """CLI flag, then config file, then default."""
    value = getattr(args, attribute, None)
    if value is None and config_service:
        value = config_service.get(key)
    return default if value is None else value


class RunCommandHandler:
    """Handles the run command: one simulation, one trace file, one summary line."""

    def __init__(self, config_service: Optional[ConfigurationService] = None,
                 simulation_service: Optional[SimulationService] = None):
        self.config_service = config_service
        self.simulation_service = simulation_service or SimulationService()

    def execute(self, args: Any) -> None:
        try:
            spec = RunSpec.from_sources(args, self.config_service)
            spec.require_graph_source()
            outcome = self.simulation_service.run(spec)
        except (ValueError, OSError) as e:
            logging.error(f"Cannot run simulation: {e}")
            sys.exit(EXIT_USAGE)

        output = spec.output or os.path.join(default_output_dir(), f"trace_{spec.model}_seed{spec.seed}.json")
        try:
            ReportGenerator(os.path.dirname(output) or '.').write_trace(outcome.trace, output)
        except OSError as e:
            logging.error(f"Cannot write trace {output}: {e}")
            sys.exit(EXIT_USAGE)
        print(outcome.summary_line())

        if outcome.undecided:
            logging.error(f"Round budget exhausted with {len(outcome.report.undecided_nodes)} undecided node(s)")
            sys.exit(EXIT_FAILURE)
        if not outcome.report.valid:
            logging.error(f"Simulation produced an invalid MIS: {outcome.report.summary()}")
            sys.exit(EXIT_FAILURE)
        logging.info("Run completed successfully")


class SweepCommandHandler:
    """Handles the sweep command: a grid of runs written to CSV plus a JSON summary."""

    def __init__(self, config_service: Optional[ConfigurationService] = None):
        self.config_service = config_service

    def build_sweep(self, args: Any) -> SweepSpec:
        config = self.config_service
        family = _config_value(args, config, 'generator', 'sweep.family', 'gnp:{n}:0.1')
        run = RunSpec.from_sources(args, config, generator=None)
        run = replace(run, generator=None, graph_file=None)
        return SweepSpec(
            run=run,
            n_list=parse_int_list(_config_value(args, config, 'n_list', 'sweep.n_list')),
            trials=int(_config_value(args, config, 'trials', 'sweep.trials', 10)),
            cap_list=parse_int_list(_config_value(args, config, 'cap_list', 'sweep.cap_list')),
            family=family,
            workers=int(_config_value(args, config, 'workers', 'sweep.workers', 1)),
        )

    def execute(self, args: Any) -> None:
        try:
            sweep = self.build_sweep(args)
        except ValueError as e:
            logging.error(f"Invalid sweep: {e}")
            sys.exit(EXIT_USAGE)

        output_dir = _config_value(args, self.config_service, 'output', 'output', None) or default_output_dir()
        reports = ReportGenerator(output_dir)
        service = SweepService(sweep)
        try:
            rows = service.run(on_row=reports.add_row)
        finally:
            reports.close()

        summary = reports.build_summary(sweep, rows, service.errors)
        reports.write_summary(summary)
        print(reports.format_summary(summary))

        if service.errors:
            logging.error(f"{service.errors} sweep run(s) failed; partial results are in {output_dir}")
            sys.exit(EXIT_FAILURE)
        logging.info("Sweep completed successfully")


class VerifyCommandHandler:
    """Handles the verify command: MIS check plus a full replay audit of a trace file."""

    def execute(self, args: Any) -> None:
        try:
            with open(args.trace_file, 'r', encoding='utf-8') as f:
                trace = Trace.from_json(f.read())
        except (OSError, TraceFormatError) as e:
            logging.error(f"Cannot read trace {args.trace_file}: {e}")
            sys.exit(EXIT_USAGE)

        report = check_mis(trace.graph, trace.final)
        audit = TraceAuditService(trace, strict=bool(getattr(args, 'strict', False))).audit()
        stats = energy_stats([trace])

        print(f"{trace.protocol} ({trace.model.value}), {trace.node_count} nodes, seed {trace.seed}: {report.summary()}")
        print(f"Energy: max {stats.max}, mean {stats.mean:.2f}, capped nodes {stats.capped}")
        print(audit.generate_report())

        if not report.valid or not audit.success:
            logging.error("Trace verification failed")
            sys.exit(EXIT_FAILURE)
        logging.info("Trace verification passed")


class GenCommandHandler:
    """Handles the gen command: writes a generated topology as an edge list."""

    def execute(self, args: Any) -> None:
        seed = args.seed if args.seed is not None else 0
        try:
            graph = GeneratorSpecProvider(args.generator, seed).load()
        except ValueError as e:
            logging.error(f"Cannot generate graph: {e}")
            sys.exit(EXIT_USAGE)

        text = save_edge_list(graph)
        if not args.output:
            sys.stdout.write(text)
            return
        directory = os.path.dirname(os.path.abspath(args.output))
        os.makedirs(directory, exist_ok=True)
        with open(args.output, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        logging.info(f"Edge list written to {args.output}")
