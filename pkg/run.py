#!/usr/bin/env python3
"""
Energy-aware MIS simulator for synchronous radio networks

Main entry point: run a protocol, sweep network sizes, verify traces and generate topologies.
"""
import argparse
import logging
import sys

from src.core.run_spec import MODELS, MODES
from src.services.config_service import ConfigurationService
from src.services.command_handlers import (GenCommandHandler, RunCommandHandler, SweepCommandHandler,
                                           VerifyCommandHandler)

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


def _add_simulation_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags shared by run and sweep; every default is None so config files can fill the gaps."""
    parser.add_argument('--config-file', help='Path to a JSON or YAML configuration file')
    parser.add_argument('--model', choices=MODELS, help='Channel model and protocol (default: cd)')
    parser.add_argument('--n', type=int, help='Network size bound known to the nodes (default: node count)')
    parser.add_argument('--delta', type=int, help='Maximum degree bound known to the nodes (default: actual maximum degree)')
    parser.add_argument('--C', type=int, help='Phase-count multiplier: ceil(C log2 n) Luby phases')
    parser.add_argument('--beta', type=int, help='Rank-length multiplier: ceil(beta log2 n) bits (>= 4)')
    parser.add_argument('--kappa', type=int, help='Degree-estimate multiplier after committing (>= 5)')
    parser.add_argument('--C-prime', dest='C_prime', type=int, help='Backoff repetition multiplier: K = ceil(C\' log2 n)')
    parser.add_argument('--cap', help="Per-node energy cap: 'off', 'auto' or a non-negative integer")
    parser.add_argument('--cap-constant', dest='cap_constant', type=float, help='Constant c of the automatic cap')
    parser.add_argument('--seed', type=int, help='Master seed (default: 0)')
    parser.add_argument('--mode', choices=MODES, help='strict: fixed high-probability constants, full schedule; experiment: stop at global decision')
    parser.add_argument('--low-degree', dest='low_degree', choices=['naive-sim'], help='Low-degree MIS strategy for the no-CD protocol')
    parser.add_argument('--log-level', choices=LOG_LEVELS, default='INFO', help='Logging level')


def setup_argument_parser() -> argparse.ArgumentParser:
    """Set up and configure the argument parser."""
    parser = argparse.ArgumentParser(description='Energy-aware MIS simulator for synchronous radio networks')
    subparsers = parser.add_subparsers(dest='action', required=True)

    run_parser = subparsers.add_parser('run', help='Simulate one protocol run and write its trace')
    _add_simulation_arguments(run_parser)
    source = run_parser.add_mutually_exclusive_group()
    source.add_argument('--graph', dest='graph_file', help='Edge-list file')
    source.add_argument('--gen', dest='generator', help='Generator spec, e.g. gnp:64:0.1, matching:256, star:9')
    run_parser.add_argument('--output', help='Trace file (default: $MIS_SIM_OUTPUT_DIR/trace_<model>_seed<seed>.json)')

    sweep_parser = subparsers.add_parser('sweep', help='Run a grid of sizes and seeds; write CSV and a JSON summary')
    _add_simulation_arguments(sweep_parser)
    sweep_parser.add_argument('--gen', dest='generator', help='Graph family with an {n} placeholder (default: gnp:{n}:0.1)')
    sweep_parser.add_argument('--n-list', dest='n_list', help='Comma-separated network sizes, e.g. 64,128,256')
    sweep_parser.add_argument('--trials', type=int, help='Seeds per network size (default: 10)')
    sweep_parser.add_argument('--cap-list', dest='cap_list', help='Comma-separated energy caps for the matching lower-bound sweep')
    sweep_parser.add_argument('--workers', type=int, help='Worker processes (default: 1)')
    sweep_parser.add_argument('--output', help='Output directory (default: $MIS_SIM_OUTPUT_DIR or ./output)')

    verify_parser = subparsers.add_parser('verify', help='Check the MIS and audit every invariant of a trace')
    verify_parser.add_argument('trace_file', help='Trace JSON file written by run')
    verify_parser.add_argument('--strict', action='store_true', help='Treat high-probability invariants as failures')
    verify_parser.add_argument('--log-level', choices=LOG_LEVELS, default='INFO', help='Logging level')

    gen_parser = subparsers.add_parser('gen', help='Write a generated topology as an edge list')
    gen_parser.add_argument('--gen', dest='generator', required=True, help='Generator spec, e.g. gnp:64:0.1')
    gen_parser.add_argument('--seed', type=int, help='Seed for random families (default: 0)')
    gen_parser.add_argument('--output', help='Edge-list file (default: standard output)')
    gen_parser.add_argument('--log-level', choices=LOG_LEVELS, default='INFO', help='Logging level')

    return parser


def setup_logging(log_level: str) -> None:
    """Configure logging with the specified level."""
    logging.basicConfig(
        level=getattr(logging, log_level),
        format='%(asctime)s - %(levelname)s - %(message)s'
    )


def load_configuration(config_file: str) -> ConfigurationService:
    """Load configuration; a missing or unreadable file is a usage error."""
    if not config_file:
        return None

    try:
        return ConfigurationService(config_file)
    except (OSError, ValueError) as e:
        logging.error(f"Cannot load configuration {config_file}: {e}")
        sys.exit(2)


def main():
    """Main entry point of the application."""
    parser = setup_argument_parser()
    args = parser.parse_args()

    log_level = getattr(args, 'log_level', 'INFO')
    setup_logging(log_level)

    config_service = load_configuration(getattr(args, 'config_file', None))

    if args.action == 'run':
        handler = RunCommandHandler(config_service)
    elif args.action == 'sweep':
        handler = SweepCommandHandler(config_service)
    elif args.action == 'verify':
        handler = VerifyCommandHandler()
    elif args.action == 'gen':
        handler = GenCommandHandler()
    else:
        logging.error(f"Unknown action: {args.action}")
        sys.exit(2)
    handler.execute(args)


if __name__ == '__main__':
    main()
