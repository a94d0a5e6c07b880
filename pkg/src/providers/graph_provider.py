"""
Sources of network topologies: edge-list files and colon-delimited generator specs.
"""
import logging
from abc import ABC, abstractmethod
from typing import Callable, Dict, List

from src.core.topology import (Graph, GraphError, generate_clique, generate_gnp, generate_matching_lower_bound,
                               generate_path, generate_star, load_edge_list)


class GraphProvider(ABC):
    """Abstract base class for topology sources."""

    @abstractmethod
    def load(self) -> Graph:
        """Build or read the graph."""
        pass

    @abstractmethod
    def describe(self) -> str:
        """Reference stored in traces so a run can be reproduced."""
        pass


class EdgeListFileProvider(GraphProvider):
    """Reads a graph from a plain-text edge-list file."""

    def __init__(self, path: str):
        self.path = path

    def load(self) -> Graph:
        try:
            with open(self.path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise GraphError(f"Cannot read edge list {self.path}: {e}") from e
        graph = load_edge_list(text)
        logging.info(f"Loaded graph from {self.path}: {graph.node_count} nodes, {len(graph.edges)} edges")
        return graph

    def describe(self) -> str:
        return self.path


def _parse_int(value: str, what: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise GraphError(f"{what} must be an integer, got {value!r}") from None


def _parse_probability(value: str) -> float:
    try:
        p = float(value)
    except ValueError:
        raise GraphError(f"Edge probability must be a number, got {value!r}") from None
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"Edge probability must lie in [0, 1], got {p}")
    return p


class GeneratorSpecProvider(GraphProvider):
    """Builds a graph from specs such as `gnp:64:0.1`, `matching:256`, `star:9`, `clique:8` or `path:5`.

    Random families draw from `seed`, so the same spec and seed always give the same graph.
    """

    def __init__(self, spec: str, seed: int = 0):
        self.spec = spec
        self.seed = seed
        self._builders: Dict[str, Callable[[List[str]], Graph]] = {
            'gnp': self._gnp,
            'matching': lambda args: generate_matching_lower_bound(self._size(args, 'matching')),
            'star': lambda args: generate_star(self._size(args, 'star')),
            'clique': lambda args: generate_clique(self._size(args, 'clique')),
            'path': lambda args: generate_path(self._size(args, 'path')),
        }

    def load(self) -> Graph:
        family, *args = self.spec.strip().split(':')
        builder = self._builders.get(family)
        if builder is None:
            raise GraphError(f"Unknown generator {family!r}; use one of {', '.join(sorted(self._builders))}")
        graph = builder(args)
        logging.info(f"Generated {self.spec}: {graph.node_count} nodes, {len(graph.edges)} edges")
        return graph

    def describe(self) -> str:
        return self.spec

    def _size(self, args: List[str], family: str) -> int:
        if len(args) != 1:
            raise GraphError(f"Generator spec must look like {family}:n, got {self.spec!r}")
        return _parse_int(args[0], 'n')

    def _gnp(self, args: List[str]) -> Graph:
        if len(args) != 2:
            raise GraphError(f"Generator spec must look like gnp:n:p, got {self.spec!r}")
        return generate_gnp(_parse_int(args[0], 'n'), _parse_probability(args[1]), self.seed)


def create_graph_provider(graph_file: str = None, generator: str = None, seed: int = 0) -> GraphProvider:
    if graph_file and generator:
        raise GraphError("A graph comes either from a file or from a generator spec, not both")
    if graph_file:
        return EdgeListFileProvider(graph_file)
    if generator:
        return GeneratorSpecProvider(generator, seed)
    raise GraphError("No graph source given")
