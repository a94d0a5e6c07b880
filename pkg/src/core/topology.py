"""
Communication graphs: construction, generators and the edge-list text format.

Node ids are dense integers in [0, n). Protocols never see them; they exist for bookkeeping and traces.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable, List, Tuple

import networkx as nx
import numpy as np

Edge = Tuple[int, int]


class GraphError(ValueError):
    """Raised when a graph or a generator request is invalid."""


class EdgeListFormatError(GraphError):
    """Raised when edge-list text cannot be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph over nodes [0, node_count)."""
    node_count: int
    edges: FrozenSet[Edge]

    def __post_init__(self):
        if self.node_count < 1:
            raise GraphError(f"Graph needs at least one node, got {self.node_count}")
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"Self-loop on node {u}")
            if not (0 <= u < v < self.node_count):
                raise GraphError(f"Edge ({u}, {v}) is not a normalized pair inside [0, {self.node_count})")

    @classmethod
    def from_pairs(cls, node_count: int, pairs: Iterable[Edge]) -> 'Graph':
        """Build a graph from unordered pairs; duplicates are rejected."""
        edges = set()
        for u, v in pairs:
            edge = (min(u, v), max(u, v))
            if edge in edges:
                raise GraphError(f"Duplicate edge {edge}")
            edges.add(edge)
        return cls(node_count, frozenset(edges))

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> 'Graph':
        nodes = sorted(graph.nodes())
        if nodes != list(range(len(nodes))):
            graph = nx.convert_node_labels_to_integers(graph, ordering='sorted')
        return cls.from_pairs(graph.number_of_nodes(), graph.edges())

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        graph.add_edges_from(self.edges)
        return graph

    @cached_property
    def adjacency(self) -> Tuple[Tuple[int, ...], ...]:
        neighbors: List[List[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            neighbors[u].append(v)
            neighbors[v].append(u)
        return tuple(tuple(sorted(nbrs)) for nbrs in neighbors)

    def neighbors(self, node: int) -> Tuple[int, ...]:
        return self.adjacency[node]

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def induced_edges(self, nodes: Iterable[int]) -> List[Edge]:
        members = set(nodes)
        return [(u, v) for u, v in self.sorted_edges() if u in members and v in members]


def max_degree(graph: Graph) -> int:
    """Largest number of incident edges over all nodes; 0 for edgeless graphs."""
    return max((len(nbrs) for nbrs in graph.adjacency), default=0)


def generate_matching_lower_bound(n: int) -> Graph:
    """n/4 disjoint edges {2i, 2i+1} plus n/2 isolated nodes [n/2, n)."""
    if n < 4 or n % 4 != 0:
        raise GraphError(f"Matching instance needs a positive multiple of 4 nodes, got {n}")
    return Graph.from_pairs(n, ((2 * i, 2 * i + 1) for i in range(n // 4)))


def generate_gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p), deterministic for a fixed seed."""
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"Edge probability must lie in [0, 1], got {p}")
    if n < 1:
        raise GraphError(f"Graph needs at least one node, got {n}")
    generator = np.random.default_rng(seed & ((1 << 64) - 1))
    edges = []
    # Row by row keeps memory linear in n for large sweeps.
    for u in range(n - 1):
        row = generator.random(n - u - 1) < p
        edges.extend((u, u + 1 + int(offset)) for offset in np.flatnonzero(row))
    return Graph(n, frozenset(edges))


def generate_star(n: int) -> Graph:
    """One center (node 0) and n - 1 leaves."""
    if n < 1:
        raise GraphError(f"Star needs at least one node, got {n}")
    return Graph.from_networkx(nx.star_graph(n - 1))


def generate_clique(n: int) -> Graph:
    if n < 1:
        raise GraphError(f"Clique needs at least one node, got {n}")
    return Graph.from_networkx(nx.complete_graph(n))


def generate_path(n: int) -> Graph:
    if n < 1:
        raise GraphError(f"Path needs at least one node, got {n}")
    return Graph.from_networkx(nx.path_graph(n))


def save_edge_list(graph: Graph) -> str:
    """Header "n m", then one "u v" line per edge with u < v, newline-terminated."""
    lines = [f"{graph.node_count} {len(graph.edges)}"]
    lines.extend(f"{u} {v}" for u, v in graph.sorted_edges())
    return '\n'.join(lines) + '\n'


def load_edge_list(text: str) -> Graph:
    """Parse the edge-list format; every problem is reported with its 1-based line number."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise EdgeListFormatError("missing header 'n m'", 1)

    header = lines[0].split()
    if len(header) != 2 or not all(token.isdigit() for token in header):
        raise EdgeListFormatError(f"malformed header {lines[0]!r}, expected 'n m'", 1)
    node_count, edge_count = int(header[0]), int(header[1])
    if node_count < 1:
        raise EdgeListFormatError(f"node count must be positive, got {node_count}", 1)

    edges = set()
    line_number = 1
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) != 2 or not all(token.isdigit() for token in tokens):
            raise EdgeListFormatError(f"malformed edge {line!r}, expected 'u v'", line_number)
        u, v = int(tokens[0]), int(tokens[1])
        if u >= node_count or v >= node_count:
            raise EdgeListFormatError(f"endpoint out of range [0, {node_count}) in {line!r}", line_number)
        if u == v:
            raise EdgeListFormatError(f"self-loop on node {u}", line_number)
        edge = (min(u, v), max(u, v))
        if edge in edges:
            raise EdgeListFormatError(f"duplicate edge {edge}", line_number)
        edges.add(edge)

    if len(edges) != edge_count:
        raise EdgeListFormatError(f"header announces {edge_count} edges, found {len(edges)}", line_number)

    logging.debug(f"Loaded edge list with {node_count} nodes and {edge_count} edges")
    return Graph(node_count, frozenset(edges))
