"""Small undirected weighted graph used for circuits, chips and VQPUs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

from .circuit import Circuit


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass
class WeightedGraph:
    nodes: dict[int, Optional[float]] = field(default_factory=dict)
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int, float]], nodes: Iterable[int] = ()) -> "WeightedGraph":
        g = cls()
        for n in nodes:
            g.add_node(n)
        for u, v, w in edges:
            g.add_edge(u, v, w)
        return g

    def add_node(self, n: int, weight: Optional[float] = None) -> None:
        if n not in self.nodes or weight is not None:
            self.nodes[n] = weight

    def add_edge(self, u: int, v: int, weight: float = 1.0) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        if not math.isfinite(weight) or weight < 0:
            raise ValueError(f"edge weight must be finite and non-negative, got {weight}")
        self.add_node(u)
        self.add_node(v)
        self.edges[edge_key(u, v)] = float(weight)

    def weight(self, u: int, v: int) -> float:
        return self.edges[edge_key(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edges

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {n: set() for n in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def neighbors(self, n: int) -> set[int]:
        return self.adjacency()[n]

    def degree(self, n: int) -> int:
        return sum(1 for e in self.edges if n in e)

    def degrees(self) -> dict[int, int]:
        deg = {n: 0 for n in self.nodes}
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def incident_weight(self) -> dict[int, float]:
        out = {n: 0.0 for n in self.nodes}
        for (u, v), w in self.edges.items():
            out[u] += w
            out[v] += w
        return out

    def normalized(self) -> "WeightedGraph":
        """Copy with edge weights divided by the largest one (range [0, 1])."""
        top = max(self.edges.values(), default=0.0)
        scale = 1.0 / top if top > 0 else 1.0
        return WeightedGraph(dict(self.nodes), {e: w * scale for e, w in self.edges.items()})

    def subgraph(self, keep: Iterable[int]) -> "WeightedGraph":
        keep = set(keep)
        return WeightedGraph(
            {n: w for n, w in self.nodes.items() if n in keep},
            {e: w for e, w in self.edges.items() if e[0] in keep and e[1] in keep},
        )

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        adj = self.adjacency()
        start = next(iter(self.nodes))
        seen = {start}
        stack = [start]
        while stack:
            for m in adj[stack.pop()]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return len(seen) == len(self.nodes)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        for n, w in self.nodes.items():
            g.add_node(n, weight=w)
        for (u, v), w in self.edges.items():
            g.add_edge(u, v, weight=w)
        return g

    def __len__(self) -> int:
        return len(self.nodes)


def circuit_weighted_graph(c: Circuit) -> WeightedGraph:
    """Interaction graph of a circuit.

    One node per used qubit; edge weight counts two-qubit interactions.
    Gates on three or more qubits contribute a clique.
    """
    g = WeightedGraph()
    for q in sorted(c.used_qubits()):
        g.add_node(q)
    for instr in c.instructions:
        if instr.kind != "gate" or len(instr.qubits) < 2:
            continue
        for u, v in combinations(instr.qubits, 2):
            key = edge_key(u, v)
            g.edges[key] = g.edges.get(key, 0.0) + 1.0
    return g
