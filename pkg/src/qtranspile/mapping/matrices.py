"""All-pairs distance and best-fidelity matrices of a coupling graph."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..graph import WeightedGraph

# Distance reported between physical qubits with no connecting path.
UNREACHABLE = 10 ** 6


def _size(g: WeightedGraph, n: Optional[int]) -> int:
    if n is not None:
        return n
    return max(g.nodes, default=-1) + 1


def distance_matrix(g: WeightedGraph, n: Optional[int] = None) -> np.ndarray:
    """Shortest-path edge counts by BFS from every node.  Pairs with no path
    get ``UNREACHABLE``."""
    n = _size(g, n)
    adj = [[] for _ in range(n)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[s, v] == UNREACHABLE:
                    dist[s, v] = dist[s, u] + 1
                    queue.append(v)
    return dist


@dataclass(frozen=True)
class FidelityMatrix:
    """``values[i, j]`` = best product of coupler fidelities over paths from
    i to j (1 on the diagonal, 0 when unreachable).  ``next_hop[i, j]`` is
    the neighbor of i on that path (-1 when unreachable or i == j)."""

    values: np.ndarray
    next_hop: np.ndarray

    def __getitem__(self, ij) -> float:
        return self.values[ij]

    def path(self, i: int, j: int) -> list[int]:
        if i == j:
            return [i]
        if self.next_hop[i, j] < 0:
            return []
        out = [i]
        while out[-1] != j:
            out.append(int(self.next_hop[out[-1], j]))
        return out


def fidelity_matrix(g: WeightedGraph, n: Optional[int] = None) -> FidelityMatrix:
    """Max-product paths, computed as shortest paths under edge cost
    -ln(fidelity) with Floyd–Warshall.  Zero-fidelity couplers are treated
    as absent."""
    n = _size(g, n)
    cost = np.full((n, n), np.inf)
    nxt = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(cost, 0.0)
    for (u, v), f in g.edges.items():
        if f <= 0:
            continue
        c = -np.log(f)
        if c < cost[u, v]:
            cost[u, v] = cost[v, u] = c
            nxt[u, v], nxt[v, u] = v, u
    for k in range(n):
        via = cost[:, k:k + 1] + cost[k:k + 1, :]
        better = via < cost - 1e-15
        if better.any():
            cost = np.where(better, via, cost)
            nxt = np.where(better, nxt[:, k:k + 1], nxt)
    values = np.exp(-cost)
    return FidelityMatrix(values, nxt)
