"""Synthetic chip documents and the demo circuit used across tests, demos
and the CLI examples."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .backend import Backend
from .circuit import Circuit
from .graph import WeightedGraph


def lattice_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    """Row-major square lattice couplers."""
    out = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                out.append((q, q + 1))
            if r + 1 < rows:
                out.append((q, q + cols))
    return out


def lattice_chip(rows: int, cols: int, seed: int = 0, fid_range=(0.90, 0.999),
                 holes: Iterable[int] = (), name: Optional[str] = None,
                 basis_gates=("cx", "rx", "ry", "rz")) -> dict:
    """Chip document for a lattice with random coupler fidelities.
    ``holes`` lose all their couplers."""
    rng = np.random.default_rng(seed)
    holes = set(holes)
    n = rows * cols
    coupling = []
    for a, b in lattice_edges(rows, cols):
        f = float(rng.uniform(*fid_range))
        if a not in holes and b not in holes:
            coupling.append([a, b, round(f, 6)])
    sqf = {str(q): round(float(rng.uniform(0.99, 0.999)), 6) for q in range(n)}
    return {
        "name": name or f"lattice_{rows}x{cols}",
        "backend_type": "superconducting",
        "qubits_num": n,
        "coupling_list": coupling,
        "basis_gates": list(basis_gates),
        "single_qubit_fidelity": sqf,
        "status": "online",
    }


BAIHUA_ROWS, BAIHUA_COLS = 12, 13
BAIHUA_BLOCK = (61, 62, 63, 74, 75, 76)
BAIHUA_COUPLED = 122


def _connected(nodes: set[int], edges: list[tuple[int, int]]) -> bool:
    g = WeightedGraph.from_edges([(a, b, 1.0) for a, b in edges], nodes)
    return g.is_connected()


def baihua_like_chip(seed: int = 2024) -> dict:
    """A 12 x 13 lattice (156 qubit indices) with 34 holes leaving 122
    coupled qubits in one component.  The 2 x 3 block on qubits
    61, 62, 63, 74, 75, 76 has the best couplers on the chip."""
    rng = np.random.default_rng(seed)
    n = BAIHUA_ROWS * BAIHUA_COLS
    protected = set(BAIHUA_BLOCK)
    all_edges = lattice_edges(BAIHUA_ROWS, BAIHUA_COLS)
    holes: set[int] = set()
    order = [int(q) for q in rng.permutation(n)]
    for q in order:
        if len(holes) == n - BAIHUA_COUPLED:
            break
        if q in protected:
            continue
        trial = holes | {q}
        alive = set(range(n)) - trial
        edges = [(a, b) for a, b in all_edges if a in alive and b in alive]
        if _connected(alive, edges):
            holes = trial
    coupling = []
    for a, b in all_edges:
        if a in holes or b in holes:
            continue
        if a in protected and b in protected:
            f = rng.uniform(0.995, 0.999)
        else:
            f = rng.uniform(0.90, 0.985)
        coupling.append([a, b, round(float(f), 6)])
    sqf = {str(q): round(float(rng.uniform(0.99, 0.999)), 6) for q in range(n)}
    return {
        "name": "baihua_like",
        "backend_type": "superconducting",
        "qubits_num": n,
        "coupling_list": coupling,
        "basis_gates": ["cz", "rx", "ry", "rz"],
        "single_qubit_fidelity": sqf,
        "status": "online",
    }


def random_connected_backend(n: int, seed: int = 0, extra_edges: int = 3,
                             basis_gates=("cx", "rx", "ry", "rz"), fid_range=(0.90, 0.999),
                             name: Optional[str] = None) -> Backend:
    """Random spanning tree plus a few extra couplers."""
    rng = np.random.default_rng(seed)
    perm = [int(q) for q in rng.permutation(n)]
    edges = set()
    for i in range(1, n):
        a, b = perm[i], perm[int(rng.integers(i))]
        edges.add((min(a, b), max(a, b)))
    tries = 0
    while len(edges) < n - 1 + extra_edges and tries < 100:
        a, b = (int(x) for x in rng.choice(n, 2, replace=False))
        edges.add((min(a, b), max(a, b)))
        tries += 1
    coupling = [(a, b, float(rng.uniform(*fid_range))) for a, b in sorted(edges)]
    return Backend(name or f"random{n}_{seed}", n, coupling, list(basis_gates))


def ladder_demo_circuit() -> Circuit:
    """Six-qubit circuit whose interaction graph is a 2 x 3 ladder
    (rails 0-1-2 and 3-4-5, rungs 0-3, 1-4, 2-5), without measurements.
    Pair counts: (0,1) 2, (1,4) 2, every other ladder edge 1."""
    c = Circuit.empty(6)
    for q in range(6):
        c.add("h", q)
    c.add("cx", 0, 1)
    c.add("cx", 1, 2)
    c.add("rz", 2, params=[0.7])
    c.add("cx", 0, 3)
    c.add("cx", 1, 4)
    c.add("t", 4)
    c.add("cx", 2, 5)
    c.add("cx", 3, 4)
    c.add("cx", 4, 5)
    c.add("cx", 1, 0)
    c.add("ry", 5, params=[0.3])
    c.add("cz", 4, 1)
    return c
