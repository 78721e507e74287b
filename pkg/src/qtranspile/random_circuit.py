"""Seeded random circuits for tests and benchmarks."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .circuit import GATES, Circuit

BENCH_GATES = ("cz", "cx", "rxx", "rx", "ry", "rz", "s", "t")


def random_circuit(num_qubits: int, num_gates: int, seed: int = 0,
                   gate_set: Sequence[str] = BENCH_GATES, measure: bool = False,
                   rng: Optional[np.random.Generator] = None) -> Circuit:
    """Uniformly drawn gates from ``gate_set`` on distinct random qubits with
    angles uniform in [-pi, pi).  Gates wider than the register are skipped
    in the draw."""
    rng = rng or np.random.default_rng(seed)
    usable = [g for g in gate_set if GATES[g].num_qubits <= num_qubits]
    if not usable:
        raise ValueError("no gate in the set fits the register")
    c = Circuit.empty(num_qubits, num_qubits if measure else 0)
    for _ in range(num_gates):
        name = usable[int(rng.integers(len(usable)))]
        gdef = GATES[name]
        qubits = [int(q) for q in rng.choice(num_qubits, gdef.num_qubits, replace=False)]
        params = [float(x) for x in rng.uniform(-np.pi, np.pi, gdef.num_params)]
        c.add(name, *qubits, params=params)
    if measure:
        for q in range(num_qubits):
            c.measure(q, q)
    return c
