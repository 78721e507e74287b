"""Hardware-constraint checks for compiled programs and evaluation metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .backend import Backend
from .circuit import Circuit
from .dag import to_dag
from .graph import edge_key

DEFAULT_K = 0.995

CHECK_IDS = ("qubit_count", "coupling", "gate_count", "non_empty")


@dataclass
class VerificationResult:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [list(v) for v in self.violations]}


def verify_program(c: Circuit, b: Backend) -> VerificationResult:
    """Run all four checks (none short-circuits the others)."""
    res = VerificationResult()
    used = c.used_qubits()
    if c.num_qubits > b.qubits_num or any(q >= b.qubits_num for q in used):
        res.violations.append(
            ("qubit_count", f"circuit uses {c.num_qubits} qubits, backend has {b.qubits_num}")
        )
    edges = b.edge_fidelities()
    for instr in c.instructions:
        if instr.kind != "gate" or len(instr.qubits) < 2:
            continue
        if len(instr.qubits) > 2:
            res.violations.append(("coupling", f"{instr} acts on {len(instr.qubits)} qubits"))
        elif edge_key(*instr.qubits) not in edges:
            res.violations.append(("coupling", f"{instr} is not on a coupled pair"))
    gates = c.gates()
    if b.max_gate_count is not None and len(gates) > b.max_gate_count:
        res.violations.append(("gate_count", f"{len(gates)} gates exceed the limit of {b.max_gate_count}"))
    if not gates:
        res.violations.append(("non_empty", "circuit has no gates"))
    return res


Distribution = Mapping[str, float]


def _check_distribution(p: Distribution, label: str) -> None:
    if any(v < 0 for v in p.values()):
        raise ValueError(f"{label} has negative probabilities")
    total = sum(p.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"{label} sums to {total}, not 1")
    widths = {len(k) for k in p}
    if len(widths) > 1:
        raise ValueError(f"{label} mixes bitstring widths {sorted(widths)}")


def hellinger_distance(p_exp: Distribution, p_ideal: Distribution) -> float:
    """d_H with d_H^2 = 1 - sum_x sqrt(p(x) q(x)); missing keys count as 0."""
    bc = sum(math.sqrt(v * p_ideal.get(k, 0.0)) for k, v in p_exp.items())
    return math.sqrt(max(0.0, 1.0 - bc))


def hellinger_fidelity(p_exp: Distribution, p_ideal: Distribution) -> float:
    """F_H = (1 - d_H^2)^2."""
    _check_distribution(p_exp, "p_exp")
    _check_distribution(p_ideal, "p_ideal")
    keys_exp = {len(k) for k in p_exp}
    keys_ideal = {len(k) for k in p_ideal}
    if keys_exp and keys_ideal and keys_exp != keys_ideal:
        raise ValueError("distributions are over different bit widths")
    d2 = hellinger_distance(p_exp, p_ideal) ** 2
    return min(1.0, max(0.0, (1.0 - d2) ** 2))


def depth(c: Circuit) -> int:
    """Gate layers under ASAP scheduling; barriers and measures excluded."""
    return to_dag(c).depth()


def circuit_cost(c: Circuit, b: Backend, K: float = DEFAULT_K, f1q: Optional[float] = None) -> float:
    """C = -D ln K - sum ln F1q - sum ln F2q (natural log).

    Single-qubit gates use ``f1q`` or the backend's average single-qubit
    fidelity; two-qubit gates use their coupler's fidelity.
    """
    if not 0 < K <= 1:
        raise ValueError(f"K must be in (0, 1], got {K}")
    f1 = b.average_1q_fidelity() if f1q is None else f1q
    edges = b.edge_fidelities()
    cost = -depth(c) * math.log(K)
    for instr in c.gates():
        if len(instr.qubits) == 1:
            cost -= math.log(f1)
        elif len(instr.qubits) == 2:
            key = edge_key(*instr.qubits)
            if key not in edges:
                raise ValueError(f"{instr} is not on a coupled pair of {b.name}")
            cost -= math.log(edges[key])
        else:
            raise ValueError(f"{instr} must be unrolled before costing")
    return cost
