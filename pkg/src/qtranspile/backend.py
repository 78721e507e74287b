"""Hardware description (Backend) and the mutable compilation context (Model)
threaded through the passes."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .graph import WeightedGraph, edge_key

DEFAULT_1Q_FIDELITY = 0.996


class BackendError(ValueError):
    pass


@dataclass
class Backend:
    name: str
    qubits_num: int
    coupling_list: list[tuple[int, int, float]]
    basis_gates: list[str] = field(default_factory=lambda: ["cx", "rx", "ry", "rz"])
    backend_type: str = "superconducting"
    single_qubit_fidelity: dict[int, float] = field(default_factory=dict)
    max_gate_count: Optional[int] = None
    status: str = "online"
    priority_qubits: Optional[list[int]] = None

    def __post_init__(self) -> None:
        self.coupling_list = [(int(a), int(b), float(f)) for a, b, f in self.coupling_list]
        self.single_qubit_fidelity = {int(k): float(v) for k, v in self.single_qubit_fidelity.items()}
        self.validate()

    def validate(self) -> None:
        if self.qubits_num < 1:
            raise BackendError("qubits_num must be positive")
        for a, b, f in self.coupling_list:
            if not (0 <= a < self.qubits_num and 0 <= b < self.qubits_num):
                raise BackendError(f"coupling ({a}, {b}) out of range for {self.qubits_num} qubits")
            if a == b:
                raise BackendError(f"coupling ({a}, {b}) is a self-loop")
            if not (0.0 <= f <= 1.0) or math.isnan(f):
                raise BackendError(f"coupling fidelity {f} for ({a}, {b}) outside [0, 1]")
        for q, f in self.single_qubit_fidelity.items():
            if not 0 <= q < self.qubits_num:
                raise BackendError(f"single-qubit fidelity for unknown qubit {q}")
            if not (0.0 <= f <= 1.0) or math.isnan(f):
                raise BackendError(f"single-qubit fidelity {f} for qubit {q} outside [0, 1]")
        if self.status not in ("online", "offline"):
            raise BackendError(f"status must be online or offline, got {self.status!r}")
        if self.max_gate_count is not None and self.max_gate_count < 0:
            raise BackendError("max_gate_count must be non-negative")

    def warn_if_disconnected(self) -> bool:
        connected = self.coupling_graph().is_connected()
        if not connected:
            warnings.warn(f"backend {self.name!r} has a disconnected coupling graph", stacklevel=2)
        return connected

    def qubit_fidelity(self, q: int) -> float:
        return self.single_qubit_fidelity.get(q, DEFAULT_1Q_FIDELITY)

    def average_1q_fidelity(self) -> float:
        return float(np.mean([self.qubit_fidelity(q) for q in range(self.qubits_num)]))

    def edge_fidelities(self) -> dict[tuple[int, int], float]:
        """Coupler fidelities keyed by sorted pair; a repeated pair keeps the
        last listed value."""
        return {edge_key(a, b): f for a, b, f in self.coupling_list}

    def coupling_graph(self) -> WeightedGraph:
        g = WeightedGraph()
        for q in range(self.qubits_num):
            g.add_node(q, self.qubit_fidelity(q))
        for (a, b), f in self.edge_fidelities().items():
            g.add_edge(a, b, f)
        return g

    def is_coupled(self, a: int, b: int) -> bool:
        return edge_key(a, b) in self.edge_fidelities()

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "backend_type": self.backend_type,
            "qubits_num": self.qubits_num,
            "coupling_list": [[a, b, f] for a, b, f in self.coupling_list],
            "basis_gates": list(self.basis_gates),
            "single_qubit_fidelity": {str(k): v for k, v in sorted(self.single_qubit_fidelity.items())},
            "status": self.status,
        }
        if self.max_gate_count is not None:
            out["max_gate_count"] = self.max_gate_count
        if self.priority_qubits is not None:
            out["priority_qubits"] = list(self.priority_qubits)
        return out

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Backend":
        return cls(
            name=doc["name"],
            backend_type=doc.get("backend_type", "superconducting"),
            qubits_num=int(doc["qubits_num"]),
            coupling_list=[tuple(e) for e in doc["coupling_list"]],
            basis_gates=list(doc.get("basis_gates", ["cx", "rx", "ry", "rz"])),
            single_qubit_fidelity=doc.get("single_qubit_fidelity", {}) or {},
            max_gate_count=doc.get("max_gate_count"),
            status=doc.get("status", "online"),
            priority_qubits=doc.get("priority_qubits"),
        )


class Model:
    """Compilation context shared by the passes of one run.

    Distance and fidelity matrices are built on first access and cached.
    ``scratch`` carries arbitrary pass-to-pass data.
    """

    def __init__(self, backend: Backend, seed: int = 0):
        self.backend = backend
        self.seed = seed
        self.initial_layout = None
        self.final_layout = None
        self.scratch: dict[str, Any] = {}
        self._distance = None
        self._fidelity = None

    @property
    def num_physical(self) -> int:
        return self.backend.qubits_num

    @property
    def distance_matrix(self) -> np.ndarray:
        if self._distance is None:
            from .mapping.matrices import distance_matrix

            self._distance = distance_matrix(self.backend.coupling_graph(), self.num_physical)
        return self._distance

    @property
    def fidelity_matrix(self):
        if self._fidelity is None:
            from .mapping.matrices import fidelity_matrix

            self._fidelity = fidelity_matrix(self.backend.coupling_graph(), self.num_physical)
        return self._fidelity

    def neighbors(self) -> list[list[int]]:
        adj = [[] for _ in range(self.num_physical)]
        for a, b in self.backend.edge_fidelities():
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(n) for n in adj]

    def flat_noise(self) -> bool:
        """True when every coupler has the same fidelity."""
        vals = list(self.backend.edge_fidelities().values())
        return not vals or max(vals) - min(vals) <= 1e-12
