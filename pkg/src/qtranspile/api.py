"""Embedded API: register chips and compile tasks against the resource DB."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .circuit import Circuit
from .graph import WeightedGraph, circuit_weighted_graph
from .mapping.layout import Layout
from .metrics import VerificationResult, circuit_cost, depth, verify_program
from .passes import gate_arity_counts
from .qasm import emit_qasm, parse_qasm
from .resources import ResourceDB, VQPU, open_db, vqpu_from_qubits
from .selector import SelectionRequest, select_fidelity_first, select_structure_first
from .standardize import standardize
from .transpiler import PassFlow, transpile


class CompileError(ValueError):
    """A problem with the task itself (bad pins, unknown chip, no capacity)."""


def update_chip_api(chip_name: str, chip_info: dict[str, Any], db: Union[ResourceDB, str, os.PathLike],
                    seed: int = 0) -> ResourceDB:
    """Register (or re-register) a chip and persist its VQPU library."""
    if not isinstance(db, ResourceDB):
        db = open_db(db)
    db.register_chip(chip_name, chip_info, seed=seed)
    return db


@dataclass
class CompileTask:
    circuit: str
    transpile: bool = True
    qpu_name: Optional[str] = None
    qubits_list: Optional[list[int]] = None
    optimization_level: int = 2
    passflow: Optional[Union[PassFlow, str]] = None
    vqpu_preferred: str = "fidelity"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.optimization_level not in (0, 1, 2, 3):
            raise CompileError(f"optimization_level must be 0..3, got {self.optimization_level}")
        if self.vqpu_preferred not in ("fidelity", "structure"):
            raise CompileError(f"vqpu_preferred must be fidelity or structure, got {self.vqpu_preferred!r}")
        if isinstance(self.passflow, str):
            self.passflow = PassFlow.from_json(self.passflow)


@dataclass
class CompileResult:
    compiled_qasm: str
    qubits_to_cbits: dict[int, int]
    verification: VerificationResult
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verification.ok

    def to_dict(self) -> dict[str, Any]:
        return {
            "compiled_QASM": self.compiled_qasm,
            "qubits_to_cbits": {str(k): v for k, v in sorted(self.qubits_to_cbits.items())},
            "verification": self.verification.to_dict(),
            "compiled_info": self.info,
        }


def _measure_map(c: Circuit) -> dict[int, int]:
    return {i.qubits[0]: i.clbits[0] for i in c.instructions if i.kind == "measure"}


def _largest_online(db: ResourceDB):
    chips = db.online_chips()
    if not chips:
        raise CompileError("no online chip in the database")
    return max(chips, key=lambda r: (r.qpu.qubits_num, r.qpu.name))


def _to_physical(c: Circuit, vqpu: VQPU, num_physical: int) -> Circuit:
    qmap = vqpu.v2p
    out = Circuit([("q", num_physical)], list(c.cregs), [], dict(c.metadata))
    for instr in c.instructions:
        out.instructions.append(instr.remap(qmap))
    return out


def _circuit_graph(c: Circuit) -> WeightedGraph:
    """Interaction graph with a node for every qubit, idle ones included."""
    g = circuit_weighted_graph(c)
    for q in range(c.num_qubits):
        g.add_node(q)
    return g


def _vqpu_info(v: VQPU) -> dict[str, Any]:
    return {
        "chip": v.parent_name,
        "chip_id": v.parent_id,
        "qubits": list(v.qubits),
        "avg_fidelity": v.avg_fidelity,
        "product_fidelity": v.product_fidelity,
        "strategy": v.strategy,
    }


def call_compiler_api(db: Union[ResourceDB, str, os.PathLike], **task_info: Any) -> CompileResult:
    """Standardize, select a VQPU, transpile, verify.

    With ``transpile=False`` the circuit is only checked against the
    named chip (or the largest online chip).
    """
    task = CompileTask(**task_info)
    if not isinstance(db, ResourceDB):
        db = open_db(db)
    source = parse_qasm(task.circuit)

    if task.qpu_name is not None and task.qpu_name not in db.chips:
        raise CompileError(f"unknown chip {task.qpu_name!r}")

    if not task.transpile:
        rec = db.chip(task.qpu_name) if task.qpu_name else _largest_online(db)
        result = verify_program(source, rec.qpu.backend)
        return CompileResult(emit_qasm(source, allow_symbolic=True), _measure_map(source), result,
                             {"chip": rec.qpu.name, "transpiled": False})

    std = standardize(source)
    n = std.num_qubits
    if n == 0 or not std.gates():
        rec = db.chip(task.qpu_name) if task.qpu_name else _largest_online(db)
        return CompileResult(emit_qasm(std, allow_symbolic=True), {}, verify_program(std, rec.qpu.backend),
                             {"chip": rec.qpu.name, "transpiled": False})

    witness = None
    if task.qubits_list is not None:
        if task.qpu_name is None:
            if len(db.chips) != 1:
                raise CompileError("qubits_list needs qpu_name")
            chip_name = next(iter(db.chips))
        else:
            chip_name = task.qpu_name
        rec = db.chip(chip_name)
        pins = list(task.qubits_list)
        bad = [q for q in pins if not 0 <= q < rec.qpu.qubits_num]
        if bad:
            raise CompileError(f"pinned qubits {bad} do not exist on {chip_name}")
        if len(set(pins)) < n:
            raise CompileError(f"circuit needs {n} qubits, qubits_list pins {len(set(pins))}")
        vqpu = vqpu_from_qubits(rec.qpu, pins)
        if not vqpu.graph().is_connected():
            raise CompileError("pinned qubits are not connected on the chip")
    else:
        req = SelectionRequest(n, _circuit_graph(std), task.vqpu_preferred, task.qpu_name)
        try:
            if task.vqpu_preferred == "structure":
                vqpu, witness = select_structure_first(db, req)
            else:
                vqpu = select_fidelity_first(db, req)
        except ValueError as exc:
            raise CompileError(str(exc)) from None
        rec = db.chip(vqpu.parent_name)

    chip_backend = rec.qpu.backend
    vbackend = vqpu.backend(chip_backend.basis_gates, chip_backend.max_gate_count)
    initial = Layout(witness) if witness is not None else None
    tr = transpile(std, vbackend, level=task.optimization_level, passflow=task.passflow,
                   seed=task.seed, initial_layout=initial)
    compiled_virtual = tr.circuit
    verification = verify_program(compiled_virtual, vbackend)
    physical = _to_physical(compiled_virtual, vqpu, chip_backend.qubits_num)
    physical_check = verify_program(physical, chip_backend)
    for check, msg in physical_check.violations:
        verification.violations.append((check, f"physical: {msg}"))

    v2p = vqpu.v2p
    counts = gate_arity_counts(compiled_virtual.instructions)
    info = {
        "transpiled": True,
        "vqpu": _vqpu_info(vqpu),
        "exact_structure_match": witness is not None,
        "qubit_map": std.metadata.get("qubit_map", {}),
        "initial_layout": {str(q): v for q, v in tr.initial_layout.items()},
        "final_layout": {str(q): v for q, v in tr.final_layout.items()},
        "initial_layout_physical": {str(q): v2p[v] for q, v in tr.initial_layout.items()},
        "final_layout_physical": {str(q): v2p[v] for q, v in tr.final_layout.items()},
        "swaps": tr.model.scratch.get("swaps", 0),
        "report": tr.report.to_dict(),
        "metrics": {
            "depth": depth(compiled_virtual),
            "gates_1q": counts["1q"],
            "gates_2q": counts["2q"],
            "circuit_cost": circuit_cost(compiled_virtual, vbackend) if verification.ok else None,
        },
        "virtual_qasm": emit_qasm(compiled_virtual, allow_symbolic=True),
    }
    return CompileResult(emit_qasm(physical, allow_symbolic=True), _measure_map(physical), verification, info)


__all__ = ["CompileError", "CompileResult", "CompileTask", "call_compiler_api", "update_chip_api"]
