"""Circuit passes over the DAG form: unrolling, basic optimization and
parameter substitution.

Every pass takes a :class:`CircuitDAG` and returns a new one; inputs are
never mutated.  Barriers act as optimization fences: they occupy their
wires, so no run or adjacent pair is ever formed across them.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .circuit import GATES, PERIODIC_ROTATIONS, Instruction, gate_matrix
from .dag import CircuitDAG
from .params import Param, bind_param, canonical_angle
from .synthesis import ANGLE_EPS, decompose_one_qubit_zyz, decompose_two_qubit_kak

PI = math.pi


class PassError(ValueError):
    pass


def _g(name: str, qubits: Sequence[int], params: Sequence[Param] = ()) -> Instruction:
    return Instruction.gate(name, tuple(qubits), tuple(params))


# --- multi-qubit expansion ------------------------------------------------

def _ccx_rule(a: int, b: int, c: int) -> list[Instruction]:
    return [
        _g("h", [c]), _g("cx", [b, c]), _g("tdg", [c]), _g("cx", [a, c]),
        _g("t", [c]), _g("cx", [b, c]), _g("tdg", [c]), _g("cx", [a, c]),
        _g("t", [b]), _g("t", [c]), _g("h", [c]), _g("cx", [a, b]),
        _g("t", [a]), _g("tdg", [b]), _g("cx", [a, b]),
    ]


def _cswap_rule(a: int, b: int, c: int) -> list[Instruction]:
    return [_g("cx", [c, b])] + _ccx_rule(a, b, c) + [_g("cx", [c, b])]


MULTI_QUBIT_RULES: dict[str, Callable[..., list[Instruction]]] = {
    "ccx": _ccx_rule,
    "cswap": _cswap_rule,
}


def _rewrite(dag: CircuitDAG, rule: Callable[[Instruction], list[Instruction] | None]) -> CircuitDAG:
    """Rebuild ``dag`` applying ``rule`` until every instruction is fixed
    (rule returns None)."""
    out = dag.copy_empty()
    for node in dag.op_nodes():
        stack = [node.instr]
        while stack:
            instr = stack.pop()
            repl = rule(instr) if instr.kind == "gate" else None
            if repl is None:
                out.apply(instr)
            else:
                stack.extend(reversed(repl))
    return out


def unroll_to_two_qubit(dag: CircuitDAG) -> CircuitDAG:
    """Expand every gate on three or more qubits into 1q/2q gates."""

    def rule(instr: Instruction):
        if len(instr.qubits) <= 2:
            return None
        fn = MULTI_QUBIT_RULES.get(instr.name)
        if fn is None:
            raise PassError(f"no expansion rule for {len(instr.qubits)}-qubit gate '{instr.name}'")
        return fn(*instr.qubits)

    return _rewrite(dag, rule)


# --- basis translation ----------------------------------------------------

def _two_qubit_rules(instr: Instruction) -> list[Instruction] | None:
    """Named-gate identities, written in terms of cx and 1q gates."""
    name, qs, p = instr.name, instr.qubits, instr.params
    a, b = qs if len(qs) == 2 else (None, None)
    if name == "swap":
        return [_g("cx", [a, b]), _g("cx", [b, a]), _g("cx", [a, b])]
    if name == "cz":
        return [_g("h", [b]), _g("cx", [a, b]), _g("h", [b])]
    if name == "cy":
        return [_g("sdg", [b]), _g("cx", [a, b]), _g("s", [b])]
    if name == "rzz":
        return [_g("cx", [a, b]), _g("rz", [b], p), _g("cx", [a, b])]
    if name == "rxx":
        return [_g("h", [a]), _g("h", [b]), _g("rzz", [a, b], p), _g("h", [a]), _g("h", [b])]
    if name == "ryy":
        return [
            _g("rx", [a], [PI / 2]), _g("rx", [b], [PI / 2]), _g("rzz", [a, b], p),
            _g("rx", [a], [-PI / 2]), _g("rx", [b], [-PI / 2]),
        ]
    if name == "crz":
        t = p[0]
        return [_g("rz", [b], [t / 2]), _g("cx", [a, b]), _g("rz", [b], [-t / 2]), _g("cx", [a, b])]
    if name == "cry":
        t = p[0]
        return [_g("ry", [b], [t / 2]), _g("cx", [a, b]), _g("ry", [b], [-t / 2]), _g("cx", [a, b])]
    if name == "crx":
        return [_g("h", [b]), _g("crz", [a, b], p), _g("h", [b])]
    if name == "cp":
        t = p[0]
        return [
            _g("rz", [a], [t / 2]), _g("cx", [a, b]), _g("rz", [b], [-t / 2]),
            _g("cx", [a, b]), _g("rz", [b], [t / 2]),
        ]
    return None


def _one_qubit_symbolic(instr: Instruction) -> list[Instruction] | None:
    q, p = instr.qubits, instr.params
    if instr.name == "u1":
        return [_g("rz", q, p)]
    if instr.name == "u2":
        return [_g("u3", q, [PI / 2, p[0], p[1]])]
    if instr.name == "u3":
        theta, phi, lam = p
        return [_g("rz", q, [lam]), _g("ry", q, [theta]), _g("rz", q, [phi])]
    return None


def _remap_local(seq: Iterable[Instruction], qubits: Sequence[int]) -> list[Instruction]:
    return [instr.remap({i: q for i, q in enumerate(qubits)}) for instr in seq]


def check_basis(basis: Iterable[str]) -> frozenset[str]:
    basis = frozenset(basis)
    unknown = sorted(basis - set(GATES))
    if unknown:
        raise PassError(f"unknown basis gates: {unknown}")
    if not {"rx", "ry", "rz"} <= basis or not ({"cx", "cz"} & basis):
        raise PassError("basis must contain rx, ry, rz and one of cx / cz")
    return basis


def unroll_to_basis(dag: CircuitDAG, basis: Iterable[str]) -> CircuitDAG:
    """Rewrite every gate into ``basis``.

    Named identities are applied transitively; literal gates without a rule
    fall back to ZYZ (one qubit) or KAK (two qubits) synthesis of their
    matrix.  If the basis has cz but not cx, each cx becomes h cz h.
    """
    basis = check_basis(basis)
    dag = unroll_to_two_qubit(dag)

    def rule(instr: Instruction):
        name, qs = instr.name, instr.qubits
        if name in basis:
            return None
        if name == "id":
            return []
        if name == "cx":
            return [_g("h", [qs[1]]), _g("cz", qs), _g("h", [qs[1]])]
        if len(qs) == 2:
            repl = _two_qubit_rules(instr)
            if repl is not None:
                return repl
            if instr.is_symbolic:
                raise PassError(f"cannot unroll symbolic gate '{name}'")
            return _remap_local(decompose_two_qubit_kak(gate_matrix(name, instr.params)), qs)
        if instr.is_symbolic:
            repl = _one_qubit_symbolic(instr)
            if repl is None:
                raise PassError(f"cannot unroll symbolic gate '{name}'")
            return repl
        return decompose_one_qubit_zyz(gate_matrix(name, instr.params), qs[0])

    return _rewrite(dag, rule)


# --- optimization ----------------------------------------------------------

def _is_inverse_pair(a: Instruction, b: Instruction) -> bool:
    if a.kind != "gate" or b.kind != "gate" or a.params or b.params:
        return False
    gdef = GATES.get(a.name)
    if gdef is None or gdef.inverse != b.name:
        return False
    if a.qubits == b.qubits:
        return True
    return gdef.symmetric and tuple(reversed(a.qubits)) == b.qubits


def cancel_inverses(dag: CircuitDAG) -> CircuitDAG:
    """Remove adjacent gate/inverse pairs (same qubits, nothing between them
    on any shared wire), repeating until no pair is left."""
    out = dag.copy()
    changed = True
    while changed:
        changed = False
        for node in out.op_nodes():
            if node.id not in out.nodes or node.instr.kind != "gate":
                continue
            wires = node.wires
            nxt = out.next_on(node.id, wires[0])
            if nxt.kind != "op" or not _is_inverse_pair(node.instr, nxt.instr):
                continue
            if all(out.next_on(node.id, w).id == nxt.id for w in wires):
                out.remove(node.id)
                out.remove(nxt.id)
                changed = True
    return out


def _one_qubit_gate(instr: Instruction) -> bool:
    return instr.kind == "gate" and len(instr.qubits) == 1


def _merge_same_axis(run: list[Instruction]) -> list[Instruction]:
    out: list[Instruction] = []
    for instr in run:
        if out and instr.name in ("rx", "ry", "rz", "u1") and out[-1].name == instr.name:
            merged = out[-1].params[0] + instr.params[0]
            out[-1] = _g(instr.name, instr.qubits, [merged])
        else:
            out.append(instr)
    return out


def _clean_rotations(run: list[Instruction]) -> list[Instruction]:
    """Wrap literal periodic angles into (-pi, pi] and drop near-zero ones."""
    out = []
    for instr in run:
        if instr.name in PERIODIC_ROTATIONS and not instr.is_symbolic:
            angle = canonical_angle(instr.params[0])
            if abs(angle) < ANGLE_EPS:
                continue
            instr = _g(instr.name, instr.qubits, [angle])
        out.append(instr)
    return out


_ROTATIONS = frozenset({"rx", "ry", "rz"})


def _fuse_literal(run: list[Instruction]) -> list[Instruction]:
    if not run:
        return run
    q = run[0].qubits[0]
    total = np.eye(2, dtype=complex)
    for instr in run:
        total = gate_matrix(instr.name, instr.params) @ total
    new = decompose_one_qubit_zyz(total, q)
    if len(new) < len(run) or any(i.name not in _ROTATIONS for i in run):
        return new
    return run


def _fuse_run(run: list[Instruction]) -> list[Instruction]:
    run = _clean_rotations(_merge_same_axis(run))
    out: list[Instruction] = []
    literal: list[Instruction] = []
    for instr in run:
        if instr.is_symbolic:
            out.extend(_fuse_literal(literal))
            literal = []
            out.append(instr)
        else:
            literal.append(instr)
    out.extend(_fuse_literal(literal))
    return _clean_rotations(_merge_same_axis(out))


def fuse_1q(dag: CircuitDAG) -> CircuitDAG:
    """Replace each maximal run of single-qubit gates on a wire by at most
    three rotations (ZYZ of the run's product).  Same-axis rotations are
    merged by angle addition first, which also covers symbolic angles."""
    out = dag.copy()
    for q in range(out.num_qubits):
        wire = ("q", q)
        runs: list[list[int]] = []
        current: list[int] = []
        for node in out.wire_ops(wire):
            if _one_qubit_gate(node.instr):
                current.append(node.id)
            else:
                if current:
                    runs.append(current)
                current = []
        if current:
            runs.append(current)
        for ids in runs:
            old = [out.nodes[i].instr for i in ids]
            new = _fuse_run(old)
            if new == old:
                continue
            anchor = ids[-1]
            for instr in new:
                out.insert_before(anchor, instr)
            for i in ids:
                out.remove(i)
    return out


def substitute_params(dag: CircuitDAG, bindings: Mapping[str, float]) -> CircuitDAG:
    """Bind symbolic parameters; unbound symbols stay symbolic."""
    out = dag.copy_empty()
    for node in dag.op_nodes():
        instr = node.instr
        if instr.is_symbolic and bindings:
            params = tuple(bind_param(p, bindings) for p in instr.params)
            instr = Instruction(instr.kind, instr.name, instr.qubits, instr.clbits, params)
        out.apply(instr)
    return out


def gate_arity_counts(instrs: Iterable[Instruction]) -> dict[str, int]:
    """Counts of gates by arity, keyed '1q', '2q', '3q+'."""
    out = {"1q": 0, "2q": 0, "3q+": 0}
    for instr in instrs:
        if instr.kind != "gate":
            continue
        k = len(instr.qubits)
        out["1q" if k == 1 else "2q" if k == 2 else "3q+"] += 1
    return out


__all__ = [
    "PassError",
    "unroll_to_two_qubit",
    "unroll_to_basis",
    "check_basis",
    "cancel_inverses",
    "fuse_1q",
    "substitute_params",
    "gate_arity_counts",
]
