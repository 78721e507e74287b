"""Circuit standardization: measurement completion, barriers, register
renaming and idle-qubit pruning.

Every function returns a new circuit and leaves its input untouched.
"""

from __future__ import annotations

from .circuit import Circuit, Instruction


def _trailing_measure_start(instrs: list[Instruction]) -> int:
    k = len(instrs)
    while k > 0 and instrs[k - 1].kind == "measure":
        k -= 1
    return k


def complete_measurements(c: Circuit) -> Circuit:
    """Ensure every qubit that should be read out is measured into a creg of
    exactly the right size.

    If the circuit has no measurements, every gate-touched qubit is measured.
    Otherwise the existing measured set is kept.  Measurements are moved to
    the end of the circuit, with clbits renumbered in the order of their
    original classical targets.
    """
    measures = [i for i in c.instructions if i.kind == "measure"]
    body = [i for i in c.instructions if i.kind != "measure"]

    if measures:
        first_target: dict[int, int] = {}
        for m in measures:
            first_target.setdefault(m.qubits[0], m.clbits[0])
        # order by original clbit, then by qubit for determinism
        measured = sorted(first_target, key=lambda q: (first_target[q], q))
    else:
        measured = sorted(c.used_qubits(include_measures=False))

    if not measured:
        if c.num_clbits == 0:
            return c.copy()
        out = c.copy()
        out.cregs = []
        out.instructions = body
        return out

    creg_name = c.cregs[0][0] if c.cregs else "c"
    out = Circuit(list(c.qregs), [(creg_name, len(measured))], body, dict(c.metadata))
    for clbit, q in enumerate(measured):
        out.instructions.append(Instruction.measure(q, clbit))
    return out


def insert_barriers(c: Circuit) -> Circuit:
    """Place a single barrier over the measured qubits right before the
    trailing measurement block."""
    instrs = list(c.instructions)
    start = _trailing_measure_start(instrs)
    if start == len(instrs):
        return c.copy()
    measured = sorted({i.qubits[0] for i in instrs[start:]})
    prev = instrs[start - 1] if start > 0 else None
    if prev is not None and prev.kind == "barrier":
        if set(measured) <= set(prev.qubits):
            return c.copy()
        merged = sorted(set(prev.qubits) | set(measured))
        instrs[start - 1] = Instruction.barrier(merged)
    else:
        instrs.insert(start, Instruction.barrier(measured))
    out = c.copy()
    out.instructions = instrs
    return out


def rename_registers(c: Circuit) -> Circuit:
    """Collapse all quantum registers into ``q`` and all classical registers
    into ``c``.  Flat indices, and therefore semantics, are unchanged."""
    out = c.copy()
    out.qregs = [("q", c.num_qubits)] if c.num_qubits else []
    out.cregs = [("c", c.num_clbits)] if c.num_clbits else []
    return out


def prune_idle_qubits(c: Circuit) -> tuple[Circuit, dict[int, int]]:
    """Drop qubits that no gate or measurement touches.

    Returns the reduced circuit and the old-index -> new-index map.  A
    circuit with no used qubit at all is returned as is.
    """
    used = sorted(c.used_qubits(include_measures=True))
    if not used or len(used) == c.num_qubits:
        return c.copy(), {q: q for q in range(c.num_qubits)}
    qmap = {old: new for new, old in enumerate(used)}

    qregs = []
    offset = 0
    for name, size in c.qregs:
        kept = sum(1 for q in range(offset, offset + size) if q in qmap)
        if kept:
            qregs.append((name, kept))
        offset += size

    instrs = []
    for instr in c.instructions:
        if instr.kind == "barrier":
            qs = [qmap[q] for q in instr.qubits if q in qmap]
            if qs:
                instrs.append(Instruction.barrier(qs))
        else:
            instrs.append(instr.remap(qmap))
    return Circuit(qregs, list(c.cregs), instrs, dict(c.metadata)), qmap


def standardize(c: Circuit) -> Circuit:
    """prune -> rename -> complete measurements -> insert barriers."""
    pruned, qmap = prune_idle_qubits(c)
    out = insert_barriers(complete_measurements(rename_registers(pruned)))
    out.metadata.setdefault("qubit_map", {str(k): v for k, v in qmap.items()})
    return out
