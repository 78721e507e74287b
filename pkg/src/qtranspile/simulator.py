"""Exact statevector simulation, used as the correctness oracle.

Amplitude index ``i`` has qubit ``k`` in bit ``k`` (qubit 0 is the least
significant bit).  Measurements and barriers are ignored.
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .circuit import Circuit, Instruction, gate_matrix
from .params import to_float

DEFAULT_MAX_QUBITS = 12


class SimulationError(ValueError):
    pass


def apply_matrix(state: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply a k-qubit matrix (operand 0 most significant) to a flat state."""
    k = len(qubits)
    psi = state.reshape((2,) * n)
    axes = [n - 1 - q for q in qubits]
    g = mat.reshape((2,) * (2 * k))
    psi = np.tensordot(g, psi, axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, list(range(k)), axes)
    return psi.reshape(-1)


def simulate_statevector(c: Circuit, initial: Optional[np.ndarray] = None,
                         max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    n = c.num_qubits
    if n > max_qubits:
        raise SimulationError(f"too many qubits to simulate: {n} > {max_qubits}")
    if initial is None:
        state = np.zeros(2 ** n, dtype=complex)
        state[0] = 1.0
    else:
        state = np.asarray(initial, dtype=complex).copy()
    for instr in c.instructions:
        if instr.kind != "gate":
            continue
        try:
            params = [to_float(p) for p in instr.params]
        except ValueError as exc:
            raise SimulationError(str(exc)) from None
        state = apply_matrix(state, gate_matrix(instr.name, params), instr.qubits, n)
    return state


def circuit_unitary(c: Circuit, max_qubits: int = 8) -> np.ndarray:
    """Full unitary, column j = image of basis state j."""
    n = c.num_qubits
    if n > max_qubits:
        raise SimulationError(f"too many qubits for a dense unitary: {n}")
    dim = 2 ** n
    cols = [simulate_statevector(c, np.eye(dim, dtype=complex)[j], max_qubits) for j in range(dim)]
    return np.array(cols).T


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|, insensitive to global phase."""
    return float(abs(np.vdot(a, b)))


LayoutLike = Union[Mapping[int, int], Sequence[int], None]


def _as_map(layout: LayoutLike, n: int) -> dict[int, int]:
    if layout is None:
        return {q: q for q in range(n)}
    if hasattr(layout, "as_dict"):
        return layout.as_dict()
    if isinstance(layout, Mapping):
        return {int(k): int(v) for k, v in layout.items()}
    return {q: int(p) for q, p in enumerate(layout)}


def _full_permutation(partial: dict[int, int], n_logical: int, n_physical: int) -> dict[int, int]:
    """Extend a logical->physical map to every physical qubit; extra logical
    ids (ancillas) take the free physical qubits in ascending order."""
    full = {q: p for q, p in partial.items()}
    free = [p for p in range(n_physical) if p not in set(full.values())]
    extra = [q for q in range(n_physical) if q not in full]
    for q, p in zip(extra, free):
        full[q] = p
    return full


def _product_prefix(num_qubits: int, placement: Mapping[int, int], angles: np.ndarray) -> Circuit:
    prep = Circuit.empty(num_qubits)
    for q, (t, p, l) in enumerate(angles):
        prep.append(Instruction.gate("u3", (placement[q],), (t, p, l)))
    return prep


def equivalent_up_to_layout(orig: Circuit, compiled: Circuit, initial: LayoutLike = None,
                            final: LayoutLike = None, tol: float = 1e-6,
                            trials: int = 3, seed: int = 7) -> bool:
    """Check that ``compiled`` implements ``orig`` under the given layouts.

    Logical qubit ``q`` enters the compiled circuit on physical qubit
    ``initial[q]`` and leaves on ``final[q]``; unused physical qubits start
    in |0> and must return to |0>.  The first trial uses the all-zero input;
    further trials prepend the same random single-qubit state to each
    logical qubit of both circuits.  Comparison is up to global phase:
    ``|<expected|actual>| >= 1 - tol``.
    """
    n, N = orig.num_qubits, compiled.num_qubits
    if N < n:
        return False
    init = _full_permutation(_as_map(initial, n), n, N)
    fin = _full_permutation(_as_map(final, n), n, N)
    rng = np.random.default_rng(seed)
    for trial in range(max(1, trials)):
        if trial == 0:
            angles = np.zeros((n, 3))
        else:
            angles = rng.uniform(0, 2 * np.pi, size=(n, 3))
        logical = _product_prefix(n, {q: q for q in range(n)}, angles)
        logical.instructions.extend(orig.instructions)
        want_small = simulate_statevector(logical)

        physical = _product_prefix(N, init, angles)
        physical.instructions.extend(compiled.instructions)
        got = simulate_statevector(physical)

        want = np.zeros(2 ** N, dtype=complex)
        idx = np.arange(2 ** n)
        target = np.zeros(2 ** n, dtype=np.int64)
        for q in range(n):
            target |= ((idx >> q) & 1) << fin[q]
        want[target] = want_small
        if overlap(want, got) < 1 - tol:
            return False
    return True


def probabilities(state: np.ndarray, qubits: Optional[Sequence[int]] = None) -> dict[str, float]:
    """Bitstring distribution over ``qubits`` (default: all), with the first
    listed qubit as the rightmost character."""
    n = int(np.log2(len(state)))
    qubits = list(range(n)) if qubits is None else list(qubits)
    probs = np.abs(state) ** 2
    out: dict[str, float] = {}
    for i, p in enumerate(probs):
        if p < 1e-15:
            continue
        key = "".join(str((i >> q) & 1) for q in reversed(qubits))
        out[key] = out.get(key, 0.0) + float(p)
    return out


__all__ = [
    "SimulationError",
    "apply_matrix",
    "simulate_statevector",
    "circuit_unitary",
    "equivalent_up_to_layout",
    "probabilities",
    "overlap",
]
