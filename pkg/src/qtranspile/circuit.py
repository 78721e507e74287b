"""Linear circuit IR and the built-in gate table.

Qubits and clbits are addressed by flat indices; ``Circuit.qregs`` and
``Circuit.cregs`` record how those flat indices split into named
registers, in declaration order.

Gate matrices are written with the first operand as the most significant
bit of the matrix index (``kron(A, B)`` puts ``A`` on operand 0).  State
vectors elsewhere in the package use qubit-0-least-significant ordering;
the simulator does the bookkeeping between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .params import Param, ParamExpr, is_symbolic, to_float

_SQ2 = 1 / math.sqrt(2)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2


def rx_matrix(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(t: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def controlled(u: np.ndarray) -> np.ndarray:
    """Controlled-``u`` with the control on operand 0."""
    k = u.shape[0]
    out = np.eye(2 * k, dtype=complex)
    out[k:, k:] = u
    return out


def _pauli_rotation(p: np.ndarray) -> Callable[[float], np.ndarray]:
    pp = np.kron(p, p)

    def mat(t: float) -> np.ndarray:
        return math.cos(t / 2) * np.eye(4) - 1j * math.sin(t / 2) * pp

    return mat


_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def _ccx() -> np.ndarray:
    m = np.eye(8, dtype=complex)
    m[[6, 7]] = m[[7, 6]]
    return m


def _cswap() -> np.ndarray:
    m = np.eye(8, dtype=complex)
    m[[5, 6]] = m[[6, 5]]
    return m


@dataclass(frozen=True)
class GateDef:
    name: str
    num_qubits: int
    num_params: int
    matrix: Callable[..., np.ndarray]
    inverse: Optional[str] = None  # name of the parameterless inverse gate
    symmetric: bool = False  # invariant under operand permutation


def _const(m: np.ndarray) -> Callable[[], np.ndarray]:
    return lambda: m


GATES: dict[str, GateDef] = {
    g.name: g
    for g in [
        GateDef("id", 1, 0, _const(I2), inverse="id"),
        GateDef("x", 1, 0, _const(X), inverse="x"),
        GateDef("y", 1, 0, _const(Y), inverse="y"),
        GateDef("z", 1, 0, _const(Z), inverse="z"),
        GateDef("h", 1, 0, _const(H), inverse="h"),
        GateDef("s", 1, 0, _const(np.diag([1, 1j])), inverse="sdg"),
        GateDef("sdg", 1, 0, _const(np.diag([1, -1j])), inverse="s"),
        GateDef("t", 1, 0, _const(np.diag([1, np.exp(0.25j * math.pi)])), inverse="tdg"),
        GateDef("tdg", 1, 0, _const(np.diag([1, np.exp(-0.25j * math.pi)])), inverse="t"),
        GateDef("rx", 1, 1, rx_matrix),
        GateDef("ry", 1, 1, ry_matrix),
        GateDef("rz", 1, 1, rz_matrix),
        GateDef("u1", 1, 1, lambda lam: np.diag([1, np.exp(1j * lam)])),
        GateDef("u2", 1, 2, lambda phi, lam: u3_matrix(math.pi / 2, phi, lam)),
        GateDef("u3", 1, 3, u3_matrix),
        GateDef("cx", 2, 0, _const(controlled(X)), inverse="cx"),
        GateDef("cz", 2, 0, _const(controlled(Z)), inverse="cz", symmetric=True),
        GateDef("cy", 2, 0, _const(controlled(Y)), inverse="cy"),
        GateDef("ch", 2, 0, _const(controlled(H)), inverse="ch"),
        GateDef("swap", 2, 0, _const(_SWAP), inverse="swap", symmetric=True),
        GateDef("rxx", 2, 1, _pauli_rotation(X), symmetric=True),
        GateDef("ryy", 2, 1, _pauli_rotation(Y), symmetric=True),
        GateDef("rzz", 2, 1, _pauli_rotation(Z), symmetric=True),
        GateDef("crx", 2, 1, lambda t: controlled(rx_matrix(t))),
        GateDef("cry", 2, 1, lambda t: controlled(ry_matrix(t))),
        GateDef("crz", 2, 1, lambda t: controlled(rz_matrix(t))),
        GateDef("cp", 2, 1, lambda lam: np.diag([1, 1, 1, np.exp(1j * lam)]), symmetric=True),
        GateDef("ccx", 3, 0, _const(_ccx()), inverse="ccx"),
        GateDef("cswap", 3, 0, _const(_cswap()), inverse="cswap"),
    ]
}

# Rotations whose angle may be reduced modulo 2*pi without changing more
# than the global phase.
PERIODIC_ROTATIONS = frozenset({"rx", "ry", "rz", "rxx", "ryy", "rzz", "u1", "cp"})


def gate_matrix(name: str, params: Sequence[Param] = ()) -> np.ndarray:
    try:
        gdef = GATES[name]
    except KeyError:
        raise KeyError(f"unknown gate: {name}") from None
    return gdef.matrix(*[to_float(p) for p in params])


@dataclass(frozen=True)
class Instruction:
    kind: str  # "gate" | "barrier" | "measure"
    name: str
    qubits: tuple[int, ...]
    clbits: tuple[int, ...] = ()
    params: tuple[Param, ...] = ()

    @classmethod
    def gate(cls, name: str, qubits: Iterable[int], params: Iterable[Param] = ()) -> "Instruction":
        return cls("gate", name, tuple(qubits), (), tuple(params))

    @classmethod
    def barrier(cls, qubits: Iterable[int]) -> "Instruction":
        return cls("barrier", "barrier", tuple(qubits))

    @classmethod
    def measure(cls, qubit: int, clbit: int) -> "Instruction":
        return cls("measure", "measure", (qubit,), (clbit,))

    @property
    def is_gate(self) -> bool:
        return self.kind == "gate"

    @property
    def is_symbolic(self) -> bool:
        return any(is_symbolic(p) for p in self.params)

    def remap(self, qmap=None, cmap=None) -> "Instruction":
        qubits = self.qubits if qmap is None else tuple(qmap[q] for q in self.qubits)
        clbits = self.clbits if cmap is None else tuple(cmap[c] for c in self.clbits)
        return replace(self, qubits=qubits, clbits=clbits)

    def __str__(self) -> str:
        args = ",".join(f"q{q}" for q in self.qubits)
        if self.kind == "measure":
            return f"measure q{self.qubits[0]} -> c{self.clbits[0]}"
        if self.params:
            ps = ",".join(str(p) if isinstance(p, ParamExpr) else f"{p:.6g}" for p in self.params)
            return f"{self.name}({ps}) {args}"
        return f"{self.name} {args}"


@dataclass
class Circuit:
    qregs: list[tuple[str, int]] = field(default_factory=list)
    cregs: list[tuple[str, int]] = field(default_factory=list)
    instructions: list[Instruction] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, num_qubits: int, num_clbits: int = 0) -> "Circuit":
        qregs = [("q", num_qubits)] if num_qubits else []
        cregs = [("c", num_clbits)] if num_clbits else []
        return cls(qregs, cregs)

    @property
    def num_qubits(self) -> int:
        return sum(size for _, size in self.qregs)

    @property
    def num_clbits(self) -> int:
        return sum(size for _, size in self.cregs)

    def copy(self) -> "Circuit":
        return Circuit(list(self.qregs), list(self.cregs), list(self.instructions), dict(self.metadata))

    def append(self, instr: Instruction) -> "Circuit":
        self.instructions.append(instr)
        return self

    # convenience builders used throughout tests and demos
    def add(self, name: str, *qubits: int, params: Sequence[Param] = ()) -> "Circuit":
        return self.append(Instruction.gate(name, qubits, params))

    def measure(self, qubit: int, clbit: int) -> "Circuit":
        return self.append(Instruction.measure(qubit, clbit))

    def barrier(self, *qubits: int) -> "Circuit":
        return self.append(Instruction.barrier(qubits))

    def gates(self) -> list[Instruction]:
        return [i for i in self.instructions if i.kind == "gate"]

    def count_ops(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for instr in self.instructions:
            out[instr.name] = out.get(instr.name, 0) + 1
        return out

    def used_qubits(self, include_measures: bool = True) -> set[int]:
        used: set[int] = set()
        for instr in self.instructions:
            if instr.kind == "gate" or (include_measures and instr.kind == "measure"):
                used.update(instr.qubits)
        return used

    def validate(self) -> None:
        nq, nc = self.num_qubits, self.num_clbits
        for instr in self.instructions:
            if any(not 0 <= q < nq for q in instr.qubits):
                raise ValueError(f"qubit out of range in {instr}")
            if any(not 0 <= c < nc for c in instr.clbits):
                raise ValueError(f"clbit out of range in {instr}")
            if len(set(instr.qubits)) != len(instr.qubits):
                raise ValueError(f"repeated qubit operand in {instr}")
            if instr.kind == "gate":
                gdef = GATES.get(instr.name)
                if gdef is None:
                    raise ValueError(f"unknown gate: {instr.name}")
                if gdef.num_qubits != len(instr.qubits) or gdef.num_params != len(instr.params):
                    raise ValueError(f"wrong arity for {instr.name}")
            elif instr.kind == "measure" and (len(instr.qubits) != 1 or len(instr.clbits) != 1):
                raise ValueError("measure takes exactly one qubit and one clbit")

    def __len__(self) -> int:
        return len(self.instructions)

    def __str__(self) -> str:
        head = f"Circuit({self.num_qubits} qubits, {self.num_clbits} clbits)"
        return "\n".join([head] + [f"  {i}" for i in self.instructions])
