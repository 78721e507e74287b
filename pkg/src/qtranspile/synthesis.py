"""Single- and two-qubit unitary synthesis.

``decompose_one_qubit_zyz`` writes a 2x2 unitary as ``rz ry rz``.
``decompose_two_qubit_kak`` writes a 4x4 unitary as at most three CNOTs
interleaved with single-qubit rotations, using the canonical (KAK) form
``U = (A1 x A2) exp(i(a XX + b YY + c ZZ)) (B1 x B2)``.

Both return a list of :class:`Instruction` on local qubit indices (0 for
one qubit; 0 and 1 for two, operand 0 being the most significant bit of
the input matrix).  Results are exact up to global phase.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .circuit import H, I2, X, Y, Z, Instruction, rx_matrix, ry_matrix, rz_matrix

ANGLE_EPS = 1e-10
CLASS_TOL = 1e-9

GateSequence = list[Instruction]


class SynthesisError(ValueError):
    pass


def _check_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (dim, dim):
        raise SynthesisError(f"expected a {dim}x{dim} matrix, got shape {u.shape}")
    if not np.allclose(u.conj().T @ u, np.eye(dim), atol=1e-8):
        raise SynthesisError("matrix is not unitary")
    return u


def zyz_angles(u: np.ndarray) -> tuple[float, float, float, float]:
    """Angles ``(alpha, beta, gamma, phase)`` with
    ``u = exp(i*phase) * Rz(alpha) @ Ry(beta) @ Rz(gamma)``."""
    u = _check_unitary(u, 2)
    det = np.linalg.det(u)
    phase = np.angle(det) / 2
    v = u * np.exp(-1j * phase)
    a, b = v[0, 0], v[1, 0]
    beta = 2 * math.atan2(abs(b), abs(a))
    arg_a = np.angle(a) if abs(a) > 1e-12 else 0.0
    arg_b = np.angle(b) if abs(b) > 1e-12 else 0.0
    alpha = arg_b - arg_a
    gamma = -arg_a - arg_b
    return float(alpha), float(beta), float(gamma), float(phase)


def _wrap(t: float) -> float:
    t = math.fmod(t, 2 * math.pi)
    if t <= -math.pi:
        t += 2 * math.pi
    elif t > math.pi:
        t -= 2 * math.pi
    return t


def decompose_one_qubit_zyz(u: np.ndarray, qubit: int = 0, simplify: bool = True) -> GateSequence:
    """``rz(gamma) ry(beta) rz(alpha)`` in circuit order.  With ``simplify``,
    rotations whose wrapped angle is below 1e-10 are dropped."""
    alpha, beta, gamma, _ = zyz_angles(u)
    seq = [
        Instruction.gate("rz", (qubit,), (_wrap(gamma),)),
        Instruction.gate("ry", (qubit,), (_wrap(beta),)),
        Instruction.gate("rz", (qubit,), (_wrap(alpha),)),
    ]
    if simplify:
        seq = [g for g in seq if abs(g.params[0]) > ANGLE_EPS]
    return seq


# --- two-qubit -----------------------------------------------------------

MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / math.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

_XX, _YY, _ZZ = np.kron(X, X), np.kron(Y, Y), np.kron(Z, Z)
_S = np.diag([1, 1j])
CX01 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CX10 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)

# Each of XX, YY, ZZ is diagonal in the magic basis; rows of this matrix
# give the eigenphase pattern (1, xx, yy, zz) used to read off (a, b, c).
_PATTERN = np.array(
    [np.ones(4)] + [np.real(np.diag(MAGIC_DAG @ p @ MAGIC)) for p in (_XX, _YY, _ZZ)]
).T


def interaction(a: float, b: float, c: float) -> np.ndarray:
    """exp(i(a XX + b YY + c ZZ))."""
    diag = np.exp(1j * (_PATTERN[:, 1:] @ np.array([a, b, c])))
    return MAGIC @ np.diag(diag) @ MAGIC_DAG


def kron_factor(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``m = A (x) B`` into unitary factors (global phase dropped)."""
    t = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(t)
    a = u[:, 0].reshape(2, 2) * math.sqrt(s[0])
    b = vh[0].reshape(2, 2) * math.sqrt(s[0])
    a = a / np.sqrt(np.linalg.det(a))
    b = b / np.sqrt(np.linalg.det(b))
    return a, b


def _orthogonal_diagonalizer(m: np.ndarray) -> np.ndarray:
    """Real orthogonal P (det +1) with P.T @ m @ P diagonal, for a complex
    symmetric unitary ``m``."""
    re, im = m.real, m.imag
    rng = np.random.default_rng(1234)
    for _ in range(100):
        w = rng.uniform(0.1, 1.0)
        _, p = np.linalg.eigh(w * re + (1 - w) * im)
        d = p.T @ m @ p
        if np.allclose(d, np.diag(np.diag(d)), atol=1e-10):
            if np.linalg.det(p) < 0:
                p[:, 0] = -p[:, 0]
            return p
    raise SynthesisError("failed to diagonalize the canonical form")


def kak_decompose(u: np.ndarray) -> tuple[np.ndarray, tuple[float, float, float], np.ndarray, float]:
    """``u = exp(i*phase) * left @ interaction(a, b, c) @ right`` with
    ``left``/``right`` local (tensor products of single-qubit unitaries)."""
    u = _check_unitary(u, 4)
    det = np.linalg.det(u)
    su = u / det ** 0.25
    up = MAGIC_DAG @ su @ MAGIC
    p = _orthogonal_diagonalizer(up.T @ up)
    d = np.diag(p.T @ (up.T @ up) @ p)
    theta = np.angle(d) / 2
    k1 = up @ p @ np.diag(np.exp(-1j * theta))
    if np.linalg.det(k1.real) < 0:
        theta[0] += math.pi
        k1[:, 0] = -k1[:, 0]
    coeffs = np.linalg.solve(_PATTERN, theta)
    phase_extra, a, b, c = coeffs
    left = MAGIC @ k1.real @ MAGIC_DAG
    right = MAGIC @ p.T @ MAGIC_DAG
    phase = float(np.angle(det) / 4 + phase_extra)
    return left, (float(a), float(b), float(c)), right, phase


def _reduce(x: float) -> tuple[float, int]:
    """x = y + m*pi/2 with y in (-pi/4, pi/4]; snaps -pi/4 to +pi/4."""
    m = round(x / (math.pi / 2))
    y = x - m * math.pi / 2
    if y <= -math.pi / 4 + CLASS_TOL:
        y += math.pi / 2
        m -= 1
    return y, m


def _pauli_power(pp: np.ndarray, m: int) -> np.ndarray:
    return np.linalg.matrix_power(1j * pp, m % 4)


def _emit(items, out_qubits=(0, 1)) -> GateSequence:
    """Turn a time-ordered list of ('u', qubit, 2x2) and ('cx', ctrl, tgt)
    items into gates, merging consecutive single-qubit matrices."""
    pending: dict[int, Optional[np.ndarray]] = {0: None, 1: None}
    seq: GateSequence = []

    def flush(q: int) -> None:
        if pending[q] is not None:
            seq.extend(decompose_one_qubit_zyz(pending[q], out_qubits[q]))
            pending[q] = None

    for item in items:
        if item[0] == "u":
            _, q, m = item
            pending[q] = m if pending[q] is None else m @ pending[q]
        else:
            _, ctrl, tgt = item
            flush(0)
            flush(1)
            seq.append(Instruction.gate("cx", (out_qubits[ctrl], out_qubits[tgt])))
    flush(0)
    flush(1)
    return seq


def _local(m: np.ndarray) -> list:
    a, b = kron_factor(m)
    return [("u", 0, a), ("u", 1, b)]


_G_XX_TO_YY = np.kron(_S, _S)
_G_ZZ_TO_YY = np.kron(rx_matrix(math.pi / 2), rx_matrix(math.pi / 2))
_HH = np.kron(H, H)
_SH = _S @ H
_SHSH = np.kron(_SH, _SH)
_IH = np.kron(I2, H)


def decompose_two_qubit_kak(u: np.ndarray, verify: bool = True) -> GateSequence:
    """Synthesize a two-qubit unitary with the minimum CNOT count among
    0 (local), 1 (CNOT class), 2 (one vanishing coefficient) and 3."""
    left, (a, b, c), right, _ = kak_decompose(u)
    (a, ma), (b, mb), (c, mc) = _reduce(a), _reduce(b), _reduce(c)
    right = _pauli_power(_XX, ma) @ _pauli_power(_YY, mb) @ _pauli_power(_ZZ, mc) @ right
    coeffs = [a, b, c]
    small = [abs(x) < CLASS_TOL for x in coeffs]
    quarter = [abs(x - math.pi / 4) < CLASS_TOL for x in coeffs]

    if all(small):
        items = _local(left @ right)
    elif sum(small) == 2 and sum(quarter) == 1:
        k = quarter.index(True)
        conj = [_HH, _SHSH, np.eye(4)][k]  # maps ZZ onto the active Pauli pair
        rz_half = rz_matrix(-math.pi / 2)
        items = (
            _local(_IH @ np.kron(rz_half, rz_half) @ conj.conj().T @ right)
            + [("cx", 0, 1)]
            + _local(left @ conj @ _IH)
        )
    elif any(small):
        k = small.index(True)
        if k == 1:
            g, (alpha, gamma) = np.eye(4), (a, c)
        elif k == 0:
            g, (alpha, gamma) = _G_XX_TO_YY, (b, c)
        else:
            g, (alpha, gamma) = _G_ZZ_TO_YY, (a, b)
        items = (
            _local(g.conj().T @ right)
            + [("cx", 0, 1), ("u", 0, rx_matrix(-2 * alpha)), ("u", 1, rz_matrix(-2 * gamma)), ("cx", 0, 1)]
            + _local(left @ g)
        )
    else:
        items = (
            _local(np.kron(rz_matrix(-math.pi / 2), I2) @ right)
            + [("cx", 1, 0), ("u", 1, ry_matrix(math.pi / 2 - 2 * b)), ("cx", 0, 1)]
            + [("u", 0, rz_matrix(math.pi / 2 - 2 * c)), ("u", 1, ry_matrix(2 * a - math.pi / 2))]
            + [("cx", 1, 0)]
            + _local(left @ np.kron(I2, rz_matrix(math.pi / 2)))
        )
    seq = _emit(items)
    if verify:
        err = phase_aligned_error(u, sequence_matrix(seq, 2))
        if err > 1e-6:
            raise SynthesisError(f"two-qubit synthesis failed (error {err:.2e})")
    return seq


def sequence_matrix(seq: GateSequence, num_qubits: int) -> np.ndarray:
    """Matrix of a gate sequence on local qubits, operand-0-most-significant
    convention over qubits (0, 1, ...)."""
    from .circuit import gate_matrix

    dim = 2 ** num_qubits
    total = np.eye(dim, dtype=complex)
    for g in seq:
        m = gate_matrix(g.name, g.params)
        total = _embed(m, g.qubits, num_qubits) @ total
    return total


def _embed(m: np.ndarray, qubits, n: int) -> np.ndarray:
    """Embed a gate into n qubits where qubit 0 is the most significant bit."""
    k = len(qubits)
    full = np.zeros((2 ** n, 2 ** n), dtype=complex)
    others = [q for q in range(n) if q not in qubits]
    for i in range(2 ** n):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        sub_i = 0
        for q in qubits:
            sub_i = sub_i * 2 + bits[q]
        for sub_j in range(2 ** k):
            jbits = list(bits)
            for pos, q in enumerate(qubits):
                jbits[q] = (sub_j >> (k - 1 - pos)) & 1
            j = 0
            for q in range(n):
                j = j * 2 + jbits[q]
            full[i, j] = m[sub_i, sub_j]
    del others
    return full


def phase_aligned_error(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of ``a - e^{i phi} b`` minimized over the phase."""
    inner = np.vdot(b, a)
    phase = inner / abs(inner) if abs(inner) > 1e-15 else 1.0
    return float(np.linalg.norm(a - phase * b))


def cnot_count(seq: GateSequence) -> int:
    return sum(1 for g in seq if g.name == "cx")
