"""
Dense-matrix ground truth.

Everything here is built from full 2^n x 2^n matrices (Kronecker products,
explicit permutations, eigendecompositions). Nothing is shared with the
state-vector kernels, so comparisons between the two are independent checks.
"""
from __future__ import annotations

import numpy as np

from .statevector import Circuit, GateOp, StateVector

MAX_QUBITS = 10
HERMITIAN_TOL = 1e-10

_I2 = np.eye(2, dtype=complex)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def _single(n: int, q: int, m: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for k in range(n):
        out = np.kron(out, m if k == q else _I2)
    return out


def _permutation(n: int, fn) -> np.ndarray:
    """Matrix sending |b> to |fn(b)> where b is the MSB-first bit tuple."""
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - k)) & 1 for k in range(n)]
        new = fn(bits)
        row = int("".join(map(str, new)), 2)
        out[row, col] = 1.0
    return out


def gate_matrix(gate: GateOp, n: int) -> np.ndarray:
    kind, qs, a = gate.kind, gate.qubits, gate.angle
    if kind == "GPHASE":
        return np.exp(1j * a) * np.eye(2 ** n, dtype=complex)
    if kind == "H":
        return _single(n, qs[0], np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2))
    if kind == "X":
        return _single(n, qs[0], np.array([[0, 1], [1, 0]], dtype=complex))
    if kind == "RZ":
        return _single(n, qs[0], np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)]))
    if kind == "P":
        return _single(n, qs[0], np.diag([1.0, np.exp(1j * a)]))
    if kind == "CP":
        d = np.ones(2 ** n, dtype=complex)
        for idx in range(2 ** n):
            if (idx >> (n - 1 - qs[0])) & 1 and (idx >> (n - 1 - qs[1])) & 1:
                d[idx] = np.exp(1j * a)
        return np.diag(d)
    if kind == "CX":
        c, t = qs
        # |0><0|_c (x) I + |1><1|_c (x) X_t
        return _single(n, c, _P0) + _single(n, c, _P1) @ _single(
            n, t, np.array([[0, 1], [1, 0]], dtype=complex)
        )
    if kind == "SWAP":
        q1, q2 = qs

        def fn(bits):
            bits = list(bits)
            bits[q1], bits[q2] = bits[q2], bits[q1]
            return bits

        return _permutation(n, fn)
    raise ValueError(kind)


def circuit_matrix(circuit: Circuit) -> np.ndarray:
    n = circuit.n_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"circuit_matrix supports at most {MAX_QUBITS} qubits, got {n}")
    m = np.eye(2 ** n, dtype=complex)
    for g in circuit.gates:
        m = gate_matrix(g, n) @ m
    return m


def exp_diagonal(values, scale: float) -> np.ndarray:
    """diag(exp(i * scale * values)); accepts a DiagonalOperator or a sequence."""
    vals = np.asarray(getattr(values, "values", values), dtype=float)
    return np.diag(np.exp(1j * scale * vals))


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    if np.abs(h - h.conj().T).max() > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    return h


def exact_propagator(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) via eigendecomposition."""
    h = _check_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def eigensystem(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted eigenvalues and eigenvectors (columns) of a Hermitian matrix."""
    return np.linalg.eigh(_check_hermitian(h))


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    return vec * (abs(vec[k]) / vec[k])


def ground_state(h: np.ndarray) -> tuple[StateVector, float]:
    """Lowest eigenpair; the largest-magnitude amplitude is made real positive."""
    w, v = eigensystem(h)
    vec = _fix_phase(v[:, 0])
    return StateVector(vec / np.linalg.norm(vec)), float(w[0])


def dft_matrix(n_qubits: int) -> np.ndarray:
    """Unitary DFT, F[k, l] = exp(2 pi i k l / N) / sqrt(N)."""
    dim = 2 ** n_qubits
    k = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim)


def kinetic_matrix(kinetic_values) -> np.ndarray:
    """Position-basis kinetic operator F diag(T) F^dagger; T in signed-frequency order."""
    t = np.asarray(getattr(kinetic_values, "values", kinetic_values), dtype=float)
    f = dft_matrix(t.size.bit_length() - 1)
    return f @ np.diag(t) @ f.conj().T


def molecular_hamiltonian(potential, kinetic, dipole=None, field: float = 0.0) -> np.ndarray:
    """V + F diag(T) F^dagger - x * field as a dense Hermitian matrix."""
    v = np.asarray(getattr(potential, "values", potential), dtype=float)
    h = np.diag(v).astype(complex) + kinetic_matrix(kinetic)
    if dipole is not None and field:
        x = np.asarray(getattr(dipole, "values", dipole), dtype=float)
        h = h - field * np.diag(x)
    return 0.5 * (h + h.conj().T)


def split_step_matrix(potential, kinetic, dipole, field: float, dt: float) -> np.ndarray:
    """Five-factor symmetric split: V(dt/2) E(dt/2) F T(dt) F^dagger E(dt/2) V(dt/2).

    The field factor is exp(+i x field dt / 2), i.e. exp(-i E dt/2) with E = -x * field.
    """
    v = np.asarray(getattr(potential, "values", potential), dtype=float)
    t = np.asarray(getattr(kinetic, "values", kinetic), dtype=float)
    x = np.asarray(getattr(dipole, "values", dipole), dtype=float)
    f = dft_matrix(v.size.bit_length() - 1)
    vh = exp_diagonal(v, -dt / 2)
    eh = exp_diagonal(x, field * dt / 2)
    kin = f @ exp_diagonal(t, -dt) @ f.conj().T
    return vh @ eh @ kin @ eh @ vh


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() < tol)
