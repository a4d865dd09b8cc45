"""
Ancilla-free synthesis of diagonal unitaries exp(i f) from Walsh series.

A phase function sampled on N = 2^n grid points is expanded as
f_j = sum_i a_i w_ij. Each Walsh function w_i is the diagonal of a tensor
product of Z and I, with Z on the qubits given by the set bits of the Paley
index i (bit k of i <-> qubit k, which is the "reversed binary string" rule
once qubit 0 is the most significant bit of j). exp(i a_i w_i) is then a
CNOT parity chain, one RZ(-2 a_i) and the mirrored chain. Terms are visited
in Gray-code order so adjacent chains share CNOTs that cancel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevector import Circuit

ORDERINGS = ("sequency-gray", "natural")


@dataclass(frozen=True)
class PhaseFunction:
    n_qubits: int
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).reshape(-1)
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if s.size != 2 ** self.n_qubits:
            raise ValueError(f"expected {2 ** self.n_qubits} samples, got {s.size}")
        if not np.all(np.isfinite(s)):
            raise ValueError("phase samples must be finite")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_samples(cls, samples) -> PhaseFunction:
        s = np.asarray(samples, dtype=float).reshape(-1)
        n = s.size.bit_length() - 1
        if s.size < 2 or 2 ** n != s.size:
            raise ValueError(f"sample count {s.size} is not a power of two >= 2")
        return cls(n, s)


@dataclass(frozen=True)
class WalshSpectrum:
    n_qubits: int
    coefficients: np.ndarray

    def expand(self) -> np.ndarray:
        """Inverse transform: f_j = sum_i a_i w_ij."""
        return walsh_matrix(self.n_qubits).T @ self.coefficients


@dataclass(frozen=True)
class SynthesisOptions:
    truncation_threshold: float = 0.0
    ordering: str = "sequency-gray"

    def __post_init__(self):
        t = self.truncation_threshold
        if not np.isfinite(t) or t < 0:
            raise ValueError("truncation_threshold must be finite and non-negative")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")


def _check_index(i: int, n: int, name: str) -> None:
    if not 0 <= i < 2 ** n:
        raise ValueError(f"{name}={i} out of range for {n} qubits")


def bit_reverse(value: int, n_bits: int) -> int:
    out = 0
    for _ in range(n_bits):
        out = (out << 1) | (value & 1)
        value >>= 1
    return out


def walsh_value(i: int, j: int, n_qubits: int) -> int:
    """w_ij in {+1, -1}: parity of bits shared by i and bit-reversed j."""
    _check_index(i, n_qubits, "i")
    _check_index(j, n_qubits, "j")
    return -1 if bin(i & bit_reverse(j, n_qubits)).count("1") % 2 else 1


def walsh_matrix(n_qubits: int) -> np.ndarray:
    """Paley-ordered N x N Walsh matrix, rows indexed by i."""
    dim = 2 ** n_qubits
    return np.array(
        [[walsh_value(i, j, n_qubits) for j in range(dim)] for i in range(dim)], dtype=float
    )


def _fwht(values: np.ndarray) -> np.ndarray:
    out = values.astype(float).copy()
    h = 1
    while h < out.size:
        for start in range(0, out.size, 2 * h):
            a = out[start:start + h].copy()
            b = out[start + h:start + 2 * h].copy()
            out[start:start + h] = a + b
            out[start + h:start + 2 * h] = a - b
        h *= 2
    return out


def walsh_transform(f) -> WalshSpectrum:
    """a_i = (1/N) sum_j f_j w_ij, via a fast Walsh-Hadamard butterfly."""
    if not isinstance(f, PhaseFunction):
        f = PhaseFunction.from_samples(f)
    n, dim = f.n_qubits, f.samples.size
    perm = [bit_reverse(k, n) for k in range(dim)]
    return WalshSpectrum(n, _fwht(f.samples[perm]) / dim)


def walsh_operator_mask(i: int, n_qubits: int) -> frozenset[int]:
    """Qubits carrying Z in the Walsh operator of Paley index i."""
    _check_index(i, n_qubits, "i")
    return frozenset(q for q in range(n_qubits) if (i >> q) & 1)


def gray_rank(i: int) -> int:
    """Position of i in the binary-reflected Gray sequence (inverse Gray code)."""
    r = 0
    while i:
        r ^= i
        i >>= 1
    return r


def gray_order(indices) -> list[int]:
    """Order Paley indices so neighbours differ in as few bits as possible.

    Greedy nearest neighbour with ties broken by Gray rank; on the full set
    [1, 2^n) this is exactly the binary-reflected Gray code without 0.
    """
    remaining = sorted(set(int(i) for i in indices), key=gray_rank)
    if not remaining:
        return []
    if remaining[0] < 1:
        raise ValueError("Paley indices for gray_order must be >= 1")
    order = [remaining.pop(0)]
    while remaining:
        cur = order[-1]
        best = min(
            range(len(remaining)),
            key=lambda k: (bin(cur ^ remaining[k]).count("1"), gray_rank(remaining[k])),
        )
        order.append(remaining.pop(best))
    return order


def _parity_controls(mask: frozenset[int]) -> tuple[int, frozenset[int]]:
    target = max(mask)
    return target, mask - {target}


def synthesize_diagonal(f, opts: SynthesisOptions | None = None) -> Circuit:
    """Circuit whose matrix is diag(exp(i f_j)), including the global phase a_0."""
    opts = opts or SynthesisOptions()
    if not isinstance(f, PhaseFunction):
        f = PhaseFunction.from_samples(f)
    n = f.n_qubits
    a = walsh_transform(f).coefficients
    keep = [i for i in range(1, a.size) if abs(a[i]) > opts.truncation_threshold]
    if opts.ordering == "sequency-gray":
        keep = gray_order(keep)

    circuit = Circuit(n)
    if a[0] != 0.0:
        circuit.gphase(a[0])

    # CNOTs sharing a target commute, so the uncompute block of one term and
    # the compute block of the next reduce to their symmetric difference.
    pending_target, pending = None, frozenset()
    for i in keep:
        target, controls = _parity_controls(walsh_operator_mask(i, n))
        if target == pending_target:
            block = pending ^ controls
        else:
            for c in sorted(pending):
                circuit.cx(c, pending_target)
            block = controls
        for c in sorted(block):
            circuit.cx(c, target)
        circuit.rz(target, -2.0 * a[i])
        pending_target, pending = target, controls
    for c in sorted(pending):
        circuit.cx(c, pending_target)
    return circuit


def naive_cnot_count(indices, n_qubits: int) -> int:
    """CNOTs used by independent compute/uncompute chains for each index."""
    return sum(2 * (len(walsh_operator_mask(i, n_qubits)) - 1) for i in indices if i)


def truncation_error_bound(f, threshold: float) -> float:
    """Sum of |a_i| over the terms a given threshold would drop (phase-error bound)."""
    a = walsh_transform(f).coefficients
    return float(sum(abs(a[i]) for i in range(1, a.size) if abs(a[i]) <= threshold))
