"""Quantum Fourier transform circuits and the momentum grid they induce."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .statevector import Circuit
from .walsh import bit_reverse

FREQUENCY_ORDERINGS = ("centered", "natural")


@dataclass(frozen=True)
class QftConvention:
    """How the transform is built and how its output index maps to momentum.

    forward is the DFT with kernel exp(+2 pi i k l / N). Without the final
    swaps the output register is bit-reversed. ``centered`` puts the negative
    frequencies in the upper half of the register (k = 0, 1, ..., N/2,
    -N/2+1, ..., -1); ``natural`` reads the register as unsigned k = 0..N-1.
    """

    direction: str = "forward"
    include_final_swaps: bool = True
    frequency_ordering: str = "centered"

    def __post_init__(self):
        if self.direction not in ("forward", "inverse"):
            raise ValueError("direction must be 'forward' or 'inverse'")
        if self.frequency_ordering not in FREQUENCY_ORDERINGS:
            raise ValueError(f"frequency_ordering must be one of {FREQUENCY_ORDERINGS}")

    def inverted(self) -> QftConvention:
        return QftConvention(
            "inverse" if self.direction == "forward" else "forward",
            self.include_final_swaps,
            self.frequency_ordering,
        )


def qft_circuit(n_qubits: int, conv: QftConvention | None = None) -> Circuit:
    conv = conv or QftConvention()
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    c = Circuit(n_qubits)
    for q in range(n_qubits):
        c.h(q)
        for j in range(q + 1, n_qubits):
            c.cp(j, q, math.pi / 2 ** (j - q))
    if conv.include_final_swaps:
        for q in range(n_qubits // 2):
            c.swap(q, n_qubits - 1 - q)
    return c if conv.direction == "forward" else c.inverse()


def frequency_indices(n_qubits: int, ordering: str = "centered") -> np.ndarray:
    dim = 2 ** n_qubits
    k = np.arange(dim)
    if ordering == "centered":
        return np.where(k <= dim // 2, k, k - dim)
    if ordering == "natural":
        return k
    raise ValueError(f"unknown frequency ordering {ordering!r}")


def momentum_grid(n_qubits: int, dx: float, ordering: str = "centered") -> np.ndarray:
    """p_l = 2 pi k_l / (N dx) for each register index l."""
    if not dx > 0:
        raise ValueError("grid spacing must be positive")
    return 2 * np.pi * frequency_indices(n_qubits, ordering) / (2 ** n_qubits * dx)


def register_order(values, conv: QftConvention) -> np.ndarray:
    """Rearrange a frequency-indexed diagonal for the kinetic block built under ``conv``.

    With final swaps the block is QFT . diag . QFT^-1 and no rearrangement is
    needed. Without them the block becomes Q^-1 . diag . Q with Q the
    swap-free forward circuit, and entry r must hold frequency -bitrev(r).
    """
    v = np.asarray(values)
    if conv.include_final_swaps:
        return v.copy()
    n = v.size.bit_length() - 1
    return v[[(-bit_reverse(r, n)) % v.size for r in range(v.size)]]


def kinetic_block(n_qubits: int, conv: QftConvention) -> tuple[Circuit, Circuit]:
    """(into-momentum, back-to-position) circuits sandwiching a momentum diagonal."""
    fwd = qft_circuit(n_qubits, QftConvention("forward", conv.include_final_swaps))
    if conv.include_final_swaps:
        return fwd.inverse(), fwd
    return fwd, fwd.inverse()
