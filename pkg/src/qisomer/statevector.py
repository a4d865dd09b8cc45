"""
Dense state-vector simulator.

Basis convention: qubit 0 is the most significant bit of the basis index,
so on three qubits |010> is index 2 and |100> is index 4.

Gate kernels work on a (2,)*n view of the amplitude array and never build
2^n x 2^n matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-10

# kind -> (number of qubits, takes an angle)
GATE_KINDS = {
    "H": (1, False),
    "X": (1, False),
    "RZ": (1, True),
    "P": (1, True),
    "CX": (2, False),
    "CP": (2, True),
    "SWAP": (2, False),
    "GPHASE": (0, True),
}

_SELF_INVERSE = {"H", "X", "CX", "SWAP"}


@dataclass(frozen=True)
class GateOp:
    """One gate: a kind from ``GATE_KINDS``, its qubits, and an optional angle in radians.

    RZ(q, t) is exp(-i Z t / 2); P(q, phi) is diag(1, e^{i phi});
    CP(a, b, phi) puts e^{i phi} on |11>; GPHASE(phi) multiplies every amplitude by e^{i phi}.
    """

    kind: str
    qubits: tuple[int, ...] = ()
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        nq, has_angle = GATE_KINDS[self.kind]
        if len(self.qubits) != nq:
            raise ValueError(f"{self.kind} acts on {nq} qubit(s), got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self}")
        if nq == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind} needs two distinct qubits, got {self.qubits}")
        if has_angle:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def inverse(self) -> GateOp:
        if self.kind in _SELF_INVERSE:
            return self
        return GateOp(self.kind, self.qubits, -self.angle)


@dataclass
class Circuit:
    """Ordered gate list on ``n_qubits`` qubits. Builder methods return ``self``."""

    n_qubits: int
    gates: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        gates, self.gates = list(self.gates), []
        for g in gates:
            self.append(g)

    def append(self, gate: GateOp) -> Circuit:
        for q in gate.qubits:
            if q >= self.n_qubits:
                raise ValueError(f"qubit {q} out of range for {self.n_qubits}-qubit circuit")
        self.gates.append(gate)
        return self

    def extend(self, other: Circuit | list[GateOp]) -> Circuit:
        if isinstance(other, Circuit):
            if other.n_qubits != self.n_qubits:
                raise ValueError("qubit-count mismatch when extending circuit")
            other = other.gates
        for g in other:
            self.append(g)
        return self

    def h(self, q):
        return self.append(GateOp("H", (q,)))

    def x(self, q):
        return self.append(GateOp("X", (q,)))

    def rz(self, q, theta):
        return self.append(GateOp("RZ", (q,), float(theta)))

    def p(self, q, phi):
        return self.append(GateOp("P", (q,), float(phi)))

    def cx(self, control, target):
        return self.append(GateOp("CX", (control, target)))

    def cp(self, q1, q2, phi):
        return self.append(GateOp("CP", (q1, q2), float(phi)))

    def swap(self, q1, q2):
        return self.append(GateOp("SWAP", (q1, q2)))

    def gphase(self, phi):
        return self.append(GateOp("GPHASE", (), float(phi)))

    def inverse(self) -> Circuit:
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)])

    def count_ops(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.gates:
            counts[g.kind] = counts.get(g.kind, 0) + 1
        return counts

    def __len__(self):
        return len(self.gates)


class StateVector:
    """2^n complex amplitudes, normalized to within ``NORM_TOL``."""

    def __init__(self, amplitudes, n_qubits: int | None = None):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        size = amps.size
        if size < 2 or size & (size - 1):
            raise ValueError(f"amplitude count {size} is not a power of two >= 2")
        n = size.bit_length() - 1
        if n_qubits is not None and n_qubits != n:
            raise ValueError(f"expected {2 ** n_qubits} amplitudes, got {size}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        self.n_qubits = n
        self.amplitudes = amps

    def copy(self) -> StateVector:
        out = object.__new__(StateVector)
        out.n_qubits = self.n_qubits
        out.amplitudes = self.amplitudes.copy()
        return out

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def __len__(self):
        return self.amplitudes.size

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits}, amplitudes={self.amplitudes!r})"


def new_basis_state(n_qubits: int, index: int) -> StateVector:
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if not 0 <= index < 2 ** n_qubits:
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(amps)


def basis_label(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def _sl(n, assign):
    idx = [slice(None)] * n
    for q, v in assign.items():
        idx[q] = v
    return tuple(idx)


def _apply_inplace(psi: np.ndarray, n: int, gate: GateOp) -> None:
    """Apply ``gate`` to ``psi`` viewed as shape (2,)*n, in place."""
    kind, qs, a = gate.kind, gate.qubits, gate.angle
    if kind == "GPHASE":
        psi *= np.exp(1j * a)
    elif kind == "H":
        s0, s1 = _sl(n, {qs[0]: 0}), _sl(n, {qs[0]: 1})
        lo = psi[s0].copy()
        hi = psi[s1]
        psi[s0] = (lo + hi) / math.sqrt(2)
        psi[s1] = (lo - hi) / math.sqrt(2)
    elif kind == "X":
        s0, s1 = _sl(n, {qs[0]: 0}), _sl(n, {qs[0]: 1})
        lo = psi[s0].copy()
        psi[s0] = psi[s1]
        psi[s1] = lo
    elif kind == "RZ":
        psi[_sl(n, {qs[0]: 0})] *= np.exp(-0.5j * a)
        psi[_sl(n, {qs[0]: 1})] *= np.exp(0.5j * a)
    elif kind == "P":
        psi[_sl(n, {qs[0]: 1})] *= np.exp(1j * a)
    elif kind == "CX":
        c, t = qs
        s0, s1 = _sl(n, {c: 1, t: 0}), _sl(n, {c: 1, t: 1})
        lo = psi[s0].copy()
        psi[s0] = psi[s1]
        psi[s1] = lo
    elif kind == "CP":
        psi[_sl(n, {qs[0]: 1, qs[1]: 1})] *= np.exp(1j * a)
    elif kind == "SWAP":
        s01, s10 = _sl(n, {qs[0]: 0, qs[1]: 1}), _sl(n, {qs[0]: 1, qs[1]: 0})
        lo = psi[s01].copy()
        psi[s01] = psi[s10]
        psi[s10] = lo
    else:  # pragma: no cover - GateOp validates kinds
        raise ValueError(kind)


def _check_gate(gate: GateOp, n: int) -> None:
    for q in gate.qubits:
        if q >= n:
            raise ValueError(f"gate {gate.kind} uses qubit {q}, state has {n} qubits")


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Return a new state with ``gate`` applied."""
    _check_gate(gate, state.n_qubits)
    out = state.copy()
    _apply_inplace(out.amplitudes.reshape((2,) * out.n_qubits), out.n_qubits, gate)
    return out


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Return a new state with every gate of ``circuit`` applied in list order."""
    if circuit.n_qubits != state.n_qubits:
        raise ValueError(
            f"circuit has {circuit.n_qubits} qubits, state has {state.n_qubits}"
        )
    out = state.copy()
    view = out.amplitudes.reshape((2,) * out.n_qubits)
    for g in circuit.gates:
        _apply_inplace(view, out.n_qubits, g)
    return out


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def sample_counts(state: StateVector, shots: int, seed: int) -> dict[int, int]:
    """Multinomial shot histogram over basis indices; zero counts are omitted."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = probabilities(state)
    p = p / p.sum()
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return {int(i): int(c) for i, c in enumerate(counts) if c}


# ---------------------------------------------------------------------------
# plain-text circuit format: "KIND q[,q2][,angle]" per line
# ---------------------------------------------------------------------------

def _fmt_angle(a: float) -> str:
    return f"{a:.12f}"


def circuit_to_text(circuit: Circuit) -> str:
    lines = [f"# qubits {circuit.n_qubits}"]
    for g in circuit.gates:
        fields = [str(q) for q in g.qubits]
        if g.angle is not None:
            fields.append(_fmt_angle(g.angle))
        lines.append(f"{g.kind} {','.join(fields)}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str, n_qubits: int | None = None) -> Circuit:
    gates = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "qubits":
                declared = int(parts[1])
            continue
        kind, _, rest = line.partition(" ")
        kind = kind.upper()
        if kind not in GATE_KINDS:
            raise ValueError(f"line {lineno}: unknown gate {kind!r}")
        nq, has_angle = GATE_KINDS[kind]
        fields = [f for f in rest.replace(" ", "").split(",") if f]
        if len(fields) != nq + int(has_angle):
            raise ValueError(f"line {lineno}: {kind} expects {nq + int(has_angle)} field(s)")
        try:
            qubits = tuple(int(f) for f in fields[:nq])
            angle = float(fields[nq]) if has_angle else None
            gates.append(GateOp(kind, qubits, angle))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    n = n_qubits if n_qubits is not None else declared
    if n is None:
        n = max((q for g in gates for q in g.qubits), default=0) + 1
    return Circuit(n, gates)
