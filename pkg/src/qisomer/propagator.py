"""
Second-order split-operator propagation as gate circuits.

One step over [t, t + dt] is

    V(dt/2) E(dt/2) QFT T(dt) QFT^-1 E(dt/2) V(dt/2)

(operator order, so QFT^-1 acts on the state before T) with V(s) = exp(-i V s), T(s) = exp(-i T s) and E(s) = exp(+i x eps s), the
field eps frozen at the step midpoint. Every diagonal factor is compiled by
the Walsh synthesizer, so at zero truncation the circuit equals the product
of exact exponentials.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .model import MolecularModel, PulseEnvelope, field_at
from .qft import QftConvention, kinetic_block, register_order
from .statevector import (
    NORM_TOL,
    Circuit,
    StateVector,
    apply_circuit,
    basis_label,
    probabilities,
)
from .walsh import SynthesisOptions, synthesize_diagonal

FIELD_SAMPLES = ("midpoint", "left")


@dataclass(frozen=True)
class TrotterConfig:
    dt: float
    n_steps: int
    field_sample: str = "midpoint"
    synthesis: SynthesisOptions = field(default_factory=SynthesisOptions)
    qft: QftConvention = field(default_factory=QftConvention)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.field_sample not in FIELD_SAMPLES:
            raise ValueError(f"field_sample must be one of {FIELD_SAMPLES}")

    def field_time(self, t: float) -> float:
        return t + 0.5 * self.dt if self.field_sample == "midpoint" else t


@dataclass(frozen=True)
class StepCircuitSpec:
    """Phase functions of the five factors of one symmetric step."""

    potential_phase: np.ndarray  # -V dt/2
    field_phase: np.ndarray  # +x eps dt/2
    kinetic_phase: np.ndarray  # -T dt, register order

    @classmethod
    def build(cls, model: MolecularModel, eps: float, dt: float, qft: QftConvention):
        return cls(
            -model.potential.values * dt / 2,
            model.dipole.values * eps * dt / 2,
            register_order(-model.kinetic.values * dt, qft),
        )

    def factors(self) -> list[tuple[str, np.ndarray | None]]:
        """Factors in application order; the basis changes carry no phase."""
        return [
            ("V/2", self.potential_phase),
            ("E/2", self.field_phase),
            ("to-momentum", None),
            ("T", self.kinetic_phase),
            ("to-position", None),
            ("E/2", self.field_phase),
            ("V/2", self.potential_phase),
        ]


def step_factor_circuits(
    model: MolecularModel,
    eps: float,
    dt: float,
    synthesis: SynthesisOptions | None = None,
    qft: QftConvention | None = None,
) -> list[tuple[str, Circuit]]:
    """One circuit per factor, in application order. dt may be negative."""
    synthesis = synthesis or SynthesisOptions()
    qft = qft or QftConvention()
    into, back = kinetic_block(model.n_qubits, qft)
    out = []
    for label, phase in StepCircuitSpec.build(model, eps, dt, qft).factors():
        if label == "to-momentum":
            out.append((label, into))
        elif label == "to-position":
            out.append((label, back))
        else:
            out.append((label, synthesize_diagonal(phase, synthesis)))
    return out


def step_circuit(model, eps, dt, synthesis=None, qft=None) -> Circuit:
    c = Circuit(model.n_qubits)
    for _, part in step_factor_circuits(model, eps, dt, synthesis, qft):
        c.extend(part)
    return c


def build_step_circuit(
    t: float, model: MolecularModel, env: PulseEnvelope, cfg: TrotterConfig
) -> Circuit:
    """Circuit for the step starting at time t."""
    if model is None:
        raise ValueError("a molecular model with V, T and x diagonals is required")
    eps = field_at(cfg.field_time(t), env)
    return step_circuit(model, eps, cfg.dt, cfg.synthesis, cfg.qft)


def step_gate_counts(model, eps, dt, synthesis=None, qft=None) -> list[tuple[str, dict[str, int]]]:
    return [
        (label, part.count_ops()) for label, part in step_factor_circuits(model, eps, dt, synthesis, qft)
    ]


def build_evolution_circuit(
    model: MolecularModel, env: PulseEnvelope, cfg: TrotterConfig, fuse: bool = False
) -> Circuit:
    """All steps as one circuit.

    With ``fuse`` the diagonal factors meeting at each step boundary
    (E/2 V/2 | V/2 E/2) are compiled as a single diagonal. That is only valid
    when nothing is measured between steps.
    """
    n, dt = model.n_qubits, cfg.dt
    qft = cfg.qft
    into, back = kinetic_block(n, qft)
    x, v = model.dipole.values, model.potential.values
    kin = register_order(-model.kinetic.values * dt, qft)
    fields = [field_at(cfg.field_time(k * dt), env) for k in range(cfg.n_steps)]

    c = Circuit(n)
    if not fuse:
        for k in range(cfg.n_steps):
            c.extend(step_circuit(model, fields[k], dt, cfg.synthesis, qft))
        return c

    kin_circuit = synthesize_diagonal(kin, cfg.synthesis)

    c.extend(synthesize_diagonal(-v * dt / 2 + x * fields[0] * dt / 2, cfg.synthesis))
    for k in range(cfg.n_steps):
        c.extend(into).extend(kin_circuit).extend(back)
        if k + 1 < cfg.n_steps:
            joint = x * (fields[k] + fields[k + 1]) * dt / 2 - v * dt
        else:
            joint = x * fields[k] * dt / 2 - v * dt / 2
        c.extend(synthesize_diagonal(joint, cfg.synthesis))
    return c


@dataclass
class TraceRow:
    step: int
    time: float
    field: float
    probabilities: np.ndarray
    field_off: bool = False

    @property
    def left_well(self) -> float:
        return float(self.probabilities[: self.probabilities.size // 2].sum())

    @property
    def right_well(self) -> float:
        return float(self.probabilities[self.probabilities.size // 2:].sum())


@dataclass
class PopulationTrace:
    """Populations after every step; ``initial`` is the state before step 1."""

    n_qubits: int
    initial: TraceRow
    rows: list[TraceRow] = field(default_factory=list)
    final_state: StateVector | None = None

    def __len__(self):
        return len(self.rows)

    def all_rows(self) -> list[TraceRow]:
        return [self.initial, *self.rows]

    def matrix(self) -> np.ndarray:
        """(n_steps, 2^n) array of per-step probabilities."""
        return np.array([r.probabilities for r in self.rows])

    @property
    def right_well(self) -> np.ndarray:
        return np.array([r.right_well for r in self.rows])

    @property
    def left_well(self) -> np.ndarray:
        return np.array([r.left_well for r in self.rows])

    def csv_header(self) -> list[str]:
        labels = [f"p{basis_label(i, self.n_qubits)}" for i in range(2 ** self.n_qubits)]
        return ["step", "time", "field", *labels, "left_well", "right_well"]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.csv_header())
            for r in self.all_rows():
                w.writerow(
                    [r.step, repr(float(r.time)), repr(float(r.field))]
                    + [repr(float(p)) for p in r.probabilities]
                    + [repr(r.left_well), repr(r.right_well)]
                )


def propagate(
    initial: StateVector,
    model: MolecularModel,
    env: PulseEnvelope,
    cfg: TrotterConfig,
    on_step=None,
) -> PopulationTrace:
    """Apply ``cfg.n_steps`` step circuits, recording populations after each.

    ``on_step(k, state)`` is called after step k (1-based) if given.
    """
    if abs(initial.norm() - 1.0) > NORM_TOL:
        raise ValueError("initial state is not normalized")
    if initial.n_qubits != model.n_qubits:
        raise ValueError("initial state and model have different qubit counts")
    state = initial
    trace = PopulationTrace(
        model.n_qubits, TraceRow(0, 0.0, field_at(0.0, env), probabilities(initial))
    )
    for k in range(cfg.n_steps):
        t = k * cfg.dt
        tf = cfg.field_time(t)
        eps = field_at(tf, env)
        try:
            state = apply_circuit(state, step_circuit(model, eps, cfg.dt, cfg.synthesis, cfg.qft))
        except Exception as exc:
            raise RuntimeError(f"propagation failed at step {k + 1}: {exc}") from exc
        trace.rows.append(
            TraceRow(k + 1, (k + 1) * cfg.dt, eps, probabilities(state), not 0 <= tf <= env.t_f)
        )
        if on_step is not None:
            on_step(k + 1, state)
    trace.final_state = state
    return trace


def oracle_propagate(
    initial: StateVector, model: MolecularModel, env: PulseEnvelope, cfg: TrotterConfig
) -> list[np.ndarray]:
    """Amplitudes after each step using the oracle's exact five-factor products."""
    psi = initial.amplitudes.copy()
    out = []
    for k in range(cfg.n_steps):
        eps = field_at(cfg.field_time(k * cfg.dt), env)
        psi = oracle.split_step_matrix(model.potential, model.kinetic, model.dipole, eps, cfg.dt) @ psi
        out.append(psi)
    return out


def trotter_error(model: MolecularModel, env: PulseEnvelope, t: float, dt: float) -> float:
    """Max-norm distance between one split step and exp(-i H dt), field frozen at t + dt/2."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return 0.0
    eps = field_at(t + dt / 2, env)
    split = oracle.split_step_matrix(model.potential, model.kinetic, model.dipole, eps, dt)
    h = oracle.molecular_hamiltonian(model.potential, model.kinetic, model.dipole, eps)
    return float(np.abs(split - oracle.exact_propagator(h, dt)).max())


def global_trotter_error(model: MolecularModel, eps: float, total_time: float, n_steps: int) -> float:
    """Max-norm distance after n_steps split steps versus exp(-i H total_time), constant field."""
    dt = total_time / n_steps
    split = oracle.split_step_matrix(model.potential, model.kinetic, model.dipole, eps, dt)
    h = oracle.molecular_hamiltonian(model.potential, model.kinetic, model.dipole, eps)
    return float(np.abs(np.linalg.matrix_power(split, n_steps) - oracle.exact_propagator(h, total_time)).max())
