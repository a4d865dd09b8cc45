"""Turn an ExperimentConfig into a propagation run and its report files."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle
from .config import ExperimentConfig
from .model import (
    DiagonalOperator,
    GridSpec,
    MolecularModel,
    PotentialParams,
    PulseEnvelope,
    dipole_diagonal,
    field_at,
    kinetic_diagonal,
    potential_diagonal,
)
from .propagator import PopulationTrace, TrotterConfig, propagate, step_gate_counts
from .qft import QftConvention
from .statevector import StateVector, basis_label, new_basis_state, sample_counts
from .walsh import SynthesisOptions

log = logging.getLogger(__name__)

GATE_COLUMNS = ("RZ", "CX", "H", "CP", "SWAP", "GPHASE")


def build_model(cfg: ExperimentConfig) -> MolecularModel:
    grid = None
    if cfg.grid_dx is not None:
        if cfg.grid_x_min is None:
            grid = GridSpec.centered(cfg.n_qubits, cfg.grid_dx)
        else:
            grid = GridSpec(cfg.n_qubits, cfg.grid_dx, cfg.grid_x_min)

    if cfg.potential.source == "explicit":
        v = DiagonalOperator.explicit("position", cfg.potential.values)
    else:
        params = PotentialParams(cfg.potential_x0, cfg.potential_barrier, cfg.potential_asymmetry)
        v = potential_diagonal(grid, params)
    if cfg.kinetic.source == "explicit":
        t = DiagonalOperator.explicit("momentum", cfg.kinetic.values)
    else:
        t = kinetic_diagonal(grid, cfg.mass, cfg.kinetic_ordering)
    if cfg.dipole.source == "explicit":
        x = DiagonalOperator.explicit("position", cfg.dipole.values)
    else:
        x = dipole_diagonal(grid)
    return MolecularModel(v, t, x)


def build_envelope(cfg: ExperimentConfig) -> PulseEnvelope:
    return PulseEnvelope(cfg.epsilon0, *cfg.times())


def trotter_config(cfg: ExperimentConfig) -> TrotterConfig:
    return TrotterConfig(
        cfg.dt,
        cfg.n_steps,
        cfg.field_sample,
        SynthesisOptions(cfg.synthesis_threshold, cfg.synthesis_ordering),
        QftConvention(include_final_swaps=cfg.qft_final_swaps, frequency_ordering=cfg.kinetic_ordering),
    )


def initial_state(cfg: ExperimentConfig, model: MolecularModel) -> StateVector:
    if cfg.initial_state == "ground":
        h = oracle.molecular_hamiltonian(model.potential, model.kinetic)
        return oracle.ground_state(h)[0]
    return new_basis_state(cfg.n_qubits, int(cfg.initial_state, 2))


@dataclass
class RunResult:
    config: ExperimentConfig
    trace: PopulationTrace
    envelope: PulseEnvelope
    final_amplitudes: np.ndarray
    product_yield: float
    gate_counts: list[list[tuple[str, dict[str, int]]]]
    counts: list[dict[int, int]] = field(default_factory=list)

    def stages(self) -> list[tuple[str, int, int, list[float]]]:
        """(stage, first step, last step, fields) with 0-based step indices."""
        out: list[tuple[str, int, int, list[float]]] = []
        tcfg = trotter_config(self.config)
        for k, row in enumerate(self.trace.rows):
            name = self.envelope.stage(tcfg.field_time(k * tcfg.dt))
            if out and out[-1][0] == name:
                out[-1] = (name, out[-1][1], k, out[-1][3] + [row.field])
            else:
                out.append((name, k, k, [row.field]))
        return out


def run(cfg: ExperimentConfig, out_dir=None) -> RunResult:
    """Propagate the configured experiment; write the report if ``out_dir`` is given."""
    model = build_model(cfg)
    env = build_envelope(cfg)
    tcfg = trotter_config(cfg)
    psi0 = initial_state(cfg, model)

    counts: list[dict[int, int]] = []
    seeds = []
    if cfg.shots:
        seeds = np.random.SeedSequence(cfg.seed).generate_state(cfg.n_steps).tolist()

    def on_step(k, state):
        if cfg.shots:
            counts.append(sample_counts(state, cfg.shots, seeds[k - 1]))

    log.info("propagating %d steps of dt=%g", cfg.n_steps, cfg.dt)
    trace = propagate(psi0, model, env, tcfg, on_step)
    gates = [
        step_gate_counts(model, row.field, tcfg.dt, tcfg.synthesis, tcfg.qft) for row in trace.rows
    ]
    result = RunResult(
        cfg,
        trace,
        env,
        trace.final_state.amplitudes.copy(),
        float(min(1.0, max(0.0, trace.rows[-1].right_well))),
        gates,
        counts,
    )
    if out_dir is not None:
        emit_report(result, out_dir)
    return result


def _summary_text(result: RunResult) -> str:
    cfg, trace = result.config, result.trace
    n = trace.n_qubits
    lines = [
        f"config: {cfg.name}",
        f"steps: {cfg.n_steps}  dt: {cfg.dt!r}  epsilon0: {cfg.epsilon0!r}",
        f"initial state: {cfg.initial_state}",
        "",
        "basis      initial          final",
    ]
    for i in range(2 ** n):
        lines.append(
            f"|{basis_label(i, n)}>  {trace.initial.probabilities[i]:.12f}  "
            f"{trace.rows[-1].probabilities[i]:.12f}"
        )
    lines += [
        "",
        f"left well (initial -> final): {trace.initial.left_well:.12f} -> {trace.rows[-1].left_well:.12f}",
        f"product yield (right well, final step): {result.product_yield:.12f}",
        "",
        "pulse stages (0-based step ranges, field in use at each step):",
    ]
    for name, first, last, fields_ in result.stages():
        vals = ", ".join(f"{f:.6g}" for f in fields_)
        lines.append(f"  {name}: steps {first}-{last}: [{vals}]")
    return "\n".join(lines) + "\n"


def emit_report(result: RunResult, out_dir) -> dict[str, Path]:
    """Write trace CSV, gate-count table and summary (plus shot counts) under ``out_dir``."""
    cfg = result.config
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trace": out / cfg.output_trace,
        "gates": out / cfg.output_gates,
        "summary": out / cfg.output_summary,
    }
    result.trace.write_csv(paths["trace"])
    with open(paths["gates"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "factor", *[c.lower() for c in GATE_COLUMNS], "total"])
        for k, factors in enumerate(result.gate_counts, 1):
            for label, ops in factors:
                w.writerow([k, label, *[ops.get(c, 0) for c in GATE_COLUMNS], sum(ops.values())])
    paths["summary"].write_text(_summary_text(result))
    if result.counts:
        paths["counts"] = out / cfg.output_counts
        n = result.trace.n_qubits
        with open(paths["counts"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", *[f"c{basis_label(i, n)}" for i in range(2 ** n)]])
            for k, hist in enumerate(result.counts, 1):
                w.writerow([k, *[hist.get(i, 0) for i in range(2 ** n)]])
    return paths


def _midpoint_reference(cfg: ExperimentConfig, model, env, psi0, dt: float) -> np.ndarray:
    """Product of exact exponentials exp(-i H(t_mid) dt) over the configured time span."""
    steps = int(round(cfg.n_steps * cfg.dt / dt))
    psi = psi0.amplitudes.copy()
    for k in range(steps):
        eps = field_at((k + 0.5) * dt, env)
        h = oracle.molecular_hamiltonian(model.potential, model.kinetic, model.dipole, eps)
        psi = oracle.exact_propagator(h, dt) @ psi
    return psi


def convergence_study(cfg: ExperimentConfig, levels: int = 4, jobs: int = 1) -> list[dict]:
    """Final-state deviation from a fine exact-exponential reference as dt halves.

    The total time is fixed; level l uses dt / 2^l and n_steps * 2^l steps.
    """
    model = build_model(cfg)
    env = build_envelope(cfg)
    psi0 = initial_state(cfg, model)
    ref = _midpoint_reference(cfg, model, env, psi0, cfg.dt / 2 ** (levels + 3))

    def one(level):
        tcfg = trotter_config(cfg)
        tcfg = TrotterConfig(
            cfg.dt / 2 ** level, cfg.n_steps * 2 ** level, "midpoint", tcfg.synthesis, tcfg.qft
        )
        final = propagate(psi0, model, env, tcfg).final_state.amplitudes
        return {
            "level": level,
            "dt": tcfg.dt,
            "n_steps": tcfg.n_steps,
            "deviation": float(np.abs(final - ref).max()),
        }

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, range(levels)))
    else:
        rows = [one(level) for level in range(levels)]
    for prev, row in zip(rows, rows[1:]):
        row["ratio"] = prev["deviation"] / row["deviation"] if row["deviation"] else float("inf")
    return rows
