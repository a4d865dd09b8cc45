import numpy as np
import pytest
from conftest import random_state

from qisomer import oracle
from qisomer.model import (
    REF_DT,
    DiagonalOperator,
    GridSpec,
    MolecularModel,
    PulseEnvelope,
    dipole_diagonal,
    kinetic_diagonal,
    reference_model,
)
from qisomer.propagator import (
    TrotterConfig,
    build_evolution_circuit,
    build_step_circuit,
    global_trotter_error,
    oracle_propagate,
    propagate,
    step_circuit,
    step_gate_counts,
    trotter_error,
)
from qisomer.qft import QftConvention
from qisomer.statevector import StateVector, apply_circuit, new_basis_state

DT = REF_DT
MODEL = reference_model()
PULSE = PulseEnvelope(1e-3, 5 * DT, 15 * DT, 20 * DT)


def free_model(n=4, dx=0.5, mass=1.0):
    grid = GridSpec.centered(n, dx)
    zeros = DiagonalOperator("position", np.zeros(2 ** n))
    return MolecularModel(zeros, kinetic_diagonal(grid, mass), dipole_diagonal(grid)), grid


def overlap_up_to_phase(a, b):
    return abs(abs(np.vdot(a, b)) - 1)


# =============================================================================
# Single steps
# =============================================================================

def test_zero_momentum_free_particle_picks_up_global_phase_only():
    model, _ = free_model(3)
    uniform = StateVector(np.full(8, 1 / np.sqrt(8)))
    out = apply_circuit(uniform, step_circuit(model, 0.0, 7.0))
    assert np.abs(out.amplitudes - uniform.amplitudes).max() < 1e-12


def test_tiny_dt_is_near_identity(rng):
    s = random_state(3, rng)
    out = apply_circuit(s, step_circuit(MODEL, 1e-3, 1e-8))
    assert overlap_up_to_phase(out.amplitudes, s.amplitudes) < 1e-10
    assert np.abs(out.amplitudes - s.amplitudes).max() < 1e-7


def test_first_scenario_step_matches_oracle():
    cfg = TrotterConfig(DT, 1)
    c = build_step_circuit(0.0, MODEL, PULSE, cfg)
    psi = apply_circuit(new_basis_state(3, 2), c).amplitudes
    ref = oracle_propagate(new_basis_state(3, 2), MODEL, PULSE, cfg)[0]
    assert np.abs(psi - ref).max() < 1e-10


@pytest.mark.parametrize("swaps", [True, False])
@pytest.mark.parametrize("ordering", ["sequency-gray", "natural"])
def test_step_matrix_equals_five_factor_product(swaps, ordering):
    from qisomer.walsh import SynthesisOptions

    eps = 7e-4
    c = step_circuit(MODEL, eps, DT, SynthesisOptions(ordering=ordering), QftConvention(include_final_swaps=swaps))
    ref = oracle.split_step_matrix(MODEL.potential, MODEL.kinetic, MODEL.dipole, eps, DT)
    assert np.abs(oracle.circuit_matrix(c) - ref).max() < 1e-10


def test_palindromic_step_reversible():
    eps = 1e-3
    m = oracle.circuit_matrix(step_circuit(MODEL, eps, DT))
    m_back = oracle.circuit_matrix(step_circuit(MODEL, eps, -DT))
    assert np.abs(m @ m_back - np.eye(8)).max() < 1e-9


def test_factor_order_and_counts():
    labels = [label for label, _ in step_gate_counts(MODEL, 1e-3, DT)]
    assert labels == ["V/2", "E/2", "to-momentum", "T", "to-position", "E/2", "V/2"]
    counts = dict(step_gate_counts(MODEL, 1e-3, DT)[:4])
    assert counts["V/2"] == {"GPHASE": 1, "RZ": 7, "CX": 6}
    assert counts["to-momentum"] == {"H": 3, "CP": 3, "SWAP": 1}


def test_field_sign_convention():
    # a static field tilts the energy by -x eps; the E/2 factor is exp(+i x eps dt/2)
    model, _ = free_model(3)
    static = MolecularModel(model.potential, DiagonalOperator("momentum", np.zeros(8)), model.dipole)
    m = oracle.circuit_matrix(step_circuit(static, 0.01, 2.0))
    assert np.allclose(np.diag(m), np.exp(1j * static.dipole.values * 0.01 * 2.0), atol=1e-12)


# =============================================================================
# Trotter error
# =============================================================================

def test_trotter_error_zero_kinetic_is_exact():
    m = MolecularModel(MODEL.potential, DiagonalOperator("momentum", np.zeros(8)), MODEL.dipole)
    assert trotter_error(m, PULSE, 3 * DT, DT) < 1e-12


def test_trotter_error_zero_dt():
    assert trotter_error(MODEL, PULSE, 0.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        trotter_error(MODEL, PULSE, 0.0, -1.0)


def test_local_error_third_order():
    t = 7 * DT
    errs = [trotter_error(MODEL, PULSE, t, 4.0 / 2 ** k) for k in range(5)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(6 <= r <= 10 for r in ratios), ratios


def test_global_error_second_order():
    errs = [global_trotter_error(MODEL, 1e-3, 80.0, 20 * 2 ** k) for k in range(4)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.2 <= r <= 4.8 for r in ratios), ratios


# =============================================================================
# Full propagation
# =============================================================================

def test_single_step_trace():
    trace = propagate(new_basis_state(3, 2), MODEL, PULSE, TrotterConfig(DT, 1))
    assert len(trace) == 1
    assert len(trace.all_rows()) == 2
    assert trace.rows[0].step == 1


def test_scenario_run_matches_oracle_every_step():
    cfg = TrotterConfig(DT, 20)
    states = []
    propagate(new_basis_state(3, 2), MODEL, PULSE, cfg, lambda k, s: states.append(s.amplitudes))
    ref = oracle_propagate(new_basis_state(3, 2), MODEL, PULSE, cfg)
    assert len(states) == 20
    for a, b in zip(states, ref):
        assert np.abs(a - b).max() < 1e-9
    assert abs(np.linalg.norm(states[-1]) - 1) < 1e-9


def test_ground_state_stationary_without_field():
    still = PulseEnvelope(0.0, 5.0, 15.0, 20.0)
    h = oracle.molecular_hamiltonian(MODEL.potential, MODEL.kinetic)
    g, _ = oracle.ground_state(h)
    trace = propagate(g, MODEL, still, TrotterConfig(0.5, 20))
    drift = np.abs(trace.matrix() - trace.initial.probabilities).max()
    assert drift < 1e-6


def test_fused_evolution_equals_stepwise():
    cfg = TrotterConfig(DT, 20)
    fused = build_evolution_circuit(MODEL, PULSE, cfg, fuse=True)
    plain = build_evolution_circuit(MODEL, PULSE, cfg)
    assert len(fused) < len(plain)
    s = new_basis_state(3, 2)
    a = apply_circuit(s, fused).amplitudes
    b = apply_circuit(s, plain).amplitudes
    assert np.abs(a - b).max() < 1e-12


@pytest.mark.parametrize("swaps", [True, False])
def test_free_gaussian_matches_fft_split_step(swaps):
    # Classic split-step Fourier with numpy's FFT as an independent reference.
    n, dx, mass, dt, steps = 5, 0.3, 1.0, 0.05, 30
    model, grid = free_model(n, dx, mass)
    x = grid.points()
    psi0 = np.exp(-((x + 1.0) ** 2) / 0.5 + 2.0j * x)
    psi0 /= np.linalg.norm(psi0)
    cfg = TrotterConfig(dt, steps, qft=QftConvention(include_final_swaps=swaps))
    got = propagate(StateVector(psi0), model, PulseEnvelope(0.0, 1.0, 2.0, 3.0), cfg).final_state.amplitudes

    k = 2 * np.pi * np.fft.fftfreq(2 ** n, d=dx)
    phase = np.exp(-1j * k ** 2 / (2 * mass) * dt)
    ref = psi0.copy()
    for _ in range(steps):
        ref = np.fft.ifft(phase * np.fft.fft(ref))
    # the Nyquist momentum sign is immaterial for k^2
    assert np.abs(got - ref).max() < 1e-10


def test_rejects_unnormalized_initial():
    amps = np.zeros(8, complex)
    amps[0] = 1
    bad = StateVector(amps)
    bad.amplitudes[0] = 2
    with pytest.raises(ValueError):
        propagate(bad, MODEL, PULSE, TrotterConfig(DT, 2))


def test_config_validation():
    with pytest.raises(ValueError):
        TrotterConfig(DT, 0)
    with pytest.raises(ValueError):
        TrotterConfig(0.0, 5)
    with pytest.raises(ValueError):
        TrotterConfig(DT, 5, field_sample="end")


def test_step_outside_pulse_flagged():
    trace = propagate(new_basis_state(3, 2), MODEL, PULSE, TrotterConfig(DT, 22))
    assert [r.field_off for r in trace.rows[-3:]] == [False, True, True]
    assert trace.rows[-1].field == 0
