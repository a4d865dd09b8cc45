"""Gate-level simulation of laser-driven double-well tunneling on a few qubits."""

from .model import (
    DiagonalOperator,
    GridSpec,
    MolecularModel,
    PotentialParams,
    PulseEnvelope,
    reference_model,
)
from .propagator import PopulationTrace, TrotterConfig, build_step_circuit, propagate
from .statevector import (
    Circuit,
    GateOp,
    StateVector,
    apply_circuit,
    apply_gate,
    new_basis_state,
    probabilities,
    sample_counts,
)
from .walsh import SynthesisOptions, synthesize_diagonal, walsh_transform

__all__ = [
    "Circuit",
    "DiagonalOperator",
    "GateOp",
    "GridSpec",
    "MolecularModel",
    "PopulationTrace",
    "PotentialParams",
    "PulseEnvelope",
    "StateVector",
    "SynthesisOptions",
    "TrotterConfig",
    "apply_circuit",
    "apply_gate",
    "build_step_circuit",
    "new_basis_state",
    "probabilities",
    "propagate",
    "reference_model",
    "sample_counts",
    "synthesize_diagonal",
    "walsh_transform",
]
__version__ = "0.1.0"
