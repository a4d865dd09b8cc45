"""
Grid, diagonal operators and laser pulse of the one-dimensional isomerization model.

Atomic units throughout (hbar = 1, e = 1, electron mass = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .qft import momentum_grid

PROTON_MASS = 1836.15

# Reference diagonals for the three-qubit malonaldehyde model.
REF_POTENTIAL = (293.78e-3, -0.10e-3, 1.85e-3, 5.41e-3, 5.46e-3, 2.02e-3, 0.18e-3, 305.44e-3)
REF_DIPOLE = (-1.51, -1.08, -0.65, -0.22, 0.22, 0.65, 1.08, 1.51)
# Tabulated with a negative last entry; a kinetic energy cannot be negative.
REF_KINETIC = (0.0, 0.91e-3, 3.63e-3, 8.16e-3, 14.51e-3, 8.16e-3, 3.63e-3, 0.91e-3)
REF_FIELD_AMPLITUDE = 1e-3

# Reconstructed: this spacing reproduces REF_DIPOLE to two decimals, and with
# the proton mass p^2/2m matches REF_KINETIC within 2%.
REF_DX = 0.4327
# Least-squares dt for the reference phase list -V dt/2; REF_DT_NOMINAL is the stated step.
REF_DT = 62.04
REF_DT_NOMINAL = 3.75


@dataclass(frozen=True)
class GridSpec:
    n_qubits: int
    dx: float
    x_min: float

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if not self.dx > 0:
            raise ValueError("grid spacing dx must be positive")

    @classmethod
    def centered(cls, n_qubits: int, dx: float) -> GridSpec:
        return cls(n_qubits, dx, -0.5 * (2 ** n_qubits - 1) * dx)

    @property
    def size(self) -> int:
        return 2 ** self.n_qubits

    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.size)


@dataclass(frozen=True)
class PotentialParams:
    """Asymmetric quartic double well: minima at +-x0, barrier V_b, asymmetry delta."""

    x0: float
    barrier: float
    asymmetry: float

    def __post_init__(self):
        if not self.x0 > 0:
            raise ValueError("x0 must be positive")
        if not self.barrier > self.asymmetry / 2:
            raise ValueError("barrier must exceed asymmetry / 2")


@dataclass(frozen=True)
class PulseEnvelope:
    """sin^2 ramp up to tau1, plateau until tau2, sin^2 ramp down to t_f."""

    amplitude: float
    tau1: float
    tau2: float
    t_f: float

    def __post_init__(self):
        if not 0 < self.tau1 < self.tau2 < self.t_f:
            raise ValueError(
                f"pulse times must satisfy 0 < tau1 < tau2 < t_f, "
                f"got {self.tau1}, {self.tau2}, {self.t_f}"
            )

    def stage(self, t: float) -> str:
        if t <= self.tau1:
            return "ramp-up"
        if t < self.tau2:
            return "plateau"
        return "ramp-down"


@dataclass(frozen=True)
class DiagonalOperator:
    basis: str
    values: np.ndarray
    source: str = "analytic"

    def __post_init__(self):
        if self.basis not in ("position", "momentum"):
            raise ValueError(f"basis must be 'position' or 'momentum', got {self.basis!r}")
        if self.source not in ("analytic", "explicit"):
            raise ValueError(f"source must be 'analytic' or 'explicit', got {self.source!r}")
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(vals)):
            raise ValueError("diagonal values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def explicit(cls, basis: str, values) -> DiagonalOperator:
        return cls(basis, values, "explicit")

    def __len__(self):
        return self.values.size


def potential_value(x, p: PotentialParams):
    x = np.asarray(x, dtype=float)
    linear = p.asymmetry / (2 * p.x0) * (x - p.x0)
    quartic = (p.barrier - p.asymmetry / 2) / p.x0 ** 4 * (x - p.x0) ** 2 * (x + p.x0) ** 2
    out = linear + quartic
    return float(out) if out.ndim == 0 else out


def potential_derivative(x, p: PotentialParams):
    x = np.asarray(x, dtype=float)
    c = (p.barrier - p.asymmetry / 2) / p.x0 ** 4
    return p.asymmetry / (2 * p.x0) + 4 * c * x * (x * x - p.x0 ** 2)


def potential_diagonal(grid: GridSpec, p: PotentialParams) -> DiagonalOperator:
    return DiagonalOperator("position", potential_value(grid.points(), p))


def kinetic_diagonal(grid: GridSpec, mass: float, ordering: str = "centered") -> DiagonalOperator:
    if not mass > 0:
        raise ValueError("mass must be positive")
    p = momentum_grid(grid.n_qubits, grid.dx, ordering)
    return DiagonalOperator("momentum", p ** 2 / (2 * mass))


def dipole_diagonal(grid: GridSpec) -> DiagonalOperator:
    return DiagonalOperator("position", grid.points())


def field_at(t: float, env: PulseEnvelope) -> float:
    """Electric field at time t; zero outside [0, t_f]."""
    if t < 0 or t > env.t_f:
        return 0.0
    if t <= env.tau1:
        return env.amplitude * math.sin(math.pi * t / (2 * env.tau1)) ** 2
    if t < env.tau2:
        return env.amplitude
    return env.amplitude * math.sin(math.pi * (env.t_f - t) / (2 * (env.t_f - env.tau2))) ** 2


def fit_potential_params(grid: GridSpec, values, starts: int = 12) -> tuple[PotentialParams, float]:
    """Least-squares (x0, V_b, delta) for sampled potential values.

    Returns the parameters and the maximum absolute residual of the fit.
    """
    from scipy.optimize import least_squares

    x = grid.points()
    target = np.asarray(values, dtype=float)
    span = float(np.abs(x).max())
    scale = float(np.ptp(target)) or 1.0

    def resid(q):
        x0, vb, d = q
        lin = d / (2 * x0) * (x - x0)
        quart = (vb - d / 2) / x0 ** 4 * (x - x0) ** 2 * (x + x0) ** 2
        return lin + quart - target

    best = None
    for x0 in np.linspace(0.1 * span, 1.5 * span, starts):
        for vb in (0.01 * scale, 0.1 * scale, scale):
            r = least_squares(resid, [x0, vb, 0.0], bounds=([1e-6, -np.inf, -np.inf], np.inf))
            if best is None or r.cost < best.cost:
                best = r
    x0, vb, d = best.x
    return PotentialParams(float(x0), float(vb), float(d)), float(np.abs(best.fun).max())


def write_diagonal(path, op: DiagonalOperator) -> None:
    Path(path).write_text("".join(f"{v!r}\n" for v in op.values.tolist()))


def read_diagonal(path, basis: str) -> DiagonalOperator:
    vals = [float(line) for line in Path(path).read_text().split() if line.strip()]
    return DiagonalOperator.explicit(basis, vals)


@dataclass(frozen=True)
class MolecularModel:
    """The three diagonals a propagation step needs."""

    potential: DiagonalOperator
    kinetic: DiagonalOperator
    dipole: DiagonalOperator

    def __post_init__(self):
        sizes = {len(self.potential), len(self.kinetic), len(self.dipole)}
        if len(sizes) != 1:
            raise ValueError(f"diagonal lengths differ: {sorted(sizes)}")
        (size,) = sizes
        if size < 2 or size & (size - 1):
            raise ValueError(f"diagonal length {size} is not a power of two")
        if self.potential.basis != "position" or self.dipole.basis != "position":
            raise ValueError("potential and dipole must be position-basis diagonals")
        if self.kinetic.basis != "momentum":
            raise ValueError("kinetic diagonal must be in the momentum basis")

    @property
    def n_qubits(self) -> int:
        return len(self.potential).bit_length() - 1


def reference_model(kinetic: str = "analytic") -> MolecularModel:
    """Reference V and x diagonals; kinetic from p^2/2m or the sign-corrected table."""
    if kinetic == "analytic":
        t = kinetic_diagonal(GridSpec.centered(3, REF_DX), PROTON_MASS)
    else:
        t = DiagonalOperator.explicit("momentum", REF_KINETIC)
    return MolecularModel(
        DiagonalOperator.explicit("position", REF_POTENTIAL),
        t,
        DiagonalOperator.explicit("position", REF_DIPOLE),
    )
