"""
Experiment configuration files.

Flat ``key = value`` lines; ``#`` starts a comment. Lists are comma
separated. Times may be given as absolute values or as step multiples
(``5 dt``). See ``configs/paper_scenario.cfg`` for every key.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

SHIPPED = ("paper_scenario", "reconstructed_scenario")

_TIME_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*\*?\s*dt\s*$")


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries file and line where known."""


@dataclass(frozen=True)
class TimeSpec:
    value: float
    in_steps: bool = False

    def absolute(self, dt: float) -> float:
        return self.value * dt if self.in_steps else self.value

    def __str__(self):
        return f"{self.value!r} dt" if self.in_steps else repr(self.value)


@dataclass(frozen=True)
class DiagonalSource:
    source: str  # explicit | analytic
    values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    n_qubits: int
    dt: float
    n_steps: int
    epsilon0: float
    tau1: TimeSpec
    tau2: TimeSpec
    t_f: TimeSpec
    initial_state: str
    potential: DiagonalSource
    kinetic: DiagonalSource
    dipole: DiagonalSource
    field_sample: str = "midpoint"
    grid_dx: float | None = None
    grid_x_min: float | None = None
    mass: float | None = None
    kinetic_ordering: str = "centered"
    potential_x0: float | None = None
    potential_barrier: float | None = None
    potential_asymmetry: float | None = None
    synthesis_threshold: float = 0.0
    synthesis_ordering: str = "sequency-gray"
    qft_final_swaps: bool = True
    output_trace: str = "trace.csv"
    output_summary: str = "summary.txt"
    output_gates: str = "gates.csv"
    output_counts: str = "counts.csv"
    shots: int | None = None
    seed: int | None = None
    name: str = field(default="", compare=False)

    def times(self) -> tuple[float, float, float]:
        return (self.tau1.absolute(self.dt), self.tau2.absolute(self.dt), self.t_f.absolute(self.dt))

    def with_overrides(self, **kw) -> ExperimentConfig:
        return replace(self, **kw)


# key in file -> (attribute, parser kind)
_SCALARS = {
    "n_qubits": ("n_qubits", "int"),
    "dt": ("dt", "float"),
    "n_steps": ("n_steps", "int"),
    "epsilon0": ("epsilon0", "float"),
    "tau1": ("tau1", "time"),
    "tau2": ("tau2", "time"),
    "t_f": ("t_f", "time"),
    "initial_state": ("initial_state", "str"),
    "field_sample": ("field_sample", "str"),
    "grid.dx": ("grid_dx", "float"),
    "grid.x_min": ("grid_x_min", "float"),
    "mass": ("mass", "float"),
    "kinetic.ordering": ("kinetic_ordering", "str"),
    "potential.x0": ("potential_x0", "float"),
    "potential.barrier": ("potential_barrier", "float"),
    "potential.asymmetry": ("potential_asymmetry", "float"),
    "synthesis.threshold": ("synthesis_threshold", "float"),
    "synthesis.ordering": ("synthesis_ordering", "str"),
    "qft.final_swaps": ("qft_final_swaps", "bool"),
    "output.trace": ("output_trace", "str"),
    "output.summary": ("output_summary", "str"),
    "output.gates": ("output_gates", "str"),
    "output.counts": ("output_counts", "str"),
    "shots": ("shots", "int"),
    "seed": ("seed", "int"),
}
_DIAGONALS = ("potential", "kinetic", "dipole")
_REQUIRED = ("n_qubits", "dt", "n_steps", "epsilon0", "tau1", "tau2", "t_f", "initial_state")
KNOWN_KEYS = set(_SCALARS) | {f"{d}.{s}" for d in _DIAGONALS for s in ("source", "values")}


def _parse_value(kind, raw):
    if kind == "int":
        return int(raw)
    if kind == "float":
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError(f"non-finite number {raw!r}")
        return v
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError(f"expected true/false, got {raw!r}")
    if kind == "time":
        m = _TIME_RE.match(raw)
        if m:
            return TimeSpec(float(m.group(1)), True)
        return TimeSpec(float(raw))
    return raw


def _read_pairs(text: str, where: str) -> dict[str, tuple[str, int]]:
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{where}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{where}:{lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"{where}:{lineno}: duplicate key {key!r} (first on line {pairs[key][1]})")
        pairs[key] = (value, lineno)
    return pairs


def parse_config(text: str, where: str = "<config>") -> ExperimentConfig:
    pairs = _read_pairs(text, where)

    def err(key, msg):
        line = pairs[key][1] if key in pairs else None
        loc = f"{where}:{line}" if line else where
        return ConfigError(f"{loc}: {msg}")

    for key in _REQUIRED:
        if key not in pairs:
            raise err(key, f"missing required key {key!r}")

    kw = {}
    for key, (attr, kind) in _SCALARS.items():
        if key not in pairs or pairs[key][0] == "":
            continue
        try:
            kw[attr] = _parse_value(kind, pairs[key][0])
        except ValueError as exc:
            raise err(key, f"bad value for {key!r}: {exc}") from None

    n = kw["n_qubits"]
    if n < 1:
        raise err("n_qubits", "n_qubits must be >= 1")
    dim = 2 ** n
    for d in _DIAGONALS:
        skey, vkey = f"{d}.source", f"{d}.values"
        if skey not in pairs:
            raise err(skey, f"missing required key {skey!r}")
        source = pairs[skey][0]
        if source not in ("explicit", "analytic"):
            raise err(skey, f"{skey} must be 'explicit' or 'analytic'")
        values = None
        if source == "explicit":
            if vkey not in pairs:
                raise err(skey, f"{d} is explicit but {vkey!r} is missing")
            try:
                values = tuple(float(v) for v in pairs[vkey][0].split(",") if v.strip())
            except ValueError as exc:
                raise err(vkey, f"bad number in {vkey!r}: {exc}") from None
            if len(values) != dim:
                raise err(vkey, f"{vkey} has {len(values)} entries, expected {dim} for {n} qubits")
            if not all(math.isfinite(v) for v in values):
                raise err(vkey, f"{vkey} contains non-finite values")
        kw[d] = DiagonalSource(source, values)

    cfg = ExperimentConfig(**kw, name=where)
    _validate(cfg, err)
    return cfg


def _validate(cfg: ExperimentConfig, err) -> None:
    if not cfg.dt > 0:
        raise err("dt", "dt must be positive")
    if cfg.n_steps < 1:
        raise err("n_steps", "n_steps must be >= 1")
    t1, t2, tf = cfg.times()
    if not 0 < t1 < t2:
        raise err("tau2", f"pulse times out of order: need 0 < tau1 < tau2, got {t1} and {t2}")
    if not t2 < tf:
        raise err("t_f", f"pulse times out of order: need tau2 < t_f, got {t2} and {tf}")
    total = cfg.n_steps * cfg.dt
    if tf > total * (1 + 1e-12):
        raise err("t_f", f"t_f = {tf} lies beyond the simulated time {total}")
    if cfg.field_sample not in ("midpoint", "left"):
        raise err("field_sample", "field_sample must be 'midpoint' or 'left'")
    if cfg.kinetic_ordering not in ("centered", "natural"):
        raise err("kinetic.ordering", "kinetic.ordering must be 'centered' or 'natural'")
    if cfg.synthesis_ordering not in ("sequency-gray", "natural"):
        raise err("synthesis.ordering", "synthesis.ordering must be 'sequency-gray' or 'natural'")
    if cfg.synthesis_threshold < 0:
        raise err("synthesis.threshold", "synthesis.threshold must be non-negative")
    if cfg.shots is not None and cfg.shots < 1:
        raise err("shots", "shots must be >= 1")
    if cfg.shots is not None and cfg.seed is None:
        raise err("shots", "shots requires a seed")
    label = cfg.initial_state
    if label != "ground":
        if len(label) != cfg.n_qubits or set(label) - {"0", "1"}:
            raise err("initial_state", f"initial_state must be an {cfg.n_qubits}-bit label or 'ground'")
    needs_grid = [d for d in _DIAGONALS if getattr(cfg, d).source == "analytic"]
    if needs_grid and cfg.grid_dx is None:
        raise err(f"{needs_grid[0]}.source", f"analytic {needs_grid[0]} needs grid.dx")
    if cfg.grid_dx is not None and not cfg.grid_dx > 0:
        raise err("grid.dx", "grid.dx must be positive")
    if cfg.kinetic.source == "analytic" and (cfg.mass is None or not cfg.mass > 0):
        raise err("kinetic.source", "analytic kinetic needs a positive mass")
    if cfg.potential.source == "analytic":
        for k in ("potential.x0", "potential.barrier", "potential.asymmetry"):
            if getattr(cfg, _SCALARS[k][0]) is None:
                raise err("potential.source", f"analytic potential needs {k!r}")
        if not cfg.potential_x0 > 0:
            raise err("potential.x0", "potential.x0 must be positive")
        if not cfg.potential_barrier > cfg.potential_asymmetry / 2:
            raise err("potential.barrier", "potential.barrier must exceed asymmetry / 2")


def load_config(path) -> ExperimentConfig:
    """Load a config file, or one of the shipped scenarios by name."""
    if str(path) in SHIPPED:
        text = resources.files("qisomer.configs").joinpath(f"{path}.cfg").read_text()
        return parse_config(text, str(path))
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config: {exc}") from None
    return parse_config(text, str(p))


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    attr_to_key = {attr: key for key, (attr, _) in _SCALARS.items()}
    lines = []
    for f in fields(cfg):
        if f.name == "name":
            continue
        value = getattr(cfg, f.name)
        if f.name in _DIAGONALS:
            lines.append(f"{f.name}.source = {value.source}")
            if value.values is not None:
                lines.append(f"{f.name}.values = " + ", ".join(repr(v) for v in value.values))
            continue
        if value is None:
            continue
        key = attr_to_key[f.name]
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
