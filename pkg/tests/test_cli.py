import numpy as np

from qisomer import oracle
from qisomer.cli import main
from qisomer.config import load_config
from qisomer.model import field_at
from qisomer.runner import build_envelope, build_model
from qisomer.statevector import circuit_from_text


def test_run_writes_report(tmp_path, capsys):
    assert main(["run", "paper_scenario", "--out", str(tmp_path)]) == 0
    assert "product yield" in capsys.readouterr().out
    assert {p.name for p in tmp_path.iterdir()} >= {"trace.csv", "gates.csv", "summary.txt"}


def test_validate(capsys):
    assert main(["validate", "paper_scenario"]) == 0
    assert capsys.readouterr().out.startswith("ok: 3 qubits, 20 steps")


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_qubits = 3\nwhat = 1\n")
    assert main(["validate", str(bad)]) == 2
    assert f"{bad}:2: unknown key" in capsys.readouterr().err


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "paper_scenario", "--out", str(blocker / "x")]) == 4


def test_bad_step_index():
    assert main(["export-circuit", "paper_scenario", "--step", "20"]) == 2


def test_export_circuit_matches_oracle(tmp_path):
    out = tmp_path / "step3.txt"
    assert main(["export-circuit", "paper_scenario", "--step", "3", "--out", str(out)]) == 0
    circuit = circuit_from_text(out.read_text())
    cfg = load_config("paper_scenario")
    model, env = build_model(cfg), build_envelope(cfg)
    eps = field_at(3.5 * cfg.dt, env)
    ref = oracle.split_step_matrix(model.potential, model.kinetic, model.dipole, eps, cfg.dt)
    # angles are written with 12 decimals
    assert np.abs(oracle.circuit_matrix(circuit) - ref).max() < 1e-9


def test_convergence_cli(tmp_path):
    cfgfile = tmp_path / "small.cfg"
    from qisomer.config import serialize_config

    cfgfile.write_text(serialize_config(load_config("paper_scenario").with_overrides(dt=2.0)))
    out = tmp_path / "conv.csv"
    assert main(["convergence", str(cfgfile), "--dt-sweep", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "level,dt,n_steps,deviation,ratio"
    assert len(lines) == 3
