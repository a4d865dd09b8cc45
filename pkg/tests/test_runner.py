import numpy as np
import pytest

from qisomer.config import ConfigError, TimeSpec, load_config, parse_config, serialize_config
from qisomer.model import REF_DIPOLE, REF_POTENTIAL
from qisomer.runner import build_model, convergence_study, run
from qisomer.walsh import synthesize_diagonal

SCENARIO = load_config("paper_scenario")
HEADER = "step,time,field,p000,p001,p010,p011,p100,p101,p110,p111,left_well,right_well"


def scenario_text(**replace):
    from importlib import resources

    text = resources.files("qisomer.configs").joinpath("paper_scenario.cfg").read_text()
    lines = []
    for line in text.splitlines():
        key = line.split("=", 1)[0].strip()
        if key in replace:
            value = replace.pop(key)
            if value is None:
                continue
            line = f"{key} = {value}"
        lines.append(line)
    lines += [f"{k} = {v}" for k, v in replace.items() if v is not None]
    return "\n".join(lines) + "\n"


# =============================================================================
# Config
# =============================================================================

def test_shipped_scenario_config():
    assert SCENARIO.n_qubits == 3 and SCENARIO.n_steps == 20
    assert SCENARIO.potential.values == tuple(REF_POTENTIAL)
    assert SCENARIO.dipole.values == tuple(REF_DIPOLE)
    assert SCENARIO.times() == pytest.approx((5 * SCENARIO.dt, 15 * SCENARIO.dt, 20 * SCENARIO.dt))


def test_both_shipped_configs_load():
    recon = load_config("reconstructed_scenario")
    assert recon.potential.source == "analytic"
    assert build_model(recon).potential.values.shape == (8,)


def test_seven_entry_potential_rejected():
    text = scenario_text(**{"potential.values": ", ".join(str(v) for v in REF_POTENTIAL[:7])})
    with pytest.raises(ConfigError, match="7 entries"):
        parse_config(text, "bad.cfg")


def test_tau_order_rejected_with_line_number():
    text = scenario_text(tau1="16 dt")
    lineno = next(i for i, l in enumerate(text.splitlines(), 1) if l.startswith("tau2"))
    with pytest.raises(ConfigError, match=rf"bad.cfg:{lineno}: pulse times out of order"):
        parse_config(text, "bad.cfg")


@pytest.mark.parametrize(
    "replace, message",
    [
        ({"dt": None}, "missing required key 'dt'"),
        ({"bogus": "1"}, "unknown key"),
        ({"initial_state": "0101"}, "3-bit label"),
        ({"t_f": "25 dt"}, "beyond the simulated time"),
        ({"mass": None}, "positive mass"),
        ({"shots": "100"}, "requires a seed"),
        ({"dt": "abc"}, "bad value"),
    ],
)
def test_config_errors(replace, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(scenario_text(**replace))


def test_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate key"):
        parse_config(scenario_text() + "dt = 3.0\n")


@pytest.mark.parametrize("name", ["paper_scenario", "reconstructed_scenario"])
def test_serialize_round_trip(name):
    cfg = load_config(name)
    text = serialize_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert serialize_config(again) == text


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")


# =============================================================================
# Runs and reports
# =============================================================================

@pytest.fixture(scope="module")
def scenario_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("scenario")
    return run(SCENARIO, out), out


def test_trace_csv_contract(scenario_run):
    _, out = scenario_run
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 22  # header + initial row + 20 steps
    first = lines[1].split(",")
    assert first[0] == "0" and float(first[5]) == 1.0


def test_determinism(scenario_run, tmp_path):
    _, out = scenario_run
    run(SCENARIO, tmp_path)
    for name in ("trace.csv", "gates.csv", "summary.txt"):
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()


def test_summary_stages(scenario_run):
    result, out = scenario_run
    assert [(s, a, b) for s, a, b, _ in result.stages()] == [
        ("ramp-up", 0, 4), ("plateau", 5, 14), ("ramp-down", 15, 19)
    ]
    text = (out / "summary.txt").read_text()
    for line in ("ramp-up: steps 0-4", "plateau: steps 5-14", "ramp-down: steps 15-19"):
        assert line in text
    assert "product yield" in text


def test_gate_table_matches_walsh_counts(scenario_run):
    result, out = scenario_run
    rows = (out / "gates.csv").read_text().splitlines()
    assert rows[0] == "step,factor,rz,cx,h,cp,swap,gphase,total"
    assert len(rows) == 1 + 20 * 7
    v_ops = synthesize_diagonal(-np.array(REF_POTENTIAL) * SCENARIO.dt / 2).count_ops()
    v_row = rows[1].split(",")
    assert v_row[1] == "V/2"
    assert int(v_row[2]) == v_ops["RZ"] and int(v_row[3]) == v_ops["CX"]


def test_yield_is_final_right_well(scenario_run):
    result, _ = scenario_run
    assert 0 <= result.product_yield <= 1
    assert result.product_yield == pytest.approx(result.trace.rows[-1].right_well, abs=1e-15)
    assert abs(np.linalg.norm(result.final_amplitudes) - 1) < 1e-9


def test_single_step_run():
    cfg = SCENARIO.with_overrides(
        n_steps=1, tau1=TimeSpec(0.2, True), tau2=TimeSpec(0.5, True), t_f=TimeSpec(1.0, True)
    )
    result = run(cfg)
    assert len(result.trace) == 1
    assert result.product_yield == pytest.approx(result.trace.rows[0].right_well)


def test_stationary_yield_without_field():
    cfg = SCENARIO.with_overrides(epsilon0=0.0, initial_state="ground", dt=3.75)
    result = run(cfg)
    assert abs(result.product_yield - result.trace.initial.right_well) < 1e-4


def test_yield_bounds_over_configs(rng):
    for _ in range(5):
        cfg = SCENARIO.with_overrides(
            epsilon0=float(rng.uniform(0, 0.05)),
            initial_state=format(int(rng.integers(8)), "03b"),
            n_steps=20,
        )
        assert 0 <= run(cfg).product_yield <= 1


def test_shots_reproducible(tmp_path):
    cfg = SCENARIO.with_overrides(shots=200, seed=7)
    a = run(cfg, tmp_path / "a")
    b = run(cfg, tmp_path / "b")
    assert a.counts == b.counts and len(a.counts) == 20
    assert all(sum(c.values()) == 200 for c in a.counts)
    assert (tmp_path / "a" / "counts.csv").read_bytes() == (tmp_path / "b" / "counts.csv").read_bytes()
    c = run(cfg.with_overrides(seed=8))
    assert c.counts != a.counts


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        run(SCENARIO, blocker / "sub")


def test_convergence_study_second_order():
    cfg = SCENARIO.with_overrides(dt=2.0)
    rows = convergence_study(cfg, levels=3, jobs=2)
    assert [r["level"] for r in rows] == [0, 1, 2]
    for r in rows[1:]:
        assert 3.2 <= r["ratio"] <= 4.8
