import csv
import json

import numpy as np
import pytest

from msgate import __version__
from msgate.cli import ConfigError, repro_names, run, validate_config
from msgate.gate_model import GateParams
from msgate.thermal import populations_thermal

TWO_PI = 2 * np.pi

PHYSICS = {"nu_hz": 1.232e6, "epsilon_hz": 40e3, "eta": 0.044}
PULSE = {"kind": "blackman_sloped", "t_slope_us": 2.5}


def scenario(experiment, **sections):
    cfg = {"physics": dict(PHYSICS), "pulse": dict(PULSE), "motional": {"fock": 0},
           "experiment": experiment}
    cfg.update(sections)
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def run_cli(tmp_path, command, cfg, *extra, out="out"):
    out_dir = tmp_path / out
    code = run([command, "--config", write_config(tmp_path, cfg), "--out", str(out_dir),
                *extra])
    return code, out_dir


def read_table(out_dir):
    raw = (out_dir / "result.csv").read_bytes()
    with open(out_dir / "result.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return raw, rows[0], rows[1:]


def summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text(encoding="utf-8"))


def test_validate_writes_nothing(tmp_path, capsys):
    code, out_dir = run_cli(tmp_path, "validate", scenario({"type": "evolve"}))
    assert code == 0
    assert not out_dir.exists()
    assert "ok" in capsys.readouterr().out


@pytest.mark.parametrize("name", repro_names())
def test_shipped_configs_validate(name):
    assert run(["validate", "--repro", name]) == 0


@pytest.mark.parametrize("mutate, key", [
    (lambda c: c["physics"].update(bogus=1), "physics.bogus"),
    (lambda c: c.update(extra={}), "extra"),
    (lambda c: c["experiment"].update(shots=10), "experiment.shots"),
    (lambda c: c["physics"].pop("eta"), "physics.eta"),
    (lambda c: c["physics"].update(xi="big"), "physics.xi"),
    (lambda c: c["experiment"].update(tol=1e-3), "experiment.tol"),
    (lambda c: c["motional"].update(window=12), "motional.window"),
    (lambda c: c["pulse"].update(kind="gaussian"), "pulse.kind"),
    (lambda c: c["experiment"].update(type="teleport"), "experiment.type"),
])
def test_schema_errors_name_the_key(tmp_path, capsys, mutate, key):
    cfg = scenario({"type": "evolve"})
    mutate(cfg)
    code, out_dir = run_cli(tmp_path, "simulate", cfg)
    assert code == 2
    assert key in capsys.readouterr().err
    assert not out_dir.exists()


def test_command_must_match_experiment(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "thermal", scenario({"type": "evolve"}))
    assert code == 2
    assert "experiment.type" in capsys.readouterr().err


def test_unknown_repro_and_bad_json(tmp_path):
    assert run(["simulate", "--repro", "no-such-scenario"]) == 2
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert run(["validate", "--config", str(path)]) == 2
    assert run(["validate"]) == 2


def test_grid_objects_are_expanded():
    cfg = validate_config(scenario({"type": "parity_scan",
                                    "grid_rad": {"start": 0, "stop": 1, "num": 5}}))
    assert cfg["experiment"]["grid_rad"] == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ConfigError):
        validate_config(scenario({"type": "parity_scan", "grid_rad": []}))


def test_numerical_failure_exit_code(tmp_path, capsys):
    p = GateParams.at_gate_condition(TWO_PI * 1.232e6, TWO_PI * 20e3, 0.044)
    t = p.t_gate * np.arange(1, 11)
    q2, q1, q0 = populations_thermal(p, 20.0, t)
    data = tmp_path / "degenerate.csv"
    with open(data, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_us", "p0", "p1", "p2"])
        w.writerows(zip(t * 1e6, q0, q1, q2))
    cfg = {"physics": {"nu_hz": 1.232e6, "epsilon_hz": 20e3, "eta": 0.044},
           "experiment": {"type": "fit", "model": "nbar", "data": "degenerate.csv"}}
    code, out_dir = run_cli(tmp_path, "fit", cfg)
    assert code == 3
    s = summary(out_dir)
    assert s["error"]["type"] == "FitError"
    assert "rms_residual" in s["error"]


def test_fit_command_sinusoid(tmp_path):
    phi = np.linspace(0, np.pi, 24, endpoint=False)
    data = tmp_path / "parity.csv"
    with open(data, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phi_rad", "parity"])
        w.writerows(zip(phi, 0.964 * np.sin(2 * phi + 0.3)))
    code, out_dir = run_cli(tmp_path, "fit", {"experiment": {"type": "fit", "model": "sinusoid",
                                                             "data": "parity.csv"}})
    assert code == 0
    _, header, rows = read_table(out_dir)
    assert header == ["param", "value", "stderr"]
    values = {r[0]: float(r[1]) for r in rows}
    assert values["amplitude"] == pytest.approx(0.964, abs=1e-9)


def test_parity_scan_outputs_and_determinism(tmp_path):
    cfg = scenario({"type": "parity_scan", "grid_rad": {"start": 0, "stop": 3.0, "num": 13},
                    "shots": 100, "seed": 5})
    code_a, out_a = run_cli(tmp_path, "parity", cfg, out="a")
    code_b, out_b = run_cli(tmp_path, "parity", cfg, out="b")
    assert code_a == code_b == 0
    raw_a, header, rows = read_table(out_a)
    assert raw_a.startswith(b"phi_rad,parity\r\n")
    assert raw_a == read_table(out_b)[0]
    assert len(rows) == 13
    code_c, out_c = run_cli(tmp_path, "parity", cfg, "--seed", "6", out="c")
    assert code_c == 0 and read_table(out_c)[0] != raw_a
    s = summary(out_a)
    for key in ("version", "config", "derived", "results", "fit", "wall_time_s"):
        assert key in s
    assert s["version"] == __version__
    for key in ("delta_rad_s", "t_gate_s", "lambda_rad_s", "omega_b_rad_s", "omega_r_rad_s"):
        assert key in s["derived"]
    assert s["config"]["physics"]["nu_hz"] == 1.232e6
    assert list(s) == sorted(s)


def test_multi_gate_outputs(tmp_path):
    cfg = scenario({"type": "multi_gate", "n_gates": 7, "trials": 20,
                    "noise": {"coupling_rel_sigma": 0.014, "carrier_error_per_gate": 2e-3}})
    code, out_dir = run_cli(tmp_path, "multi-gate", cfg)
    assert code == 0
    raw, header, rows = read_table(out_dir)
    assert raw.startswith(b"n_gates,fidelity,parity_amplitude\r\n")
    assert [int(r[0]) for r in rows] == list(range(1, 8))


def test_simulate_outputs(tmp_path):
    cfg = scenario({"type": "evolve", "times_us": [5.0, 10.0, 15.0]})
    code, out_dir = run_cli(tmp_path, "simulate", cfg)
    assert code == 0
    raw, header, rows = read_table(out_dir)
    assert raw.startswith(b"t_us,p0,p1,p2\r\n")
    assert [float(r[0]) for r in rows][1:4] == pytest.approx([5.0, 10.0, 15.0])
    s = summary(out_dir)
    assert s["results"]["bell_fidelity"] > 0.99


def test_detuning_scan_outputs(tmp_path):
    cfg = scenario({"type": "detuning_scan", "grid_hz": [-1000, 0, 1000], "tol": 1e-6})
    code, out_dir = run_cli(tmp_path, "scan", cfg, "--jobs", "1")
    assert code == 0
    raw, _, rows = read_table(out_dir)
    assert raw.startswith(b"detuning_hz,p0,p1,p2,fidelity\r\n")
    assert len(rows) == 3


def test_ramsey_outputs(tmp_path):
    cfg = scenario({"type": "ramsey", "residual_shift_hz": 4000.0,
                    "wait_grid_us": {"start": 0, "stop": 250, "num": 11}, "tol": 1e-6})
    code, out_dir = run_cli(tmp_path, "ramsey", cfg)
    assert code == 0
    raw, _, rows = read_table(out_dir)
    assert raw.startswith(b"wait_us,p0,p2\r\n")
    assert summary(out_dir)["results"]["period_us"] == pytest.approx(125.0, rel=0.02)


def test_thermal_repro(tmp_path):
    out_dir = tmp_path / "thermal"
    assert run(["thermal", "--repro", "fig7-thermal", "--out", str(out_dir)]) == 0
    raw, header, rows = read_table(out_dir)
    assert raw.startswith(b"t_us,p0,p1,p2\r\n")
    t = np.array([float(r[0]) for r in rows])
    p1 = np.array([float(r[2]) for r in rows])
    t_end = t[-1]  # the shaped pulse closes the loop at its end
    assert t_end == pytest.approx(summary(out_dir)["pulse"]["t_pulse_s"] * 1e6)
    assert p1[np.abs(t - t_end / 2) < 10].max() > 0.2
    assert p1[-1] < 0.02


@pytest.mark.slow
def test_simulate_repro_ground_state(tmp_path):
    out_dir = tmp_path / "sim"
    assert run(["simulate", "--repro", "sec2.2-fock-fidelity", "--out", str(out_dir)]) == 0
    assert summary(out_dir)["results"]["bell_fidelity"] == pytest.approx(0.9996, abs=5e-4)
