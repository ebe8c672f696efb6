"""Command-line front end.

Usage::

    msgate <command> (--config FILE | --repro NAME) [--out DIR] [--jobs N] [--seed N]

Commands: simulate, scan, ramsey, parity, multi-gate, thermal, fit, validate.
Every run writes ``<out>/result.csv`` and ``<out>/summary.json``.  Exit
codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import time
from importlib import resources

import numpy as np

from . import __version__
from .gate_model import (TWO_PI, GateParams, NoiseModel, PulseEnvelope, carrier_stark_shift,
                         derived_params, frequency_compensation, gate_omega,
                         sideband_stark_shift)
from .integrator import IntegrationError, evolve_fock_batch
from .thermal import ThermalSpec, populations_thermal
from .experiments import (COLUMNS, FitError, Fock, ScanSpec, bell_fidelity, bell_fidelity_rho,
                          calibrate_omega, fit_nbar, fit_quadratic_detuning, fit_sinusoid,
                          multi_gate, parity_amplitude_rho, run_scan, simulate_gate,
                          thermal_quantile_levels)
from .experiments.simulation import motional_levels

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

COMMANDS = {
    "simulate": ("evolve",),
    "scan": ("detuning_scan", "parity_scan", "ramsey", "multi_gate"),
    "ramsey": ("ramsey",),
    "parity": ("parity_scan",),
    "multi-gate": ("multi_gate",),
    "thermal": ("thermal_populations",),
    "fit": ("fit",),
    "validate": None,
}


class ConfigError(ValueError):
    """Schema violation; the message names the offending key."""


# ---------------------------------------------------------------- schema

_NUM = (int, float)
_PHYSICS = {
    "nu_hz": _NUM, "epsilon_hz": _NUM, "eta": _NUM, "omega_hz": _NUM, "xi": _NUM,
    "zeta": _NUM, "delta_ac_hz": _NUM + (str,), "delta_global_hz": _NUM,
    "coupling_ratio": _NUM, "calibrate_omega": bool, "stark_compensation": str,
    "sideband_shift_n": int,
}
_PHYSICS_REQUIRED = ("nu_hz", "epsilon_hz", "eta")
_PULSE = {"kind": str, "t_slope_us": _NUM, "t_pulse_us": _NUM}
_MOTIONAL = {"fock": int, "thermal": _NUM, "cutoff": _NUM, "window": int}
_OUTPUT = {"directory": str, "formats": list}
_NOISE = {"coupling_rel_sigma": _NUM, "carrier_error_per_gate": _NUM, "detuning_rms_hz": _NUM,
          "heating_rate": _NUM}
_GRID = {"start": _NUM, "stop": _NUM, "num": int}
_EXPERIMENTS = {
    "evolve": {"tol": _NUM, "sample_every_us": _NUM, "times_us": (list, dict)},
    "detuning_scan": {"grid_hz": (list, dict), "shots": int, "seed": int, "tol": _NUM},
    "parity_scan": {"grid_rad": (list, dict), "shots": int, "seed": int, "tol": _NUM},
    "ramsey": {"wait_grid_us": (list, dict), "residual_shift_hz": _NUM, "shots": int,
               "seed": int, "tol": _NUM},
    "multi_gate": {"n_gates": int, "trials": int, "seed": int, "initial": str,
                   "noise": dict},
    "thermal_populations": {"times_us": (list, dict), "method": str, "tol": _NUM},
    "fit": {"model": str, "data": str, "nbar_max": _NUM},
}
_TOP = {"physics": dict, "pulse": dict, "motional": dict, "experiment": dict, "output": dict}


def _check_section(section, values, allowed, required=()):
    if not isinstance(values, dict):
        raise ConfigError(f"{section}: expected an object")
    for key, val in values.items():
        if key not in allowed:
            raise ConfigError(f"{section}.{key}: unknown key")
        types = allowed[key]
        if isinstance(val, bool) and types is not bool:
            raise ConfigError(f"{section}.{key}: wrong type")
        if not isinstance(val, types):
            raise ConfigError(f"{section}.{key}: wrong type")
    for key in required:
        if key not in values:
            raise ConfigError(f"{section}.{key}: required key missing")


def _grid(section, key, value):
    if isinstance(value, dict):
        _check_section(f"{section}.{key}", value, _GRID, ("start", "stop", "num"))
        if value["num"] < 1:
            raise ConfigError(f"{section}.{key}.num: must be positive")
        return [float(v) for v in np.linspace(value["start"], value["stop"], value["num"])]
    if not value or not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in value):
        raise ConfigError(f"{section}.{key}: expected a non-empty list of numbers")
    return [float(v) for v in value]


def validate_config(cfg):
    """Check a configuration tree and return a normalised deep copy."""
    if not isinstance(cfg, dict):
        raise ConfigError("<root>: expected an object")
    cfg = copy.deepcopy(cfg)
    for key, val in cfg.items():
        if key not in _TOP:
            raise ConfigError(f"{key}: unknown key")
        if not isinstance(val, dict):
            raise ConfigError(f"{key}: expected an object")
    if "experiment" not in cfg:
        raise ConfigError("experiment: required key missing")
    exp = cfg["experiment"]
    kind = exp.get("type")
    if kind not in _EXPERIMENTS:
        raise ConfigError(f"experiment.type: must be one of {sorted(_EXPERIMENTS)}")
    _check_section("experiment", {k: v for k, v in exp.items() if k != "type"},
                   _EXPERIMENTS[kind])
    if "output" in cfg:
        _check_section("output", cfg["output"], _OUTPUT)
    if kind == "fit":
        if "model" not in exp or exp["model"] not in ("sinusoid", "quadratic", "nbar"):
            raise ConfigError("experiment.model: must be sinusoid, quadratic or nbar")
        if "data" not in exp:
            raise ConfigError("experiment.data: required key missing")
        if exp["model"] != "nbar":
            return cfg
    phys = cfg.get("physics")
    if phys is None:
        raise ConfigError("physics: required key missing")
    _check_section("physics", phys, _PHYSICS, _PHYSICS_REQUIRED)
    if isinstance(phys.get("delta_ac_hz"), str) and phys["delta_ac_hz"] != "closure":
        raise ConfigError("physics.delta_ac_hz: number or 'closure'")
    if phys.get("stark_compensation", "none") not in ("none", "frequency"):
        raise ConfigError("physics.stark_compensation: must be 'none' or 'frequency'")
    pulse = cfg.setdefault("pulse", {})
    _check_section("pulse", pulse, _PULSE)
    pulse.setdefault("kind", "blackman_sloped" if pulse.get("t_slope_us", 0) > 0
                     else "rectangular")
    if pulse["kind"] not in ("rectangular", "blackman_sloped"):
        raise ConfigError("pulse.kind: must be rectangular or blackman_sloped")
    mot = cfg.setdefault("motional", {"fock": 0})
    _check_section("motional", mot, _MOTIONAL)
    if ("fock" in mot) == ("thermal" in mot):
        raise ConfigError("motional: give exactly one of fock or thermal")
    if "fock" in mot and (set(mot) - {"fock"}):
        raise ConfigError(f"motional.{sorted(set(mot) - {'fock'})[0]}: only valid with thermal")
    if "tol" in exp and not 1e-12 <= exp["tol"] <= 1e-6:
        raise ConfigError("experiment.tol: must lie in [1e-12, 1e-6]")
    if "noise" in exp:
        _check_section("experiment.noise", exp["noise"], _NOISE)
    for key in ("grid_hz", "grid_rad", "wait_grid_us", "times_us"):
        if key in exp:
            exp[key] = _grid("experiment", key, exp[key])
    try:
        build_params(cfg, calibrate=False)
        build_envelope(cfg, build_params(cfg, calibrate=False))
        build_motional(cfg)
    except (ValueError, ZeroDivisionError) as err:
        raise ConfigError(f"physics: {err}") from err
    return cfg


# ---------------------------------------------------------------- builders

def build_params(cfg, calibrate=True, env=None):
    """``GateParams`` from the physics section (Hz converted to rad/s)."""
    ph = cfg["physics"]
    nu, eps, eta = TWO_PI * ph["nu_hz"], TWO_PI * ph["epsilon_hz"], ph["eta"]
    omega = TWO_PI * ph["omega_hz"] if "omega_hz" in ph else gate_omega(eps, eta)
    p = GateParams(nu, eps, eta, omega, xi=ph.get("xi", 0.0), zeta=ph.get("zeta", 0.0),
                   delta_global=TWO_PI * ph.get("delta_global_hz", 0.0),
                   coupling_ratio=ph.get("coupling_ratio", 1.0))
    if calibrate and ph.get("calibrate_omega", False):
        env = build_envelope(cfg, p) if env is None else env
        mot = cfg["motional"]
        levels = [0] if "fock" in mot else thermal_quantile_levels(mot["thermal"])
        cal = calibrate_omega(p.replace(xi=0.0, delta_global=0.0), env, levels)
        p = p.replace(omega=cal.omega)
    dac = ph.get("delta_ac_hz", 0.0)
    p = p.replace(delta_ac=-carrier_stark_shift(p) if dac == "closure" else TWO_PI * dac)
    if ph.get("stark_compensation", "none") == "frequency":
        env = build_envelope(cfg, p) if env is None else env
        p = p.replace(delta_global=p.delta_global + frequency_compensation(p, env))
    if "sideband_shift_n" in ph:
        p = p.replace(delta_global=p.delta_global + sideband_stark_shift(p, ph["sideband_shift_n"]))
    return p


def build_envelope(cfg, p):
    pu = cfg.get("pulse", {})
    slope = pu.get("t_slope_us", 0.0) * 1e-6
    if "t_pulse_us" in pu:
        return PulseEnvelope(pu.get("kind", "rectangular"), pu["t_pulse_us"] * 1e-6, slope)
    return PulseEnvelope.for_gate(p.t_gate, slope, pu.get("kind"))


def build_motional(cfg):
    mot = cfg.get("motional", {"fock": 0})
    if "fock" in mot:
        return Fock(mot["fock"])
    return ThermalSpec(mot["thermal"], mot.get("cutoff", 1e-4), mot.get("window", 12))


def build_noise(exp):
    nz = exp.get("noise", {})
    return NoiseModel(nz.get("coupling_rel_sigma", 0.0), nz.get("carrier_error_per_gate", 0.0),
                      TWO_PI * nz.get("detuning_rms_hz", 0.0), nz.get("heating_rate", 0.0),
                      exp.get("seed", 0))


def derived_summary(p):
    d = derived_params(p)
    return {"delta_rad_s": d.delta, "t_gate_s": d.t_gate, "lambda_rad_s": d.lam,
            "omega_rad_s": p.omega, "omega_b_rad_s": d.omega_b, "omega_r_rad_s": d.omega_r,
            "delta_ac_rad_s": p.delta_ac, "delta_global_rad_s": p.delta_global}


# ---------------------------------------------------------------- runners

def _bell_summary(rho):
    return {"bell_fidelity": bell_fidelity_rho(rho), "parity_amplitude": parity_amplitude_rho(rho)}


def run_evolve(cfg, p, env, jobs):
    exp = cfg["experiment"]
    mot = build_motional(cfg)
    tol = exp.get("tol", 1e-7)
    times = None
    if "times_us" in exp:
        times = np.asarray(exp["times_us"]) * 1e-6
    levels, weights, w_min = motional_levels(mot)
    every = exp.get("sample_every_us", env.t_pulse * 1e6 / 50) * 1e-6
    res = evolve_fock_batch(levels, p, env, tol=tol, w_min=w_min,
                            sample_every=None if times is not None else every,
                            sample_times=times)
    mean = np.einsum("n,ntc->tc", weights, res.pops)
    rho = np.einsum("n,nij->ij", weights, res.rho)
    rows = [{"t_us": t * 1e6, "p0": m[0], "p1": m[1], "p2": m[2]}
            for t, m in zip(res.times, mean)]
    final = mean[-1]
    results = {"p0": final[0], "p1": final[1], "p2": final[2], **_bell_summary(rho),
               "norm_drift": res.drift}
    return COLUMNS["time"], rows, results, None


def _scan(cfg, p, env, jobs, variable, grid_key, extra=None):
    exp = cfg["experiment"]
    spec = ScanSpec(variable, tuple(exp[grid_key]), exp.get("shots"), exp.get("seed", 0),
                    **(extra or {}))
    rows = run_scan(spec, p, env, build_motional(cfg), exp.get("tol", 1e-7), jobs)
    return COLUMNS[variable], rows


def run_detuning(cfg, p, env, jobs):
    header, rows = _scan(cfg, p, env, jobs, "global_detuning", "grid_hz")
    results, fit = {}, None
    if len(rows) >= 5:
        fit = fit_quadratic_detuning([r["detuning_hz"] for r in rows],
                                     [r["fidelity"] for r in rows]).as_dict()
        results["error_at_160hz_rms"] = abs(fit["params"]["curvature"]) * 160.0 ** 2
    best = max(rows, key=lambda r: r["fidelity"])
    results["best_fidelity"] = best["fidelity"]
    results["best_detuning_hz"] = best["detuning_hz"]
    return header, rows, results, fit


def run_parity(cfg, p, env, jobs):
    header, rows = _scan(cfg, p, env, jobs, "analysis_phase", "grid_rad")
    out = simulate_gate(p, env, build_motional(cfg), cfg["experiment"].get("tol", 1e-7))
    fit = fit_sinusoid([r["phi_rad"] for r in rows], [r["parity"] for r in rows])
    a = min(fit.params["amplitude"], 1.0)
    results = {"p0": out.p0, "p1": out.p1, "p2": out.p2,
               "bell_fidelity": bell_fidelity(min(out.p0, 1.0), min(out.p2, 1.0), a)}
    return header, rows, results, fit.as_dict()


def run_ramsey(cfg, p, env, jobs):
    exp = cfg["experiment"]
    header, rows = _scan(cfg, p, env, jobs, "wait_time", "wait_grid_us",
                         {"residual_shift_hz": exp.get("residual_shift_hz", 0.0)})
    fit = fit_sinusoid([r["wait_us"] for r in rows], [r["p0"] for r in rows],
                       frequency=None, offset=True)
    period = TWO_PI / fit.params["frequency"]
    results = {"period_us": period, "light_shift_hz": 1e6 / (2 * period)}
    return header, rows, results, fit.as_dict()


def run_multi_gate(cfg, p, env, jobs):
    exp = cfg["experiment"]
    fit, rows = multi_gate(exp.get("n_gates", 21), p, env, build_noise(exp),
                           exp.get("trials", 200), exp.get("initial", "dd"))
    last = rows[-1]
    odd = [r for r in rows if r["n_gates"] % 2]
    results = {"final_fidelity": last["fidelity"], "last_odd_fidelity": odd[-1]["fidelity"]}
    return COLUMNS["gate_count"], rows, results, None if fit is None else fit.as_dict()


def run_thermal(cfg, p, env, jobs):
    exp = cfg["experiment"]
    mot = build_motional(cfg)
    if not isinstance(mot, ThermalSpec):
        raise ConfigError("motional.thermal: required for thermal populations")
    times = np.asarray(exp.get("times_us", list(np.linspace(0, env.t_pulse * 1e6, 41))))
    if exp.get("method", "closed_form") == "closed_form":
        p2, p1, p0 = populations_thermal(p, mot.nbar, times * 1e-6, env)
        pops = np.column_stack([p0, p1, p2])
    elif exp["method"] == "numeric":
        rows = run_scan(ScanSpec("time", tuple(times)), p, env, mot, exp.get("tol", 1e-7))
        pops = np.array([[r["p0"], r["p1"], r["p2"]] for r in rows])
    else:
        raise ConfigError("experiment.method: must be closed_form or numeric")
    rows = [{"t_us": t, "p0": a, "p1": b, "p2": c} for t, (a, b, c) in zip(times, pops)]
    results = {"p1_max": float(pops[:, 1].max()), "p1_final": float(pops[-1, 1])}
    return COLUMNS["time"], rows, results, None


def _read_csv(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as err:
        raise ConfigError(f"experiment.data: {err}") from err
    if not rows:
        raise ConfigError("experiment.data: no rows")
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def run_fit(cfg, base_dir):
    exp = cfg["experiment"]
    path = exp["data"]
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    data = _read_csv(path)
    model = exp["model"]
    need = {"sinusoid": ("phi_rad", "parity"), "quadratic": ("detuning_hz", "fidelity"),
            "nbar": ("t_us", "p0", "p1", "p2")}[model]
    for col in need:
        if col not in data:
            raise ConfigError(f"experiment.data: column {col} missing")
    if model == "sinusoid":
        fit = fit_sinusoid(data["phi_rad"], data["parity"])
    elif model == "quadratic":
        fit = fit_quadratic_detuning(data["detuning_hz"], data["fidelity"])
    else:
        p = build_params(cfg, calibrate=False)
        env = build_envelope(cfg, p)
        env = None if env.kind == "rectangular" else env
        fit = fit_nbar(data["t_us"] * 1e-6, data["p0"], data["p1"], data["p2"], p, env,
                       exp.get("nbar_max", 200.0))
    rows = [{"param": k, "value": v, "stderr": fit.stderr.get(k, float("nan"))}
            for k, v in fit.params.items()]
    return ("param", "value", "stderr"), rows, {}, fit.as_dict()


RUNNERS = {"evolve": run_evolve, "detuning_scan": run_detuning, "parity_scan": run_parity,
           "ramsey": run_ramsey, "multi_gate": run_multi_gate,
           "thermal_populations": run_thermal}


# ---------------------------------------------------------------- io

def repro_names():
    files = resources.files("msgate.repro").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def load_repro(name):
    path = resources.files("msgate.repro") / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"--repro: unknown name {name!r} (available: {', '.join(repro_names())})")
    return json.loads(path.read_text(encoding="utf-8"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([repr(float(r[k])) if isinstance(r[k], float) else r[k]
                             for k in header])


def write_summary(path, summary):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def build_parser():
    parser = argparse.ArgumentParser(prog="msgate", description="Two-ion gate simulator")
    parser.add_argument("command", choices=sorted(COMMANDS))
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON scenario file")
    src.add_argument("--repro", help="shipped scenario name")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes for scans")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--version", action="version", version=__version__)
    return parser


def _load(args):
    if args.repro:
        return load_repro(args.repro), os.getcwd()
    try:
        with open(args.config, encoding="utf-8") as fh:
            return json.load(fh), os.path.dirname(os.path.abspath(args.config))
    except OSError as err:
        raise ConfigError(f"--config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"--config: invalid JSON ({err})") from err


def run(argv=None):
    """Parse ``argv``, run the command and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code == 0 else EXIT_CONFIG
    try:
        raw, base_dir = _load(args)
        cfg = validate_config(raw)
        kind = cfg["experiment"]["type"]
        allowed = COMMANDS[args.command]
        if allowed is not None and kind not in allowed:
            raise ConfigError(f"experiment.type: {kind!r} does not match command "
                              f"{args.command!r}")
        if args.seed is not None:
            cfg["experiment"]["seed"] = args.seed
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs: must be positive")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"validate: ok ({kind})")
        return EXIT_OK

    out_dir = args.out or cfg.get("output", {}).get("directory", "msgate-out")
    os.makedirs(out_dir, exist_ok=True)
    summary = {"version": __version__, "command": args.command, "config": cfg}
    start = time.perf_counter()
    code = EXIT_OK
    header, rows = ("t_us", "p0", "p1", "p2"), []
    try:
        if kind == "fit":
            header, rows, results, fit = run_fit(cfg, base_dir)
            if cfg["experiment"]["model"] == "nbar":
                summary["derived"] = derived_summary(build_params(cfg, calibrate=False))
        else:
            p0 = build_params(cfg, calibrate=False)
            env = build_envelope(cfg, p0)
            p = build_params(cfg, calibrate=True, env=env)
            summary["derived"] = derived_summary(p)
            summary["pulse"] = {"kind": env.kind, "t_pulse_s": env.t_pulse,
                                "t_slope_s": env.slope}
            header, rows, results, fit = RUNNERS[kind](cfg, p, env, args.jobs)
        summary["results"] = results
        if fit is not None:
            summary["fit"] = fit
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, FitError, np.linalg.LinAlgError, ArithmeticError,
            ValueError) as err:
        summary["error"] = {"type": type(err).__name__, "message": str(err)}
        if isinstance(err, FitError):
            summary["error"]["rms_residual"] = err.rms_residual
        code = EXIT_NUMERIC
    summary["wall_time_s"] = time.perf_counter() - start
    write_csv(os.path.join(out_dir, "result.csv"), header, rows)
    write_summary(os.path.join(out_dir, "summary.json"), summary)
    if code == EXIT_OK:
        shown = ", ".join(f"{k}={v:.6g}" for k, v in summary["results"].items()
                          if isinstance(v, (int, float)))
        print(f"{args.command}: {shown} ({summary['wall_time_s']:.1f} s)")
    else:
        print(f"{args.command}: failed: {summary['error']['message']}", file=sys.stderr)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
