"""Parity fringes with shot noise and the Bell-fidelity estimate built from them.

Mimics the analysis of a measured gate: rotate both qubits by a pi/2 pulse of
phase phi, record the parity, fit its amplitude, and combine it with the
measured populations.
"""

import numpy as np

from msgate.experiments import (ScanSpec, bell_fidelity, calibrate_omega, fit_sinusoid,
                                run_scan, simulate_gate)
from msgate.gate_model import GateParams, PulseEnvelope

TWO_PI = 2 * np.pi
p = GateParams.at_gate_condition(TWO_PI * 1.232e6, TWO_PI * 40e3, 0.044)
env = PulseEnvelope.for_gate(p.t_gate, 2.5e-6)
p = calibrate_omega(p, env)

out = simulate_gate(p, env)
print(f"noise-free gate: p0 {out.p0:.4f}, p1 {out.p1:.1e}, p2 {out.p2:.4f}, "
      f"parity amplitude {out.parity_amplitude:.4f}, fidelity {out.fidelity:.4f}")

phi = tuple(np.linspace(0, np.pi, 24, endpoint=False))
rows = run_scan(ScanSpec("analysis_phase", phi, shots=200, seed=11), p, env)
fit = fit_sinusoid(phi, [r["parity"] for r in rows], offset=True)
amp = fit.params["amplitude"]
print(f"200 shots per point: fitted amplitude {amp:.3f} +- {fit.stderr['amplitude']:.3f}")
print(f"fidelity estimate from the fringe: {bell_fidelity(out.p0, out.p2, min(amp, 1.0)):.4f}")

# with measured populations p0 + p2 = 0.985 and amplitude 0.964
print(f"bell_fidelity(0.4925, 0.4925, 0.964) = {bell_fidelity(0.4925, 0.4925, 0.964):.4f}")
