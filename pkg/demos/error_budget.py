"""Error budget: detuning curvature, Ramsey Stark measurement, heating and
repeated gates under Rabi-frequency noise.
"""

import numpy as np

from msgate.experiments import (ScanSpec, calibrate_omega, fit_quadratic_detuning,
                                fit_sinusoid, heating_error, multi_gate, run_scan)
from msgate.gate_model import GateParams, NoiseModel, PulseEnvelope

TWO_PI = 2 * np.pi
p50 = GateParams.at_gate_condition(TWO_PI * 1.232e6, TWO_PI * 20e3, 0.044)
env50 = PulseEnvelope.for_gate(p50.t_gate, 2.5e-6)

# fidelity versus a global laser detuning
grid = tuple(np.linspace(-1000, 1000, 9))
rows = run_scan(ScanSpec("global_detuning", grid), calibrate_omega(p50, env50), env50)
c = fit_quadratic_detuning(grid, [r["fidelity"] for r in rows]).params["curvature"]
print(f"detuning curvature {c:.2e} / Hz^2 -> 160 Hz rms costs {abs(c) * 160**2:.1e}")

# Ramsey: two gates separated by a wait reveal a residual light shift
p25 = GateParams.at_gate_condition(TWO_PI * 1.232e6, TWO_PI * 40e3, 0.044)
env25 = PulseEnvelope.for_gate(p25.t_gate, 2.5e-6)
waits = tuple(np.linspace(0, 600, 25))
rows = run_scan(ScanSpec("wait_time", waits, residual_shift_hz=1940.0), p25, env25)
fit = fit_sinusoid(waits, [r["p0"] for r in rows], frequency=None, offset=True)
print(f"Ramsey period {TWO_PI / fit.params['frequency']:.1f} us for a 1.94 kHz shift")

print(f"heating at 3 quanta/s over 50 us: {heating_error(3.0, 50e-6):.1e}")

noise = NoiseModel(coupling_rel_sigma=1.4e-2, carrier_error_per_gate=2e-3, seed=1)
fit, rows = multi_gate(21, p50, env50, noise, trials=300)
print("gates  fidelity  parity amplitude")
for r in rows[::4]:
    print(f"{r['n_gates']:5d}  {r['fidelity']:.3f}     {r['parity_amplitude']:.3f}")
print(f"decay model {fit.model}, linear/Gaussian residual ratio {fit.info['residual_ratio']:.1f}")
