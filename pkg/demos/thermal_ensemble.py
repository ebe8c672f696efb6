"""Thermal motion: numeric ensemble, closed form, and mean phonon number fit.

The gate closes the phonon loop at the gate time for any mean occupation,
while mid-gate populations depend strongly on it.  Runs in about a minute.
"""

import numpy as np

from msgate.experiments import calibrate_omega, fit_nbar, thermal_quantile_levels
from msgate.gate_model import GateParams, PulseEnvelope
from msgate.integrator import evolve_thermal
from msgate.thermal import ThermalSpec, populations_thermal

TWO_PI = 2 * np.pi
p = GateParams.at_gate_condition(TWO_PI * 1.232e6, TWO_PI * 20e3, 0.044)
env = PulseEnvelope.for_gate(p.t_gate, 2.5e-6)

t = np.linspace(0, env.t_pulse, 9)
print("closed-form p1 during the gate")
print("  t_us  " + "".join(f"nbar={nb:<5g}" for nb in (0, 1, 5, 20)))
for ti in t:
    row = [populations_thermal(p, nb, ti, env)[1] for nb in (0, 1, 5, 20)]
    print(f"{ti * 1e6:6.1f}  " + "".join(f"{v:<10.4f}" for v in row))

# numeric ensemble at nbar = 5, Omega calibrated on the occupied levels
nbar = 5.0
cal = calibrate_omega(p, env, thermal_quantile_levels(nbar))
times = 3 * TWO_PI / p.delta * np.arange(1, 21)
rep = evolve_thermal(cal, env, ThermalSpec(nbar, 1e-3), sample_times=times)
s = rep.samples[1:-1]
q2, q1, q0 = populations_thermal(p, nbar, s[:, 0], env)
print(f"\nmax |numeric - closed form| at nbar = {nbar:g}: "
      f"{np.max(np.abs(s[:, 1:] - np.column_stack([q0, q1, q2]))):.4f}")

fit = fit_nbar(s[:, 0], s[:, 1], s[:, 2], s[:, 3], p, env)
print(f"fitted nbar = {fit.params['nbar']:.2f} (true {nbar:g}), rms residual {fit.rms_residual:.4f}")
