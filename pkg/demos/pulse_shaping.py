"""Off-resonant carrier excitation: rectangular versus Blackman-sloped pulses.

Populations are averaged over the bichromatic phase and the fast wobble at
the carrier detuning is fitted during the first few microseconds.
"""

import numpy as np

from msgate.experiments import early_oscillation
from msgate.experiments.simulation import rectangular_like
from msgate.gate_model import GateParams, PulseEnvelope

TWO_PI = 2 * np.pi
p = GateParams.at_gate_condition(TWO_PI * 1.232e6, TWO_PI * 40e3, 0.044)
print(f"25 us gate, carrier-detuning period 2 pi / delta = {TWO_PI / p.delta * 1e6:.3f} us")

for slope in (0.5e-6, 1.0e-6, 2.5e-6):
    env = PulseEnvelope.for_gate(p.t_gate, slope)
    amp, _, _ = early_oscillation(p, env)
    print(f"Blackman slope {slope * 1e6:.1f} us: peak-to-peak {amp:.4f}")
amp, _, _ = early_oscillation(p, rectangular_like(env))
print(f"rectangular pulse:      peak-to-peak {amp:.4f}")
