"""Simulation of the bichromatic two-ion entangling gate.

Submodules: ``hilbert`` (operators and states), ``gate_model`` (parameters,
pulse envelopes, full Hamiltonian), ``propagator`` (closed-form
propagators), ``integrator`` (adaptive time evolution), ``thermal``
(thermal-ensemble closed forms), ``experiments`` (sequences, scans, fits)
and ``cli``.
"""

__version__ = "0.1.0"

from .gate_model import GateParams, NoiseModel, PulseEnvelope  # noqa: E402
from .thermal import ThermalSpec  # noqa: E402

__all__ = ["GateParams", "NoiseModel", "PulseEnvelope", "ThermalSpec", "__version__"]
