import numpy as np
import pytest

from msgate.gate_model import GateParams, PulseEnvelope

TWO_PI = 2 * np.pi


@pytest.fixture
def p25():
    """25 us gate: nu = 1.232 MHz, epsilon = 40 kHz, eta = 0.044, gate-condition Omega."""
    return GateParams.at_gate_condition(TWO_PI * 1.232e6, TWO_PI * 40e3, 0.044)


@pytest.fixture
def p50():
    """50 us gate at epsilon = 20 kHz."""
    return GateParams.at_gate_condition(TWO_PI * 1.232e6, TWO_PI * 20e3, 0.044)


@pytest.fixture
def shaped():
    def make(p, t_slope=2.5e-6):
        return PulseEnvelope.for_gate(p.t_gate, t_slope)
    return make
