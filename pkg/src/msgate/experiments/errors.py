"""Error-budget contributions."""

from __future__ import annotations

from ..gate_model import PulseEnvelope
from .simulation import Fock, simulate_gate


def heating_error(heating_rate, t_gate):
    """Fidelity loss ``Gamma_h t_gate / 2`` from motional heating during a gate."""
    if heating_rate < 0 or t_gate < 0:
        raise ValueError("inputs must be non-negative")
    return heating_rate * t_gate / 2


def coupling_imbalance_error(ratio, p, env=None, tol=1e-8, motional=None):
    """Bell-fidelity deficit from unequal per-ion Rabi frequencies.

    Ion 1 sees ``Omega sqrt(ratio)`` and ion 2 ``Omega / sqrt(ratio)``; the
    deficit is taken relative to the same simulation at ``ratio = 1``.
    """
    if not 0.5 <= ratio <= 2:
        raise ValueError("ratio must be near 1")
    if env is None:
        env = PulseEnvelope.for_gate(p.t_gate)
    if ratio == 1:
        return 0.0
    motional = Fock(0) if motional is None else motional
    ref = simulate_gate(p.replace(coupling_ratio=1.0), env, motional, tol).fidelity
    out = simulate_gate(p.replace(coupling_ratio=ratio), env, motional, tol).fidelity
    return ref - out
