"""Thermal-ensemble observables of the Lamb-Dicke gate in closed form.

For a thermal phonon distribution with mean ``nbar`` the Fock average of
``<n|D(beta)|n>`` is ``exp(-|beta|^2 (nbar + 1/2))``, which lets the motional
trace of ``U(t) rho U(t)^dag`` be taken analytically.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import hilbert
from .propagator import analytic_factors, qubit_gate


@dataclasses.dataclass(frozen=True)
class ThermalSpec:
    """Thermal motional state: mean occupation, weight tail bound and window half-width."""

    nbar: float
    weight_cutoff: float = 1e-4
    window: int = 12

    def __post_init__(self):
        if self.nbar < 0:
            raise ValueError("nbar must be >= 0")
        if not 0 <= self.weight_cutoff < 1:
            raise ValueError("weight_cutoff must lie in [0, 1)")
        if self.window < 4:
            raise ValueError("window must be >= 4")


def thermal_probability(n, nbar):
    """Geometric occupation ``p_n = nbar^n / (nbar + 1)^(n + 1)``."""
    n = np.asarray(n, dtype=float)
    if nbar == 0:
        return np.where(n == 0, 1.0, 0.0)
    return np.exp(n * np.log(nbar) - (n + 1) * np.log1p(nbar))


def thermal_weights(spec):
    """Fock levels and renormalised weights up to cumulative ``1 - weight_cutoff``.

    Returns a list of ``(n, p_n)`` pairs sorted by ``n``.
    """
    if spec.nbar == 0:
        return [(0, 1.0)]
    q = spec.nbar / (spec.nbar + 1)
    if spec.weight_cutoff > 0:
        # smallest n* with 1 - q^(n*+1) >= 1 - cutoff
        n_max = max(0, math.ceil(math.log(spec.weight_cutoff) / math.log(q)) - 1)
    else:
        n_max = max(0, math.ceil(math.log(1e-16) / math.log(q)))
    n = np.arange(n_max + 1)
    p = thermal_probability(n, spec.nbar)
    p /= p.sum()
    return [(int(k), float(w)) for k, w in zip(n, p)]


def laguerre(n, x):
    """Laguerre polynomial ``L_n(x)`` by the three-term recurrence."""
    l0, l1 = np.ones_like(np.asarray(x, dtype=float)), 1.0 - np.asarray(x, dtype=float)
    if n == 0:
        return l0
    for k in range(1, n):
        l0, l1 = l1, ((2 * k + 1 - x) * l1 - k * l0) / (k + 1)
    return l1


def thermal_displacement_factor(alpha, nbar):
    """Thermal average of ``<n|D(alpha)|n>``, i.e. ``exp(-|alpha|^2 (nbar + 1/2))``."""
    return np.exp(-np.abs(alpha) ** 2 * (nbar + 0.5))


def _decay_factors(alpha, nbar):
    a2 = np.abs(alpha) ** 2 * (nbar + 0.5)
    return np.exp(-4 * a2), np.exp(-16 * a2)


def populations_thermal(p, nbar, t, env=None):
    """Populations ``(p2, p1, p0)`` after the gate acts on ``|dd>`` for a time ``t``.

    ``p2`` is the ``|dd>`` population, ``p0`` that of ``|uu>``.  ``t`` may be
    an array.
    """
    f = analytic_factors(p, t, env)
    e4, e16 = _decay_factors(f.alpha, nbar)
    c = np.cos(4 * f.gamma)
    p2 = (3 + e16 + 4 * c * e4) / 8
    p1 = (1 - e16) / 4
    p0 = (3 + e16 - 4 * c * e4) / 8
    return p2, p1, p0


def _a_terms(rho):
    p0, pp, pm = hilbert.sy_projectors()
    a0 = p0 @ rho @ p0 + pp @ rho @ pp + pm @ rho @ pm
    a4 = pp @ rho @ p0 + p0 @ rho @ pp + pm @ rho @ p0 + p0 @ rho @ pm
    a16 = pm @ rho @ pp + pp @ rho @ pm
    return a0, a4, a16


def expectation_thermal(obs, rho_qubits, p, nbar, t, env=None):
    """Expectation of a qubit observable after the gate, motion thermal with ``nbar``.

    ``O(t) = Tr(V^dag O V {A_0 + A_4 E_4 + A_16 E_16})`` with
    ``V = exp(i gamma S_y^2)`` and ``E_k = exp(-k |alpha|^2 (nbar + 1/2))``.
    """
    obs = np.asarray(obs, dtype=complex)
    if obs.shape != (4, 4) or not hilbert.is_hermitian(obs, 1e-12):
        raise ValueError("observable must be a Hermitian 4x4 matrix")
    f = analytic_factors(p, t, env)
    v = qubit_gate(f.gamma)
    obs_v = v.conj().T @ obs @ v
    a0, a4, a16 = _a_terms(np.asarray(rho_qubits, dtype=complex))
    e4, e16 = _decay_factors(f.alpha, nbar)
    return float(np.real(np.trace(obs_v @ (a0 + e4 * a4 + e16 * a16))))


def parity_operator(phi):
    """``P_phi = (cos phi S_x + sin phi S_y)^2 / 2 - 1``."""
    s = hilbert.phi_spin(phi)
    return s @ s / 2 - np.eye(4)


def parity_thermal(phi, p, nbar, t, rho_qubits=None, env=None):
    if rho_qubits is None:
        rho_qubits = np.zeros((4, 4), dtype=complex)
        rho_qubits[hilbert.DD, hilbert.DD] = 1.0
    return expectation_thermal(parity_operator(phi), rho_qubits, p, nbar, t, env)
