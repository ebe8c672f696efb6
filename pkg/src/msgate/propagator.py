"""Closed-form propagators of the Lamb-Dicke gate Hamiltonian.

``U(t) = D(alpha(t) S_y) exp(i gamma(t) S_y^2)`` with

    alpha(t) = (eta Omega / epsilon) (e^{i epsilon t} - 1)
    gamma(t) = lambda t - chi sin(epsilon t)

and the carrier-corrected form ``exp(-i F S_x) D(alpha S_yp) exp(i gamma S_yp^2)``
with the tilted spin ``S_yp = S_y cos psi + S_z sin psi``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import hilbert
from .gate_model import derived_params, envelope_value


class AnalyticFactors(NamedTuple):
    alpha: complex
    gamma: float
    psi: float
    f_t: float


def analytic_factors(p, t, env=None):
    """``alpha``, ``gamma``, tilt ``psi`` and carrier excursion ``F`` at time ``t``.

    With an envelope the Rabi frequency is ``Omega env(t)`` and ``alpha`` and
    ``gamma`` are obtained by quadrature of the Lamb-Dicke Hamiltonian; ``F``
    and ``psi`` keep their constant-amplitude form.
    """
    d = derived_params(p)
    if d.delta == 0:
        raise ZeroDivisionError("delta must be non-zero")
    psi = 4 * p.omega / d.delta * np.sin(p.zeta)
    f_t = 2 * p.omega / d.delta * (np.sin(d.delta * t + p.zeta) - np.sin(p.zeta))
    if env is None or env.kind == "rectangular":
        alpha = p.eta * p.omega / p.epsilon * (np.exp(1j * p.epsilon * t) - 1)
        gamma = d.lam * t - d.chi * np.sin(p.epsilon * t)
    else:
        alpha, gamma = shaped_factors(p, env, np.atleast_1d(t))
        if np.ndim(t) == 0:
            alpha, gamma = complex(alpha[0]), float(gamma[0])
    return AnalyticFactors(alpha, gamma, psi, f_t)


def shaped_factors(p, env, times, n_grid=40001):
    """``alpha(t)`` and ``gamma(t)`` for an amplitude-modulated Lamb-Dicke drive.

    ``alpha = i eta Omega int env e^{i eps s}`` and
    ``gamma = (eta Omega)^2 int ds int^s ds' env(s) env(s') sin(eps (s - s'))``.
    """
    times = np.asarray(times, dtype=float)
    grid = np.linspace(0.0, env.t_pulse, n_grid)
    e = envelope_value(env, grid)
    eps = p.epsilon
    c = cumulative_trapezoid(e * np.cos(eps * grid), grid, initial=0.0)
    s = cumulative_trapezoid(e * np.sin(eps * grid), grid, initial=0.0)
    kernel = e * (np.sin(eps * grid) * c - np.cos(eps * grid) * s)
    g = cumulative_trapezoid(kernel, grid, initial=0.0)
    k = p.eta * p.omega
    alpha = 1j * k * (np.interp(times, grid, c) + 1j * np.interp(times, grid, s))
    gamma = k * k * np.interp(times, grid, g)
    return alpha, gamma


def _spin_propagator(alpha, gamma, n_fock, spin):
    p0, pp, pm = hilbert.sy_projectors(spin)
    eye = np.eye(n_fock, dtype=complex)
    ph = np.exp(4j * gamma)
    return (np.kron(p0, eye)
            + ph * np.kron(pp, hilbert.displacement_matrix(2 * alpha, n_fock))
            + ph * np.kron(pm, hilbert.displacement_matrix(-2 * alpha, n_fock)))


def propagator_ms(p, t, n_fock, env=None):
    """``D(alpha S_y) exp(i gamma S_y^2)`` on the composite space."""
    f = analytic_factors(p, t, env)
    return _spin_propagator(f.alpha, f.gamma, n_fock, None)


def tilted_spin(psi):
    return hilbert.collective_spin("y") * np.cos(psi) + hilbert.collective_spin("z") * np.sin(psi)


def carrier_rotation(f_t):
    """``exp(-i F S_x)`` on the qubit space."""
    r = np.cos(f_t) * hilbert.I2 - 1j * np.sin(f_t) * hilbert.SIGMA_X
    return np.kron(r, r)


def propagator_mod(p, t, n_fock):
    """Carrier-corrected propagator for a constant-amplitude drive."""
    f = analytic_factors(p, t)
    u = _spin_propagator(f.alpha, f.gamma, n_fock, tilted_spin(f.psi))
    return np.kron(carrier_rotation(f.f_t), np.eye(n_fock)) @ u


def qubit_gate(gamma):
    """``exp(i gamma S_y^2)`` on the qubit space."""
    p0, pp, pm = hilbert.sy_projectors()
    return p0 + np.exp(4j * gamma) * (pp + pm)
