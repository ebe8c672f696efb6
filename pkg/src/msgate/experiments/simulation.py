"""Numerical single-gate runs: outcomes, Rabi-frequency calibration and the
early-time carrier oscillation analysis."""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.optimize import brentq

from ..gate_model import PulseEnvelope
from ..integrator import evolve_fock_batch
from ..thermal import ThermalSpec, thermal_weights
from .sequences import bell_fidelity_rho, parity_amplitude_rho


@dataclasses.dataclass(frozen=True)
class Fock:
    """Motional Fock state ``|n>``."""

    n: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")


@dataclasses.dataclass
class GateOutcome:
    p0: float
    p1: float
    p2: float
    rho: np.ndarray  # reduced qubit density matrix
    fidelity: float
    parity_amplitude: float
    drift: float


def motional_levels(motional):
    """``(levels, weights, w_min)`` of a Fock or thermal motional state."""
    if isinstance(motional, Fock):
        return [motional.n], np.ones(1), 18
    if isinstance(motional, ThermalSpec):
        w = thermal_weights(motional)
        return [n for n, _ in w], np.array([pn for _, pn in w]), motional.window
    raise TypeError("motional must be Fock or ThermalSpec")


def simulate_gate(p, env, motional=Fock(0), tol=1e-7, qubits="dd", pair="dd"):
    """Integrate one gate pulse and score the result against the Bell target."""
    levels, weights, w_min = motional_levels(motional)
    res = evolve_fock_batch(levels, p, env, tol=tol, w_min=w_min, qubits=qubits)
    pops = weights @ res.pops[:, -1, :]
    rho = np.einsum("n,nij->ij", weights, res.rho)
    return GateOutcome(float(pops[0]), float(pops[1]), float(pops[2]), rho,
                       bell_fidelity_rho(rho, pair), parity_amplitude_rho(rho, pair),
                       res.drift)


def thermal_quantile_levels(nbar, k=8):
    """``k`` Fock levels at the mid-quantiles of a thermal distribution."""
    q = (np.arange(k) + 0.5) / k
    if nbar == 0:
        return [0] * k
    return [int(v) for v in np.floor(np.log(1 - q) / np.log(nbar / (nbar + 1)))]


def calibrate_omega(p, env, levels=(0,), bracket=(0.95, 1.2), tol=1e-6, xtol=1e-4):
    """Rescale the Rabi frequency so the gate ends with ``p0 = p2``.

    The gate condition holds only to leading order in the Lamb-Dicke
    expansion; the full Hamiltonian needs a slightly larger drive to reach
    the maximally entangled point.  The population imbalance at the end of
    the pulse, averaged over ``levels``, is zeroed by a bracketing root
    search on the scale factor.  Returns the rescaled parameters.
    """
    levels = list(levels)

    def imbalance(scale):
        res = evolve_fock_batch(levels, p.replace(omega=p.omega * scale), env, tol=tol,
                                w_min=18)
        m = res.pops[:, -1, :].mean(axis=0)
        return m[2] - m[0]

    lo, hi = bracket
    f_lo, f_hi = imbalance(lo), imbalance(hi)
    if f_lo * f_hi > 0:
        raise ValueError("bracket does not contain the balance point")
    scale = brentq(imbalance, lo, hi, xtol=xtol)
    return p.replace(omega=p.omega * scale)


def early_oscillation(p, env, t_window=5e-6, n_zeta=16, tol=1e-8, per_period=16):
    """Peak-to-peak amplitude of the zeta-averaged populations at ``2 pi / delta``.

    The populations are averaged over ``n_zeta`` equally spaced bichromatic
    phases.  Each averaged population is detrended by a one-period moving
    average (trapezoidal weights, which cancel any ``2 pi / delta``-periodic
    part) and a sinusoid at ``delta`` is fitted to the remainder.  Returns
    ``(amplitude, times, mean)`` where ``amplitude`` is the largest fitted
    peak-to-peak value over the three populations.
    """
    delta = abs(p.delta)
    period = 2 * math.pi / delta
    step = period / per_period
    times = np.arange(1, int(t_window / step) + 1) * step
    acc = None
    for k in range(n_zeta):
        pz = p.replace(zeta=2 * math.pi * k / n_zeta)
        res = evolve_fock_batch([0], pz, env, t_span=(0.0, t_window), tol=tol,
                                sample_times=times, w_min=12)
        acc = res.pops[0] if acc is None else acc + res.pops[0]
    mean = acc / n_zeta
    t = res.times
    w = np.ones(per_period + 1)
    w[0] = w[-1] = 0.5
    w /= per_period
    half = per_period // 2
    tt = t[half:-half]
    design = np.column_stack([np.cos(delta * tt), np.sin(delta * tt), np.ones_like(tt)])
    amps = []
    for c in range(3):
        osc = mean[half:-half, c] - np.convolve(mean[:, c], w, mode="valid")
        coef, *_ = np.linalg.lstsq(design, osc, rcond=None)
        amps.append(2 * math.hypot(coef[0], coef[1]))
    return max(amps), t, mean


def rectangular_like(env):
    """Rectangular pulse of the same duration as ``env``."""
    return PulseEnvelope("rectangular", env.t_pulse, 0.0)
