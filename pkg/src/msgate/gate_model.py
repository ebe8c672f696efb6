"""Gate parameters, pulse envelopes and the bichromatic-drive Hamiltonian.

All frequencies are angular (rad/s) and all times are in seconds.  The
Hamiltonian is written in the interaction picture of the qubits and the
motional mode::

    H(t) = g(t) J_+ (x) D(i eta e^{i nu t}) + h.c. + 1/2 z(t) S_z

    g(t) = env(t) [Omega_b e^{-i(delta t + zeta)} + Omega_r e^{+i(delta t + zeta)}]
    z(t) = env(t)^2 delta_ac - Delta_global

where ``J_+`` is the (possibly ion-weighted) collective raising operator.
The blue component carries ``Omega_b = Omega (1 + xi)``.
"""

from __future__ import annotations

import dataclasses
import math
from typing import NamedTuple

import numpy as np

from . import hilbert

TWO_PI = 2 * math.pi
BLACKMAN_MEAN = 0.42
BLACKMAN_SQ_MEAN = 0.42**2 + 0.5**2 / 2 + 0.08**2 / 2


@dataclasses.dataclass(frozen=True)
class GateParams:
    """Physical drive and trap parameters (angular frequencies in rad/s).

    ``coupling_ratio`` scales the Rabi frequency of ion 1 by ``sqrt(r)`` and of
    ion 2 by ``1/sqrt(r)``; it is 1 for equal illumination.
    """

    nu: float
    epsilon: float
    eta: float
    omega: float
    xi: float = 0.0
    zeta: float = 0.0
    delta_ac: float = 0.0
    delta_global: float = 0.0
    coupling_ratio: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not abs(self.epsilon) < self.nu:
            raise ValueError("|epsilon| must be smaller than nu")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")
        if not abs(self.xi) < 1:
            raise ValueError("|xi| must be smaller than 1")
        if not self.coupling_ratio > 0:
            raise ValueError("coupling_ratio must be positive")

    @classmethod
    def at_gate_condition(cls, nu, epsilon, eta, **kwargs):
        """Parameters with ``Omega = |epsilon| / (4 eta)`` (maximally entangling)."""
        return cls(nu=nu, epsilon=epsilon, eta=eta, omega=gate_omega(epsilon, eta), **kwargs)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def delta(self):
        return self.nu - self.epsilon

    @property
    def t_gate(self):
        return derived_params(self).t_gate


@dataclasses.dataclass(frozen=True)
class PulseEnvelope:
    """Normalised Rabi-frequency envelope.

    ``blackman_sloped`` rises over ``t_slope`` as the first half of a Blackman
    window, stays at 1 and falls back symmetrically.
    """

    kind: str = "rectangular"
    t_pulse: float = 0.0
    t_slope: float = 0.0

    def __post_init__(self):
        if self.kind not in ("rectangular", "blackman_sloped"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.t_pulse <= 0:
            raise ValueError("t_pulse must be positive")
        if self.t_slope < 0 or 2 * self.t_slope > self.t_pulse * (1 + 1e-12):
            raise ValueError("need 0 <= 2 t_slope <= t_pulse")

    @classmethod
    def for_gate(cls, t_gate, t_slope=0.0, kind=None):
        """Envelope whose pulse area equals that of a ``t_gate`` rectangular pulse.

        The plateau sits at full amplitude and the pulse is lengthened by the
        area missing from the two slopes, ``2 (1 - 0.42) t_slope``.
        """
        if kind is None:
            kind = "blackman_sloped" if t_slope > 0 else "rectangular"
        if kind == "rectangular":
            return cls("rectangular", t_gate, 0.0)
        return cls(kind, t_gate + 2 * (1 - BLACKMAN_MEAN) * t_slope, t_slope)

    @property
    def slope(self):
        return self.t_slope if self.kind == "blackman_sloped" else 0.0

    def __call__(self, t):
        return envelope_value(self, t)

    def area(self):
        """Integral of the envelope over the pulse."""
        return self.t_pulse - 2 * (1 - BLACKMAN_MEAN) * self.slope

    def intensity_area(self):
        """Integral of the squared envelope over the pulse."""
        return self.t_pulse - 2 * (1 - BLACKMAN_SQ_MEAN) * self.slope


@dataclasses.dataclass(frozen=True)
class NoiseModel:
    coupling_rel_sigma: float = 0.0
    carrier_error_per_gate: float = 0.0
    detuning_rms: float = 0.0
    heating_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")
        if self.carrier_error_per_gate > 1:
            raise ValueError("carrier_error_per_gate is a probability")


class DerivedParams(NamedTuple):
    delta: float
    t_gate: float
    lam: float
    chi: float
    omega_b: float
    omega_r: float


def gate_omega(epsilon, eta):
    return abs(epsilon) / (4 * eta)


def derived_params(p):
    if p.epsilon == 0:
        raise ZeroDivisionError("epsilon must be non-zero")
    k = p.eta**2 * p.omega**2
    return DerivedParams(
        delta=p.nu - p.epsilon,
        t_gate=TWO_PI / abs(p.epsilon),
        lam=k / p.epsilon,
        chi=k / p.epsilon**2,
        omega_b=p.omega * (1 + p.xi),
        omega_r=p.omega * (1 - p.xi),
    )


def _blackman_half(x):
    if np.ndim(x) == 0:
        return 0.42 - 0.5 * math.cos(TWO_PI * x) + 0.08 * math.cos(2 * TWO_PI * x)
    return 0.42 - 0.5 * np.cos(TWO_PI * x) + 0.08 * np.cos(2 * TWO_PI * x)


def envelope_value(env, t):
    """Envelope value in [0, 1]; ``t`` may be a scalar or an array."""
    t_arr = np.asarray(t, dtype=float)
    tol = 1e-12 * env.t_pulse
    if np.any(t_arr < -tol) or np.any(t_arr > env.t_pulse + tol):
        raise ValueError("t outside the pulse")
    if env.kind == "rectangular" or env.t_slope == 0:
        out = np.ones_like(t_arr)
    else:
        ts = env.t_slope
        edge = np.minimum(t_arr, env.t_pulse - t_arr)
        x = np.clip(edge / (2 * ts), 0.0, 0.5)
        out = np.where(edge < ts, _blackman_half(x), 1.0)
        out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def stark_compensation_xi(p):
    """Beam imbalance whose carrier light shift cancels ``delta_ac`` over one gate."""
    d = derived_params(p)
    phase = p.delta_ac * d.t_gate
    return (d.delta * p.eta**2 / abs(p.epsilon)) * (phase / math.pi)


def carrier_stark_shift(p):
    """Light shift ``2 (Omega_r^2 - Omega_b^2) / delta = -8 Omega^2 xi / delta``."""
    d = derived_params(p)
    if d.delta == 0:
        raise ZeroDivisionError("delta must be non-zero")
    return 2 * (d.omega_r**2 - d.omega_b**2) / d.delta


def sideband_stark_shift(p, n):
    """Fock-level dependent shift ``(epsilon / 2) xi n`` of an imbalanced drive."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return 0.5 * p.epsilon * p.xi * n


def frequency_compensation(p, env):
    """Global detuning that cancels the pulse-averaged dipole shift ``delta_ac``."""
    return p.delta_ac * env.intensity_area() / env.t_pulse


def ion_couplings(p):
    r = math.sqrt(p.coupling_ratio)
    return r, 1.0 / r


def drive_coefficients(p, env, t):
    """Return ``(g(t), z(t))``: the sigma_+ drive amplitude and the S_z coefficient x 2."""
    d = derived_params(p)
    e = envelope_value(env, t)
    phase = d.delta * t + p.zeta
    g = e * (d.omega_b * np.exp(-1j * phase) + d.omega_r * np.exp(1j * phase))
    z = e * e * p.delta_ac - p.delta_global
    return g, z


def motional_coupling_block(eta, offset, n_fock, pad=8):
    """Window block of ``exp(i eta (a + a^dag))`` for levels ``[offset, offset + n_fock)``.

    The exponential is evaluated on a space padded by ``pad`` levels on each
    side so that matrix elements inside the window are free of truncation
    error; ``pad=0`` gives the plain truncated exponential.
    """
    lo = max(0, offset - pad)
    hi = offset + n_fock + pad
    a = hilbert.annihilation(hi - lo, lo)
    x = (a + a.conj().T).real
    w, v = np.linalg.eigh(x)
    full = (v * np.exp(1j * eta * w)) @ v.T
    k = offset - lo
    return full[k:k + n_fock, k:k + n_fock]


def hamiltonian_full(p, env, t, n_fock, window_offset=0, pad=8):
    """Dense ``H(t)/hbar`` on ``qubits (x) Fock[offset, offset + n_fock)``."""
    if n_fock < 2:
        raise ValueError("n_fock must be >= 2")
    if 4 * p.eta**2 >= n_fock:
        raise hilbert.TruncationError("Fock window too small for the Lamb-Dicke factor")
    g, z = drive_coefficients(p, env, t)
    m = motional_coupling_block(p.eta, window_offset, n_fock, pad)
    ph = np.exp(1j * p.nu * t * np.arange(n_fock))
    d_t = ph[:, None] * m * ph.conj()[None, :]
    jp = hilbert.collective_raising(*ion_couplings(p))
    h = g * np.kron(jp, d_t)
    h = h + h.conj().T
    h += 0.5 * z * np.kron(hilbert.collective_spin("z"), np.eye(n_fock))
    return h


class HamiltonianAction:
    """Matrix-free application of ``H(t)`` to a batch of Fock windows.

    States have shape ``(B, ..., 4, W)``: batch element ``b`` lives on Fock
    levels ``[offsets[b], offsets[b] + W)``.
    """

    def __init__(self, p, env, n_fock, offsets=(0,), pad=8):
        if n_fock < 2:
            raise ValueError("n_fock must be >= 2")
        self.p = p
        self.env = env
        self.n_fock = n_fock
        self.offsets = np.asarray(offsets, dtype=int)
        blocks = np.stack([motional_coupling_block(p.eta, int(o), n_fock, pad)
                           for o in self.offsets])
        self._m_t = np.ascontiguousarray(blocks.transpose(0, 2, 1))
        self._mh_t = np.ascontiguousarray(blocks.conj())
        self._k = np.arange(n_fock)
        self._jp = hilbert.collective_raising(*ion_couplings(p))
        self._jm = self._jp.conj().T
        self._sz = np.array([2.0, 0.0, 0.0, -2.0])
        d = derived_params(p)
        self._delta, self._omega_b, self._omega_r = d.delta, d.omega_b, d.omega_r
        self._t_tol = 1e-12 * env.t_pulse

    def _envelope(self, t):
        env = self.env
        if env.kind == "rectangular" or env.t_slope == 0:
            return 1.0
        edge = min(t, env.t_pulse - t)
        if edge >= env.t_slope:
            return 1.0
        return _blackman_half(max(edge, 0.0) / (2 * env.t_slope))

    def __call__(self, t, psi):
        if not -self._t_tol <= t <= self.env.t_pulse + self._t_tol:
            raise ValueError("t outside the pulse")
        e = self._envelope(t)
        p = self.p
        phase = self._delta * t + p.zeta
        rot = complex(math.cos(phase), -math.sin(phase))
        g = e * (self._omega_b * rot + self._omega_r * rot.conjugate())
        z = e * e * p.delta_ac - p.delta_global
        ph = np.exp(1j * p.nu * t * self._k)
        shape = psi.shape
        flat = (psi * ph.conj()).reshape(shape[0], -1, self.n_fock)
        u = np.matmul(flat, self._m_t).reshape(shape) * ph
        v = np.matmul(flat, self._mh_t).reshape(shape) * ph
        out = np.matmul(g * self._jp, u)
        out += np.matmul(g.conjugate() * self._jm, v)
        out += (0.5 * z) * self._sz[:, None] * psi
        return out
