"""Qubit-space pulse sequences, population binning and Bell-state fidelity."""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .. import hilbert
from ..hilbert import DD, DU, UD, UU


def carrier_pulse(theta, phi):
    """Collective rotation ``exp(-i theta/2 (cos phi S_x + sin phi S_y))``."""
    r = expm(-0.5j * theta * (np.cos(phi) * hilbert.SIGMA_X + np.sin(phi) * hilbert.SIGMA_Y))
    return np.kron(r, r)


def phase_shift_ion1(angle=np.pi):
    """Addressed ``exp(-i angle/2 sigma_z)`` on ion 1."""
    return hilbert.single_ion(expm(-0.5j * angle * hilbert.SIGMA_Z), 1)


def prepare_downup(phi=np.pi / 2):
    """pi/2 on both ions, pi phase shift on ion 1, pi/2 on both: ``|dd> -> |du>``."""
    half = carrier_pulse(np.pi / 2, phi)
    return half @ phase_shift_ion1() @ half


def ket(label):
    v = np.zeros(4, dtype=complex)
    v[{"uu": UU, "ud": UD, "du": DU, "dd": DD}[label]] = 1.0
    return v


def pure_density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def prepare_downup_rho(prep_error=0.0, phi=np.pi / 2):
    """Density matrix of the prepared ``|du>`` state with a preparation error.

    The error moves weight ``prep_error`` uniformly onto the three
    orthogonal basis states, so the preparation fidelity is ``1 - prep_error``.
    """
    if not 0 <= prep_error <= 1:
        raise ValueError("prep_error must lie in [0, 1]")
    psi = prepare_downup(phi) @ ket("dd")
    rho = pure_density(psi)
    return (1 - prep_error) * rho + prep_error * (np.eye(4) - rho) / 3


def populations_binned(state):
    """Fluorescence-binned populations ``(p0, p1, p2)``.

    Accepts a qubit ket (4,), a qubit density matrix (4, 4), a composite ket
    (4 N,) or a composite density matrix (4 N, 4 N).
    """
    a = np.asarray(state)
    if a.ndim == 1:
        w = np.abs(a.reshape(4, -1)) ** 2
        w = w.sum(axis=1)
    elif a.ndim == 2 and a.shape[0] == a.shape[1]:
        d = np.real(np.diag(a))
        w = d.reshape(4, -1).sum(axis=1)
    else:
        raise ValueError("expected a state vector or a square density matrix")
    total = w.sum()
    if abs(total - 1) > 1e-6:
        raise ValueError("state is not normalised")
    return float(w[UU]), float(w[UD] + w[DU]), float(w[DD])


def bell_fidelity(p0, p2, parity_amplitude):
    """``F = (p0 + p2)/2 + A/2`` from populations and the parity-fringe amplitude."""
    for v in (p0, p2, parity_amplitude):
        if not -1e-12 <= v <= 1 + 1e-12:
            raise ValueError("inputs must lie in [0, 1]")
    return (p0 + p2) / 2 + parity_amplitude / 2


_PAIRS = {"dd": (DD, UU), "du": (UD, DU)}


def bell_fidelity_rho(rho, pair="dd"):
    """Phase-insensitive Bell fidelity of a qubit density matrix.

    ``pair='dd'`` scores against ``|dd> + e^{i a}|uu>`` and ``pair='du'``
    against ``|ud> + e^{i a}|du>``, with the phase ``a`` free as in a
    parity-fringe analysis.
    """
    i, j = _PAIRS[pair]
    return float(np.real(rho[i, i] + rho[j, j]) / 2 + abs(rho[i, j]))


def parity_amplitude_rho(rho, pair="dd"):
    i, j = _PAIRS[pair]
    return float(2 * abs(rho[i, j]))


def state_fidelity(rho, psi):
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(psi.conj() @ rho @ psi))


def parity_signal(rho, phi):
    """``<sigma_z sigma_z>`` after a collective pi/2 analysis pulse of phase ``phi``."""
    r = carrier_pulse(np.pi / 2, phi)
    out = r @ rho @ r.conj().T
    d = np.real(np.diag(out))
    return float(d[UU] + d[DD] - d[UD] - d[DU])


def depolarize(rho, weight):
    """Admix the fully mixed qubit state with ``weight``."""
    return (1 - weight) * rho + weight * np.eye(rho.shape[-1]) / rho.shape[-1]
