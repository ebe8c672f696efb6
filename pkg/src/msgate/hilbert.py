"""Dense operators on the two-qubit x truncated-Fock space.

Basis ordering used everywhere in the package::

    (uu, ud, du, dd) x |0>, |1>, ..., |N-1>

with the Fock index varying fastest.  Single-qubit states are
``|u> = (1, 0)`` and ``|d> = (0, 1)``, so that ``sigma_y |d> = -i |u>``.
"""

from __future__ import annotations

import numpy as np

MAX_DIM = 4096

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |u><d|
SIGMA_MINUS = SIGMA_PLUS.T.copy()

# qubit-space basis indices
UU, UD, DU, DD = 0, 1, 2, 3


class TruncationError(ValueError):
    """Raised when a Fock truncation is too small for the requested operator."""


def kron(a, b, max_dim=MAX_DIM):
    """Kronecker product ``a (x) b`` of two square operators."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("kron expects square matrices")
    dim = a.shape[0] * b.shape[0]
    if dim > max_dim:
        raise TruncationError(f"composite dimension {dim} exceeds maximum {max_dim}")
    return np.kron(a, b)


def single_ion(op, ion):
    """Embed a 2x2 operator acting on ion 1 or 2 into the 4x4 qubit space."""
    if ion == 1:
        return np.kron(op, I2)
    if ion == 2:
        return np.kron(I2, op)
    raise ValueError("ion must be 1 or 2")


_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def collective_spin(axis):
    """Collective spin ``S_j = sigma_j^(1) + sigma_j^(2)`` for ``axis`` in x, y, z."""
    try:
        s = _PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown axis {axis!r}") from None
    return single_ion(s, 1) + single_ion(s, 2)


def collective_raising(c1=1.0, c2=1.0):
    """``c1 sigma_+^(1) + c2 sigma_+^(2)``; per-ion couplings default to 1."""
    return c1 * single_ion(SIGMA_PLUS, 1) + c2 * single_ion(SIGMA_PLUS, 2)


def phi_spin(phi):
    """Collective spin along ``cos(phi) x + sin(phi) y``."""
    return np.cos(phi) * collective_spin("x") + np.sin(phi) * collective_spin("y")


def annihilation(n_fock, offset=0):
    """Lowering operator restricted to Fock levels ``[offset, offset + n_fock)``."""
    if n_fock < 1:
        raise ValueError("n_fock must be >= 1")
    levels = np.arange(offset + 1, offset + n_fock)
    return np.diag(np.sqrt(levels).astype(complex), k=1)


def number_operator(n_fock, offset=0):
    return np.diag(np.arange(offset, offset + n_fock).astype(complex))


def displacement_matrix(beta, n_fock, check=True):
    """Truncated displacement operator ``exp(beta a^dag - beta^* a)``.

    The Hermitian generator ``i(beta a^dag - beta^* a)/|beta|`` is
    diagonalised once; the result is exactly unitary in the truncated space
    and accurate away from the top few levels.  Raises
    :class:`TruncationError` unless ``4 |beta|^2 < n_fock``.
    """
    if n_fock < 1:
        raise ValueError("n_fock must be >= 1")
    beta = complex(beta)
    r = abs(beta)
    if check and 4 * r * r >= n_fock:
        raise TruncationError(f"|beta|={r:.3g} too large for n_fock={n_fock}")
    if r == 0.0:
        return np.eye(n_fock, dtype=complex)
    a = annihilation(n_fock)
    u = np.exp(1j * np.angle(beta))
    gen = 1j * (u * a.conj().T - np.conj(u) * a)
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(-1j * r * w)) @ v.conj().T


def sy_projectors(sy=None):
    """Eigenprojectors ``(P_0, P_+2, P_-2)`` of a collective spin with spectrum {2,0,0,-2}.

    Defaults to ``S_y``; a rotated operator such as ``S_y cos psi + S_z sin psi``
    may be passed instead.
    """
    s = collective_spin("y") if sy is None else np.asarray(sy)
    s2 = s @ s
    eye = np.eye(4)
    p0 = eye - s2 / 4
    pp = (s2 + 2 * s) / 8
    pm = (s2 - 2 * s) / 8
    return p0, pp, pm


def spin_displacement(alpha, n_fock, spin=None, check=True):
    """``D(alpha S)`` on the composite space via ``P_0 + P_2 D(2 alpha) + P_-2 D(-2 alpha)``."""
    p0, pp, pm = sy_projectors(spin)
    eye = np.eye(n_fock, dtype=complex)
    return (np.kron(p0, eye)
            + np.kron(pp, displacement_matrix(2 * alpha, n_fock, check))
            + np.kron(pm, displacement_matrix(-2 * alpha, n_fock, check)))


def basis_state(qubits, n, n_fock, offset=0):
    """Product state ``|qubits>|n>`` with ``qubits`` one of 'uu', 'ud', 'du', 'dd'."""
    q = {"uu": UU, "ud": UD, "du": DU, "dd": DD}[qubits]
    k = n - offset
    if not 0 <= k < n_fock:
        raise TruncationError(f"level {n} outside window [{offset}, {offset + n_fock})")
    psi = np.zeros(4 * n_fock, dtype=complex)
    psi[q * n_fock + k] = 1.0
    return psi


def reduced_qubit_density(psi, n_fock):
    """Trace out the motion of a composite pure state (or a batch of them)."""
    m = np.asarray(psi).reshape(*np.shape(psi)[:-1], 4, n_fock)
    return np.einsum("...qk,...rk->...qr", m, m.conj())


def is_hermitian(op, tol=0.0):
    op = np.asarray(op)
    return np.max(np.abs(op - op.conj().T), initial=0.0) <= tol


def spectral_norm(op):
    return np.linalg.norm(op, 2)
