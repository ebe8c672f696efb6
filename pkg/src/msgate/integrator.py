"""Adaptive Runge-Kutta integration of the full gate Hamiltonian.

The solver is the embedded Dormand-Prince 5(4) pair with PI step-size
control.  The step is capped at a twentieth of the trap period so the
``e^{i nu t}`` structure of the Hamiltonian is always resolved.
"""

from __future__ import annotations

import dataclasses
import math
import time as _time
from typing import NamedTuple

import numpy as np

from . import hilbert
from .gate_model import HamiltonianAction
from .thermal import thermal_weights

class IntegrationError(RuntimeError):
    """Step-size underflow or loss of normalisation."""


@dataclasses.dataclass
class EvolveReport:
    final_state: np.ndarray
    samples: np.ndarray  # rows of (t, p0, p1, p2)
    norm_drift: float
    steps_taken: int
    rejected: int = 0
    wall_time: float = 0.0


# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B4


def dopri5(fun, t0, t1, y0, tol=1e-8, h_max=None, h_min=0.0, stops=(), observer=None,
           breaks=()):
    """Integrate ``dy/dt = fun(t, y)`` from ``t0`` to ``t1``.

    ``stops`` are times the solver lands on exactly; ``observer(t, y)`` is
    called at ``t0`` and at every stop.  ``breaks`` are also landed on but
    not observed (use them for kinks of the right-hand side).  Error per unit step is controlled:
    the local error estimate (max-norm over all components) of a step of
    length ``h`` is kept below ``tol * h / (t1 - t0)``, so the accumulated
    error over the whole span stays of order ``tol``.  Returns ``(y,
    accepted, rejected)``.  The per-step bound never drops below a few
    rounding units of the state so very tight ``tol`` does not stall.
    """
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    span = t1 - t0
    h_max = span if h_max is None else min(h_max, span)
    inside = lambda s: t0 + 1e-12 * span < s < t1 - 1e-12 * span  # noqa: E731
    observed = set(s for s in stops if inside(s)) | {t1}
    stops = sorted(observed | set(s for s in breaks if inside(s)))
    y = np.array(y0, dtype=complex, copy=True)
    t = t0
    if observer is not None:
        observer(t, y)
    k1 = fun(t, y)
    scale = np.max(np.abs(k1))
    h = h_max if scale == 0 else min(h_max, 0.1 * tol ** 0.2 / scale)
    err_prev = 1e-4
    accepted = rejected = 0
    k = [None] * 7
    for stop in stops:
        while t < stop:
            last = False
            h_prop = h
            if t + h >= stop - 1e-12 * span:
                h = stop - t
                last = True
            k[0] = k1
            for i in range(1, 7):
                yi = y + h * sum(a * k[j] for j, a in enumerate(_A[i]) if a != 0.0)
                k[i] = fun(t + _C[i] * h, yi)
            y_new = yi  # seventh stage evaluates at the 5th-order solution (FSAL)
            err_vec = h * sum(e * k[j] for j, e in enumerate(_E) if e != 0.0)
            bound = max(tol * h / span, 64 * np.finfo(float).eps * np.max(np.abs(y)))
            err = np.max(np.abs(err_vec)) / bound
            if err <= 1.0:
                t = stop if last else t + h
                y = y_new
                k1 = k[6]
                accepted += 1
                fac = 0.9 * err ** -0.175 * err_prev ** 0.1 if err > 0 else 5.0
                err_prev = max(err, 1e-4)
                h = min(h_max, h * min(5.0, max(0.2, fac)))
                if last:
                    h = max(h, min(h_prop, h_max))
            else:
                rejected += 1
                h *= max(0.2, 0.9 * err ** -0.25)
            if h < h_min:
                raise IntegrationError(f"step size underflow at t={t:.6g} (h={h:.3g})")
        if observer is not None and stop in observed:
            observer(t, y)
    return y, accepted, rejected


def populations(state, n_fock):
    """Binned populations ``(p0, p1, p2)`` of a (batch of) composite state(s)."""
    w = np.sum(np.abs(np.reshape(state, (*np.shape(state)[:-1], 4, n_fock))) ** 2, axis=-1)
    return w[..., hilbert.UU], w[..., hilbert.UD] + w[..., hilbert.DU], w[..., hilbert.DD]


def _sample_times(t0, t1, sample_every, sample_times=None):
    if sample_times is not None:
        return sorted(float(s) for s in sample_times if t0 < s < t1 - 1e-9 * (t1 - t0))
    if not sample_every:
        return []
    n = int(math.floor((t1 - t0) / sample_every + 1e-9))
    stops = [t0 + i * sample_every for i in range(1, n + 1)]
    return [s for s in stops if s < t1 - 1e-9 * (t1 - t0)]


def envelope_breaks(env):
    """Slope/plateau junctions where the envelope is not smooth."""
    if env.slope <= 0:
        return ()
    return (env.slope, env.t_pulse - env.slope)


def step_limits(p):
    period = 2 * math.pi / p.nu
    return period / 20, 1e-4 / p.nu


def evolve(psi0, p, env, t_span=None, tol=1e-8, sample_every=None, n_fock=None,
           offset=0, pad=8, sample_times=None):
    """Integrate the Schroedinger equation for the full Hamiltonian.

    ``psi0`` is a composite state of length ``4 * n_fock`` (Fock levels
    ``[offset, offset + n_fock)``), or a ``(4 * n_fock, k)`` array whose
    columns are evolved together.  Samples are taken at ``t0``, every
    ``sample_every`` (or at the explicit ``sample_times``) and at ``t1``.
    """
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-12, 1e-6]")
    psi0 = np.asarray(psi0, dtype=complex)
    matrix = psi0.ndim == 2
    if n_fock is None:
        n_fock = psi0.shape[0] // 4
    if psi0.shape[0] != 4 * n_fock:
        raise ValueError("state length does not match 4 * n_fock")
    norms0 = np.linalg.norm(psi0, axis=0)
    if np.any(np.abs(norms0 - 1) > 1e-6):
        raise ValueError("initial state must be normalised")
    t0, t1 = (0.0, env.t_pulse) if t_span is None else t_span
    y0 = (psi0.T if matrix else psi0[None]).reshape(1, -1, 4, n_fock)
    action = HamiltonianAction(p, env, n_fock, offsets=(offset,), pad=pad)

    def rhs(t, y):
        return -1j * action(t, y)

    samples = []

    def observe(t, y):
        if not matrix:
            p0, p1, p2 = populations(y[0, 0].reshape(-1), n_fock)
            samples.append((t, p0, p1, p2))

    h_max, h_min = step_limits(p)
    start = _time.perf_counter()
    y, acc, rej = dopri5(rhs, t0, t1, y0, tol, h_max, h_min,
                         _sample_times(t0, t1, sample_every, sample_times), observe,
                         envelope_breaks(env))
    final = y[0].reshape(y.shape[1], -1)
    final = final.T if matrix else final[0]
    drift = float(np.max(np.abs(np.linalg.norm(final, axis=0) - norms0)))
    if drift > 1e-6:
        raise IntegrationError(f"norm drift {drift:.3g} exceeds 1e-6")
    return EvolveReport(final, np.array(samples, dtype=float).reshape(-1, 4), drift, acc,
                        rej, _time.perf_counter() - start)


def window_halfwidth(n, alpha_max, w_min=12):
    """Fock half-window needed to hold ``D(2 alpha)|n>`` for ``|alpha| <= alpha_max``."""
    b = 2 * abs(alpha_max)
    return max(int(w_min), int(math.ceil(2 * b * math.sqrt(n + 1) + b * b + 6)))


def ensemble_windows(levels, alpha_max, w_min):
    """Common window size and per-level offsets for a batch of initial Fock levels."""
    half = [window_halfwidth(n, alpha_max, w_min) for n in levels]
    offsets = [max(0, n - w) for n, w in zip(levels, half)]
    size = max(n + w + 1 - o for n, w, o in zip(levels, half, offsets))
    return size, offsets


class BatchResult(NamedTuple):
    times: np.ndarray
    pops: np.ndarray  # (level, time, (p0, p1, p2))
    rho: np.ndarray  # final reduced qubit density matrix per level
    drift: float


def evolve_fock_batch(levels, p, env, t_span=None, tol=1e-7, sample_every=None,
                      w_min=12, alpha_max=None, qubits="dd", pad=8, group=8,
                      sample_times=None):
    """Evolve ``|qubits>|n>`` for every ``n`` in ``levels``.

    Levels are sorted and integrated in batches of ``group`` sharing one
    window size.  ``qubits`` is a basis label or a normalised 4-vector.
    """
    if alpha_max is None:
        alpha_max = p.eta * p.omega / abs(p.epsilon) * 2
    levels = [int(n) for n in levels]
    t0, t1 = (0.0, env.t_pulse) if t_span is None else t_span
    h_max, h_min = step_limits(p)
    stops = _sample_times(t0, t1, sample_every, sample_times)
    order = sorted(range(len(levels)), key=lambda i: levels[i])
    out = np.zeros((len(levels), len(stops) + 2, 3))
    rho = np.zeros((len(levels), 4, 4), dtype=complex)
    if isinstance(qubits, str):
        q = np.zeros(4, dtype=complex)
        q[{"uu": hilbert.UU, "ud": hilbert.UD, "du": hilbert.DU, "dd": hilbert.DD}[qubits]] = 1
    else:
        q = np.asarray(qubits, dtype=complex)
    times = np.array([t0] + stops + [t1])
    drift = 0.0
    for start in range(0, len(order), group):
        idx = order[start:start + group]
        lv = [levels[i] for i in idx]
        size, offsets = ensemble_windows(lv, alpha_max, w_min)
        action = HamiltonianAction(p, env, size, offsets=offsets, pad=pad)
        y0 = np.zeros((len(lv), 4, size), dtype=complex)
        for b, (n, o) in enumerate(zip(lv, offsets)):
            y0[b, :, n - o] = q
        rows = []

        def observe(t, y):
            w = np.sum(np.abs(y) ** 2, axis=-1)
            rows.append(np.stack([w[:, 0], w[:, 1] + w[:, 2], w[:, 3]], axis=-1))

        def rhs(t, y):
            return -1j * action(t, y)

        y, _, _ = dopri5(rhs, t0, t1, y0, tol, h_max, h_min, stops, observe,
                         envelope_breaks(env))
        norms = np.sqrt(np.sum(np.abs(y) ** 2, axis=(-1, -2)))
        drift = max(drift, float(np.max(np.abs(norms - 1))))
        out[idx] = np.stack(rows, axis=1)
        rho[idx] = np.einsum("bqk,brk->bqr", y, y.conj())
    if drift > 1e-6:
        raise IntegrationError(f"norm drift {drift:.3g} exceeds 1e-6")
    return BatchResult(times, out, rho, drift)


def evolve_thermal(p, env, spec, t_span=None, tol=1e-7, sample_every=None, **kwargs):
    """Thermal-ensemble populations from per-Fock-level windowed evolutions.

    Every level above the weight cutoff is evolved from ``|dd>|n>`` and the
    sampled populations are averaged with the renormalised thermal weights.
    The ``final_state`` of the report holds the per-level final populations.
    """
    weights = thermal_weights(spec)
    levels = [n for n, _ in weights]
    w = np.array([pn for _, pn in weights])
    start = _time.perf_counter()
    times, pops, _, drift = evolve_fock_batch(levels, p, env, t_span, tol, sample_every,
                                           w_min=spec.window, **kwargs)
    mean = np.einsum("n,ntc->tc", w, pops)
    samples = np.column_stack([times, mean])
    return EvolveReport(pops[:, -1, :], samples, drift, len(levels), 0,
                        _time.perf_counter() - start)
