"""Parameter scans, the Ramsey light-shift sequence and gate concatenation."""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.linalg import expm

from .. import hilbert
from ..gate_model import TWO_PI, NoiseModel
from ..integrator import IntegrationError, ensemble_windows, evolve, evolve_fock_batch
from ..propagator import analytic_factors
from .errors import heating_error
from .fitting import fit_gate_decay
from .sequences import (bell_fidelity_rho, carrier_pulse, depolarize, parity_amplitude_rho,
                        parity_signal, populations_binned)
from .simulation import Fock, motional_levels, simulate_gate

VARIABLES = ("global_detuning", "analysis_phase", "wait_time", "gate_count", "time")

# grid units: Hz, rad, us, gates, us
COLUMNS = {
    "global_detuning": ("detuning_hz", "p0", "p1", "p2", "fidelity"),
    "analysis_phase": ("phi_rad", "parity"),
    "wait_time": ("wait_us", "p0", "p2"),
    "gate_count": ("n_gates", "fidelity", "parity_amplitude"),
    "time": ("t_us", "p0", "p1", "p2"),
}


@dataclasses.dataclass(frozen=True)
class ScanSpec:
    """One scanned variable.

    ``residual_shift_hz`` is the uncompensated qubit light shift that acts
    during the wait of a ``wait_time`` scan; ``noise`` and ``trials`` feed a
    ``gate_count`` scan.
    """

    variable: str
    grid: tuple
    shots: int | None = None
    seed: int = 0
    residual_shift_hz: float = 0.0
    noise: NoiseModel = NoiseModel()
    trials: int = 200

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("grid must be a non-empty 1-D sequence")
        d = np.diff(grid)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("grid must be strictly monotone")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be positive")
        if self.variable == "gate_count" and (np.any(grid < 1) or np.any(grid % 1)):
            raise ValueError("gate counts must be positive integers")
        object.__setattr__(self, "grid", tuple(float(g) for g in grid))


def point_rng(seed, index):
    """Independent generator for grid point ``index``."""
    return np.random.default_rng([int(seed), int(index)])


def resample(pops, shots, rng):
    """Binned populations estimated from ``shots`` projective measurements."""
    pops = np.clip(np.asarray(pops, dtype=float), 0, None)
    counts = rng.multinomial(shots, pops / pops.sum())
    return counts / shots


def _detuning_point(args):
    p, env, motional, tol, x = args
    pd = p.replace(delta_global=p.delta_global + TWO_PI * x)
    out = simulate_gate(pd, env, motional, tol)
    return out.p0, out.p1, out.p2, out.rho[hilbert.DD, hilbert.UU]


def _map(func, items, jobs):
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [func(a) for a in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(func, items))


def run_scan(spec, p, env, motional=Fock(0), tol=1e-7, jobs=1):
    """Run a scan and return a list of row dictionaries.

    Column names follow ``COLUMNS[spec.variable]``.  With ``spec.shots``
    set the populations of each row are resampled using a generator seeded
    by ``(spec.seed, row index)``, so tables do not depend on ``jobs``.
    """
    grid = list(spec.grid)
    v = spec.variable
    rows = []
    if v == "global_detuning":
        results = _map(_detuning_point, [(p, env, motional, tol, x) for x in grid], jobs)
        for i, (x, (p0, p1, p2, coh)) in enumerate(zip(grid, results)):
            if spec.shots:
                p0, p1, p2 = resample((p0, p1, p2), spec.shots, point_rng(spec.seed, i))
            rows.append({"detuning_hz": x, "p0": p0, "p1": p1, "p2": p2,
                         "fidelity": (p0 + p2) / 2 + abs(coh)})
    elif v == "analysis_phase":
        rho = simulate_gate(p, env, motional, tol).rho
        for i, phi in enumerate(grid):
            if spec.shots:
                r = carrier_pulse(np.pi / 2, phi)
                q0, q1, q2 = resample(populations_binned(r @ rho @ r.conj().T), spec.shots,
                                      point_rng(spec.seed, i))
                parity = q0 + q2 - q1
            else:
                parity = parity_signal(rho, phi)
            rows.append({"phi_rad": phi, "parity": parity})
    elif v == "wait_time":
        waits = np.asarray(grid) * 1e-6
        pops = ramsey(p, env, TWO_PI * spec.residual_shift_hz, waits, motional, tol)
        for i, (w, pp) in enumerate(zip(grid, pops)):
            if spec.shots:
                pp = resample(pp, spec.shots, point_rng(spec.seed, i))
            rows.append({"wait_us": w, "p0": float(pp[0]), "p2": float(pp[2])})
    elif v == "gate_count":
        counts = [int(g) for g in grid]
        _, table = multi_gate(max(counts), p, env, spec.noise, spec.trials, counts=counts,
                              fit=False)
        rows = table
    else:
        times = np.asarray(grid) * 1e-6
        levels, weights, w_min = motional_levels(motional)
        res = evolve_fock_batch(levels, p, env, tol=tol, w_min=w_min, sample_times=times)
        mean = np.einsum("n,ntc->tc", weights, res.pops)
        for i, t in enumerate(times):
            k = int(np.argmin(np.abs(res.times - t)))
            pp = mean[k]
            if spec.shots:
                pp = resample(pp, spec.shots, point_rng(spec.seed, i))
            rows.append({"t_us": grid[i], "p0": float(pp[0]), "p1": float(pp[1]),
                         "p2": float(pp[2])})
    return [{k: float(r[k]) if k != "n_gates" else int(r[k]) for k in COLUMNS[v]}
            for r in rows]


def wait_phase(shift, tau):
    """Qubit evolution ``exp(-i shift tau S_z / 2)`` during a wait of length ``tau``."""
    return np.diag(np.exp(-0.5j * shift * tau * np.diag(hilbert.collective_spin("z")).real))


def ramsey(p, env, shift, waits, motional=Fock(0), tol=1e-7):
    """Populations after gate, wait, gate for every wait time (seconds).

    The light is off during the wait so the qubits only precess at the
    residual light shift ``shift`` (rad/s).  Each pulse is timed from its
    own start.  Returns an array of ``(p0, p1, p2)`` rows.
    """
    waits = np.asarray(waits, dtype=float)
    levels, weights, w_min = motional_levels(motional)
    a_max = 2 * p.eta * p.omega / abs(p.epsilon)
    out = np.zeros((len(waits), 3))
    for n, wn in zip(levels, weights):
        size, (offset,) = ensemble_windows([n], a_max, w_min)
        psi0 = hilbert.basis_state("dd", n, size, offset)
        mid = evolve(psi0, p, env, tol=tol, n_fock=size, offset=offset).final_state
        cols = np.stack([np.kron(wait_phase(shift, tau), np.eye(size)) @ mid for tau in waits],
                        axis=1)
        final = evolve(cols, p, env, tol=tol, n_fock=size, offset=offset).final_state
        for i in range(len(waits)):
            out[i] += wn * np.array(populations_binned(final[:, i]))
    return out


def gate_phase(p, env):
    """Accumulated MS phase ``gamma`` at the end of the pulse."""
    t = env.t_pulse if env is not None else p.t_gate
    return analytic_factors(p, t, env).gamma


def multi_gate(n_gates, p, env, noise=NoiseModel(), trials=200, initial="dd",
               counts=None, fit=True):
    """Concatenate ``n_gates`` gates under quasi-static and incoherent noise.

    Each trial draws one relative Rabi-frequency offset (Gaussian truncated
    at four sigma) and one detuning, both held for the whole sequence.  The
    gate is ``exp(i gamma (1 + d)^2 S_y^2)`` plus the detuning term, and each
    gate is followed by an admixture of the fully mixed state with weight
    ``carrier_error_per_gate`` plus the heating loss converted to a weight.
    Fidelities are computed from the trial-averaged density matrix.

    Returns ``(fit, rows)`` where ``rows`` hold ``n_gates``, ``fidelity``
    and ``parity_amplitude`` for every count up to ``n_gates`` (or the given
    ``counts``) and ``fit`` compares Gaussian and linear decay of the
    parity amplitude at odd counts (``None`` with fewer than four).
    """
    if n_gates < 1 or trials < 1:
        raise ValueError("need n_gates >= 1 and trials >= 1")
    rng = np.random.default_rng(noise.seed)
    d = rng.standard_normal(trials)
    while np.any(np.abs(d) > 4):
        bad = np.abs(d) > 4
        d[bad] = rng.standard_normal(np.count_nonzero(bad))
    d *= noise.coupling_rel_sigma
    det = rng.standard_normal(trials) * noise.detuning_rms
    gamma0 = gate_phase(p, env)
    t_pulse = env.t_pulse if env is not None else p.t_gate
    sy2 = hilbert.collective_spin("y") @ hilbert.collective_spin("y")
    sz = hilbert.collective_spin("z")
    weight = noise.carrier_error_per_gate + heating_error(noise.heating_rate, p.t_gate) / 0.75
    weight = min(weight, 1.0)
    gates = np.stack([expm(1j * (gamma0 * (1 + di) ** 2 * sy2 + 0.5 * dt * t_pulse * sz))
                      for di, dt in zip(d, det)])
    pair = "dd" if initial == "dd" else "du"
    psi = np.zeros(4, dtype=complex)
    psi[hilbert.DD if initial == "dd" else hilbert.DU] = 1
    rho = np.broadcast_to(np.outer(psi, psi.conj()), (trials, 4, 4)).copy()
    wanted = set(range(1, n_gates + 1)) if counts is None else set(int(c) for c in counts)
    rows = []
    for n in range(1, max(wanted) + 1):
        rho = gates @ rho @ gates.conj().transpose(0, 2, 1)
        rho = depolarize(rho, weight)
        if n in wanted:
            mean = rho.mean(axis=0)
            rows.append({"n_gates": n, "fidelity": bell_fidelity_rho(mean, pair),
                         "parity_amplitude": parity_amplitude_rho(mean, pair)})
    result = None
    odd = [r for r in rows if r["n_gates"] % 2 == 1]
    if fit and len(odd) >= 4:
        result = fit_gate_decay([r["n_gates"] for r in odd],
                                [r["parity_amplitude"] for r in odd])
    return result, rows


__all__ = ["ScanSpec", "COLUMNS", "VARIABLES", "run_scan", "ramsey", "multi_gate",
           "resample", "point_rng", "wait_phase", "gate_phase", "IntegrationError"]
