import numpy as np
import pytest
from scipy.linalg import expm

from msgate import hilbert
from msgate.gate_model import GateParams, PulseEnvelope
from msgate.hilbert import DD, UU
from msgate.propagator import (analytic_factors, carrier_rotation, propagator_mod,
                               propagator_ms, qubit_gate, shaped_factors)

TWO_PI = 2 * np.pi


def test_factors_vanish_at_zero(p25):
    p = p25.replace(zeta=0.8)
    f = analytic_factors(p, 0.0)
    assert f.alpha == 0 and f.gamma == 0 and f.f_t == 0


def test_factors_at_gate_time(p50):
    f = analytic_factors(p50, p50.t_gate)
    assert abs(f.alpha) < 1e-12
    assert f.gamma == pytest.approx(np.pi / 8, rel=1e-12)


def test_max_alpha_half(p50):
    t = np.linspace(0, p50.t_gate, 2001)
    assert np.max(np.abs(analytic_factors(p50, t).alpha)) == pytest.approx(0.5, rel=1e-6)


def test_tilt_angle():
    p = GateParams(TWO_PI * 1232e3, TWO_PI * 20e3, 0.044, TWO_PI * 113.6e3, zeta=np.pi / 2)
    assert analytic_factors(p, 0.0).psi == pytest.approx(0.375, abs=1e-3)
    assert analytic_factors(p.replace(zeta=0.0), 0.0).psi == 0


def test_shaped_factors_reduce_to_closed_form(p50):
    env = PulseEnvelope.for_gate(p50.t_gate)
    times = np.linspace(0, p50.t_gate, 11)
    alpha, gamma = shaped_factors(p50, env.__class__("blackman_sloped", env.t_pulse, 0.0), times)
    ref = analytic_factors(p50, times)
    assert np.allclose(alpha, ref.alpha, atol=1e-7)
    assert np.allclose(gamma, ref.gamma, atol=1e-7)


def test_shaped_gate_closes(p50):
    env = PulseEnvelope.for_gate(p50.t_gate, 2.5e-6)
    f = analytic_factors(p50, env.t_pulse, env)
    assert abs(f.alpha) < 0.05
    assert f.gamma == pytest.approx(np.pi / 8, rel=0.02)


def test_identity_at_zero(p25):
    assert np.allclose(propagator_ms(p25, 0.0, 12), np.eye(48))


@pytest.mark.parametrize("t", [3e-6, 11e-6, 19e-6])
def test_unitarity(p25, t):
    for u in (propagator_ms(p25, t, 30), propagator_mod(p25.replace(zeta=0.6), t, 30)):
        assert hilbert.spectral_norm(u.conj().T @ u - np.eye(u.shape[0])) < 1e-10


@pytest.mark.parametrize("n", [0, 1, 5, 20])
def test_bell_state_for_every_fock_level(p50, n):
    nf = 32
    u = propagator_ms(p50, p50.t_gate, nf)
    psi = u @ hilbert.basis_state("dd", n, nf)
    m = psi.reshape(4, nf)
    # motion factorises and stays in |n>
    assert np.allclose(np.abs(m[:, n]) ** 2, [0.5, 0, 0, 0.5], atol=1e-10)
    target = np.zeros(4, dtype=complex)
    target[DD], target[UU] = 1 / np.sqrt(2), -1j / np.sqrt(2)
    assert abs(np.vdot(target, m[:, n])) == pytest.approx(1.0, abs=1e-10)


def test_motional_independence_of_qubit_action(p50):
    nf = 40
    u = propagator_ms(p50, p50.t_gate, nf).reshape(4, nf, 4, nf)
    blocks = [u[:, n, :, n] for n in (0, 1, 5, 20)]
    for b in blocks[1:]:
        assert np.max(np.abs(b - blocks[0])) < 1e-10


def test_two_gates_swap(p50):
    nf = 12
    u = propagator_ms(p50, p50.t_gate, nf)
    psi = u @ u @ hilbert.basis_state("dd", 0, nf)
    assert np.sum(np.abs(psi.reshape(4, nf)[UU]) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_qubit_gate_matches_expm():
    sy = hilbert.collective_spin("y")
    for g in (0.1, np.pi / 8, 1.0):
        assert np.allclose(qubit_gate(g), expm(1j * g * sy @ sy), atol=1e-12)


@pytest.mark.parametrize("gamma", [0.1, np.pi / 8, 1.0])
def test_conjugation_identities(gamma):
    sx, sy, sz = (hilbert.collective_spin(a) for a in "xyz")
    v = expm(1j * gamma * sy @ sy)
    lhs = v.conj().T @ sz @ v
    # sign fixed by d/dgamma = -i [S_y^2, S_z] = 2 {S_x, S_y} at gamma = 0
    rhs = np.cos(4 * gamma) * sz + np.sin(4 * gamma) * 0.5 * (sx @ sy + sy @ sx)
    assert np.max(np.abs(lhs - rhs)) < 1e-10
    for s in (sx, sy, sz):
        s2 = s @ s
        assert np.max(np.abs(v.conj().T @ s2 @ v - s2)) < 1e-10


def test_mod_matches_ms_without_corrections(p25):
    period = TWO_PI / p25.delta
    t = 12 * period
    assert analytic_factors(p25, t).f_t == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(propagator_mod(p25, t, 20), propagator_ms(p25, t, 20), atol=1e-10)


def test_mod_converges_to_ms_linearly():
    nu, eps, eta = TWO_PI * 1.232e6, TWO_PI * 40e3, 0.044
    base = GateParams.at_gate_condition(nu, eps, eta, zeta=0.9)
    diffs, ratios = [], []
    for scale in (0.5, 0.25, 0.125, 0.0625):
        # keep Omega while raising nu, so Omega/delta shrinks
        p = base.replace(nu=eps + (nu - eps) / scale)
        times = 7.3e-6 + np.arange(16) * TWO_PI / p.delta / 16
        diffs.append(max(hilbert.spectral_norm(propagator_mod(p, t, 20) - propagator_ms(p, t, 20))
                         for t in times))
        ratios.append(p.omega / p.delta)
    slope = np.polyfit(np.log(ratios), np.log(diffs), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.15)


def test_carrier_rotation_single_ion_form():
    r = carrier_rotation(0.3)
    sx = hilbert.collective_spin("x")
    assert np.allclose(r, expm(-0.3j * sx))


def test_short_time_oscillation_period(p25):
    """zeta-averaged populations from the carrier-corrected propagator oscillate at 2 pi/delta."""
    from msgate.experiments.fitting import fit_sinusoid
    period = TWO_PI / p25.delta
    times = np.arange(1, 97) * period / 16
    nf = 12
    mean = np.zeros(len(times))
    for k in range(16):
        p = p25.replace(zeta=TWO_PI * k / 16)
        for i, t in enumerate(times):
            psi = propagator_mod(p, t, nf) @ hilbert.basis_state("dd", 0, nf)
            mean[i] += np.sum(np.abs(psi.reshape(4, nf)[DD]) ** 2) / 16
    trend = np.polyval(np.polyfit(times, mean, 3), times)
    fit = fit_sinusoid(times * 1e6, mean - trend, frequency=None, offset=True)
    assert TWO_PI / fit.params["frequency"] == pytest.approx(0.84, rel=0.02)
