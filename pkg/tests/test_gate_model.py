import numpy as np
import pytest
from scipy.integrate import quad

from msgate import hilbert
from msgate.gate_model import (BLACKMAN_MEAN, GateParams, HamiltonianAction, NoiseModel,
                               PulseEnvelope, carrier_stark_shift, derived_params,
                               envelope_value, frequency_compensation, hamiltonian_full,
                               sideband_stark_shift, stark_compensation_xi)
from msgate.integrator import evolve

TWO_PI = 2 * np.pi


def test_derived_params_reference_set(p50):
    d = derived_params(p50)
    assert np.isclose(d.t_gate, 50e-6)
    assert np.isclose(d.delta, TWO_PI * 1.212e6)
    assert np.isclose(d.lam, p50.eta**2 * p50.omega**2 / p50.epsilon)
    assert np.isclose(d.chi, d.lam / p50.epsilon)
    assert d.omega_b == d.omega_r == p50.omega


def test_gate_condition_rabi_frequency(p25):
    assert np.isclose(p25.omega / TWO_PI, 227.27e3, rtol=1e-4)


def test_imbalance_components():
    d = derived_params(GateParams(1e7, 1e5, 0.05, 1e6, xi=0.1))
    assert np.isclose(d.omega_b, 1.1e6) and np.isclose(d.omega_r, 0.9e6)


@pytest.mark.parametrize("kw", [dict(nu=-1.0), dict(epsilon=2e7), dict(eta=0.0),
                                dict(omega=-1.0), dict(xi=1.0), dict(coupling_ratio=0.0)])
def test_params_validation(kw):
    base = dict(nu=1e7, epsilon=1e5, eta=0.05, omega=1e6)
    with pytest.raises(ValueError):
        GateParams(**{**base, **kw})


def test_zero_epsilon_division():
    with pytest.raises(ZeroDivisionError):
        derived_params(GateParams(1e7, 0.0, 0.05, 1e6))


def test_envelope_values():
    env = PulseEnvelope("blackman_sloped", 60e-6, 5e-6)
    assert envelope_value(env, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert envelope_value(env, 5e-6) == pytest.approx(1.0)
    assert envelope_value(env, 30e-6) == 1.0
    assert envelope_value(env, 60e-6) == pytest.approx(0.0, abs=1e-15)
    t = np.linspace(0, 60e-6, 1001)
    v = envelope_value(env, t)
    assert np.all((v >= 0) & (v <= 1))
    assert np.allclose(v, v[::-1])
    rect = PulseEnvelope("rectangular", 10e-6)
    assert np.all(envelope_value(rect, t[:100] / 6) == 1)


def test_envelope_domain():
    env = PulseEnvelope("rectangular", 10e-6)
    with pytest.raises(ValueError):
        envelope_value(env, 11e-6)
    with pytest.raises(ValueError):
        PulseEnvelope("blackman_sloped", 10e-6, 6e-6)
    with pytest.raises(ValueError):
        PulseEnvelope("gaussian", 10e-6)


@pytest.mark.parametrize("t_slope", [0.5e-6, 2.5e-6, 10e-6])
def test_equal_area(t_slope):
    env = PulseEnvelope.for_gate(50e-6, t_slope)
    area, _ = quad(lambda t: envelope_value(env, t), 0, env.t_pulse, points=[t_slope, env.t_pulse - t_slope],
                   epsabs=1e-16, epsrel=1e-13)
    assert abs(area - 50e-6) / 50e-6 < 1e-9
    assert env.t_pulse == pytest.approx(50e-6 + 2 * (1 - BLACKMAN_MEAN) * t_slope)


def test_intensity_area():
    env = PulseEnvelope.for_gate(50e-6, 2.5e-6)
    ref, _ = quad(lambda t: envelope_value(env, t) ** 2, 0, env.t_pulse,
                  points=[2.5e-6, env.t_pulse - 2.5e-6], epsrel=1e-12)
    assert env.intensity_area() == pytest.approx(ref, rel=1e-9)


def test_stark_xi_zero():
    p = GateParams.at_gate_condition(TWO_PI * 1.23e6, TWO_PI * 20e3, 0.044)
    assert stark_compensation_xi(p) == 0


def test_stark_xi_inverse_evaluation():
    p = GateParams.at_gate_condition(TWO_PI * 1.23e6, TWO_PI * 20e3, 0.044)
    phase = np.pi * 0.05 * abs(p.epsilon) / (p.delta * p.eta**2)
    p = p.replace(delta_ac=phase / p.t_gate)
    assert stark_compensation_xi(p) == pytest.approx(0.05, rel=1e-12)


@pytest.mark.parametrize("dac", [TWO_PI * 3e3, -TWO_PI * 11e3])
def test_closure_identity(dac):
    p = GateParams.at_gate_condition(TWO_PI * 1.23e6, TWO_PI * 20e3, 0.044, delta_ac=dac)
    xi = stark_compensation_xi(p)
    shift = carrier_stark_shift(p.replace(xi=xi))
    assert shift == pytest.approx(-dac, rel=1e-12)


def test_carrier_stark_shift_value():
    p = GateParams(TWO_PI * 1232e3, TWO_PI * 20e3, 0.044, TWO_PI * 113.6e3, xi=0.05)
    assert carrier_stark_shift(p) / TWO_PI == pytest.approx(-4.26e3, rel=2e-3)
    assert carrier_stark_shift(p.replace(xi=0)) == 0
    assert carrier_stark_shift(p.replace(xi=-0.05)) == pytest.approx(-carrier_stark_shift(p))


def test_sideband_shift():
    p = GateParams.at_gate_condition(TWO_PI * 1.23e6, TWO_PI * 20e3, 0.044, xi=0.05)
    assert sideband_stark_shift(p, 0) == 0
    assert sideband_stark_shift(p, 2) == pytest.approx(TWO_PI * 1e3)
    assert sideband_stark_shift(p, 6) == pytest.approx(2 * sideband_stark_shift(p, 3))
    with pytest.raises(ValueError):
        sideband_stark_shift(p, -1)


def test_frequency_compensation_rectangular():
    p = GateParams.at_gate_condition(TWO_PI * 1.23e6, TWO_PI * 20e3, 0.044, delta_ac=5e3)
    assert frequency_compensation(p, PulseEnvelope.for_gate(p.t_gate)) == pytest.approx(5e3)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(coupling_rel_sigma=-1)
    with pytest.raises(ValueError):
        NoiseModel(carrier_error_per_gate=1.5)


@pytest.mark.parametrize("t", [0.0, 1.3e-6, 17.7e-6, 27e-6])
def test_hamiltonian_hermitian(p25, shaped, t):
    p = p25.replace(xi=0.07, zeta=0.4, delta_ac=3e4, delta_global=-1e4)
    h = hamiltonian_full(p, shaped(p), t, 20, window_offset=5)
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_hamiltonian_zero_drive():
    p = GateParams(TWO_PI * 1e6, TWO_PI * 20e3, 0.05, 0.0, delta_global=123.0)
    env = PulseEnvelope("rectangular", 50e-6)
    h = hamiltonian_full(p, env, 7e-6, 10)
    ref = -0.5 * 123.0 * np.kron(hilbert.collective_spin("z"), np.eye(10))
    assert np.allclose(h, ref)


def test_hamiltonian_carrier_limit():
    omega = TWO_PI * 100e3
    p = GateParams(TWO_PI * 1e6, TWO_PI * 20e3, 1e-9, omega)
    h = hamiltonian_full(p, PulseEnvelope("rectangular", 50e-6), 0.0, 6)
    ref = 2 * omega * np.kron(hilbert.collective_spin("x"), np.eye(6))
    assert np.allclose(h, ref, atol=1e-6 * omega)
    block = h.reshape(4, 6, 4, 6)[:, 0, :, 0]
    single = 2 * omega * hilbert.spectral_norm(hilbert.SIGMA_PLUS + hilbert.SIGMA_MINUS)
    assert hilbert.spectral_norm(block) == pytest.approx(2 * single, rel=1e-6)


def test_first_order_expansion_matches_lamb_dicke_term():
    omega = TWO_PI * 100e3
    base = GateParams(TWO_PI * 1e6, TWO_PI * 20e3, 1e-6, omega)
    env = PulseEnvelope("rectangular", 50e-6)
    n = 8
    a = hilbert.annihilation(n)
    sy = hilbert.collective_spin("y")
    # exact first-order term: -2 Omega cos(delta t)(e^{i nu t} a^dag + h.c.) S_y
    delta = base.delta
    period = TWO_PI / delta
    times = np.arange(64) * period / 64 * 11
    slow = np.zeros((n, n), dtype=complex)
    for t in times:
        h0 = hamiltonian_full(base.replace(eta=1e-9), env, t, n, pad=0)
        h1 = hamiltonian_full(base, env, t, n, pad=0)
        d = (h1 - h0) / (base.eta - 1e-9)
        x = np.exp(1j * base.nu * t) * a.conj().T
        ref = -2 * omega * np.cos(delta * t) * np.kron(sy, x + x.conj().T)
        assert np.allclose(d, ref, atol=1e-4 * omega)
        # a^dag coefficient of the S_y part, demodulated at epsilon
        blk = np.einsum("qirj,qr->ij", d.reshape(4, n, 4, n), sy.conj()) / 8
        slow += blk * np.exp(-1j * base.epsilon * t)
    slow /= len(times)
    # rotating-wave part: -Omega (e^{i eps t} a^dag + h.c.) S_y
    ref_slow = -omega * a.conj().T
    assert np.allclose(np.tril(slow), ref_slow, atol=1e-4 * omega)


def test_hamiltonian_truncation_guard():
    p = GateParams(TWO_PI * 1e6, TWO_PI * 20e3, 0.9, 1e5)
    with pytest.raises(hilbert.TruncationError):
        hamiltonian_full(p, PulseEnvelope("rectangular", 1e-5), 0.0, 3)


def test_action_matches_dense(p25, shaped):
    p = p25.replace(xi=0.05, zeta=0.3, delta_ac=2e4, delta_global=1e3, coupling_ratio=1.1)
    env = shaped(p)
    n = 14
    rng = np.random.default_rng(3)
    offsets = (0, 4, 9)
    act = HamiltonianAction(p, env, n, offsets)
    psi = rng.normal(size=(3, 2, 4, n)) + 1j * rng.normal(size=(3, 2, 4, n))
    for t in (0.7e-6, 12.1e-6):
        out = act(t, psi)
        for b, o in enumerate(offsets):
            h = hamiltonian_full(p, env, t, n, o)
            for k in range(2):
                assert np.allclose(out[b, k].reshape(-1), h @ psi[b, k].reshape(-1))


def test_padded_block_removes_edge_error():
    from msgate.gate_model import motional_coupling_block
    big = motional_coupling_block(0.1, 0, 60, pad=0)
    win = motional_coupling_block(0.1, 20, 10, pad=8)
    assert np.allclose(win, big[20:30, 20:30], atol=1e-12)


def _flip_coupling(p, xi):
    """Effective ud <-> du coupling in units of the ideal one, from the flip probability."""
    q = p.replace(xi=xi)
    q = q.replace(delta_ac=-carrier_stark_shift(q))
    env = PulseEnvelope("rectangular", q.t_gate)
    rep = evolve(hilbert.basis_state("ud", 0, 16), q, env, tol=1e-8)
    w = np.abs(rep.final_state.reshape(4, 16)) ** 2
    return 4 / np.pi * np.arcsin(np.sqrt(w[hilbert.DU].sum()))


def test_imbalance_coupling_shift_scales_as_xi_squared(p50):
    k0 = _flip_coupling(p50, 0.0)
    shift = {xi: _flip_coupling(p50, xi) - k0 for xi in (0.1, 0.2)}
    slope = np.log(shift[0.2] / shift[0.1]) / np.log(2)
    assert 1.7 < slope < 2.3
    c = [shift[xi] / xi**2 for xi in (0.1, 0.2)]
    assert abs(c[0] - c[1]) < 0.15 * abs(c[0])
