import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wgqed import model
from wgqed.model import ChainSpec, DrivePulse, PositionalChainSpec, mhz
from wgqed.operators import make_bell, single_excitation_state

reals = st.floats(-3, 3, allow_nan=False).filter(lambda x: abs(x) > 1e-3)


def test_units():
    assert mhz(1.0) == pytest.approx(2 * math.pi)
    assert model.to_mhz(mhz(0.57)) == pytest.approx(0.57)
    assert model.inverse_us(60.0) == pytest.approx(1 / 60)
    assert model.inverse_us(math.inf) == 0.0


def test_spec_validation():
    with pytest.raises(ValueError):
        ChainSpec(2, mhz(40), (0.0, 1.0))
    with pytest.raises(ValueError):
        ChainSpec(3, mhz(40), (1.0, -1.0))
    with pytest.raises(ValueError):
        ChainSpec(1, mhz(40), (1.0,))
    with pytest.raises(ValueError):
        ChainSpec(2, mhz(40), (1.0, -1.0), gamma=-1.0)
    with pytest.raises(ValueError):
        DrivePulse(-1.0)
    with pytest.raises(ValueError):
        DrivePulse(1.0, 0.0)
    assert ChainSpec(2, 1.0, (1, -1)).omega_d == mhz(5000)


def test_ideal_decay_matrix_bell():
    K = model.ideal_decay_matrix(ChainSpec(2, mhz(40), (1.0, -1.0)))
    assert K[1, 1] == pytest.approx(mhz(40))
    assert K[0, 1] == pytest.approx(-mhz(40))
    assert K[0, 0] == mhz(40)


def test_ideal_decay_matrix_w_diagonal():
    n = 5
    spec = ChainSpec(n, mhz(90), model.w_coupling_vector(n))
    K = model.ideal_decay_matrix(spec)
    assert np.allclose(np.diag(K)[1:], mhz(90) / (n - 1) ** 2)


@given(st.lists(reals, min_size=2, max_size=8))
def test_ideal_decay_matrix_rank_one_psd(c):
    spec = ChainSpec(len(c), 3.7, tuple(c))
    K = model.ideal_decay_matrix(spec)
    vals = np.linalg.eigvalsh(K)
    top = 2 * spec.kappa * float(np.dot(c, c))
    assert vals[-1] == pytest.approx(top, rel=1e-10)
    assert np.all(np.abs(vals[:-1]) < 1e-10 * top)
    assert np.allclose(K, K.T)
    flipped = model.ideal_decay_matrix(ChainSpec(len(c), 3.7 * 1.0, tuple(-x for x in c)))
    assert np.allclose(flipped, K, rtol=1e-14, atol=0)


def test_lambda0_is_one_centimetre():
    spec = PositionalChainSpec(2, (0.0, 0.01), (0.01, 0.01), omega_q=mhz(5000), velocity=1e2)
    assert spec.lambda_0 == pytest.approx(0.01)


def test_positional_ideal_sites_match_ideal_chain():
    for c in [(1.0, -1.0), (1.0, 1.0), model.w_coupling_vector(4), (2.0, 0.5, -1.5)]:
        spec = ChainSpec(len(c), mhz(40), c)
        pos = model.positional_from_ideal(spec)
        lam, K = model.positional_couplings(pos)
        K_ideal = model.ideal_decay_matrix(spec)
        assert np.abs(K - K_ideal).max() < 1e-12 * np.abs(K_ideal).max()
        assert np.abs(lam).max() < 1e-12 * np.abs(K_ideal).max()


def test_positional_quarter_wavelength_offset():
    lam0 = 0.01
    g = (0.01, 0.02)
    w = mhz(5000)
    spec = PositionalChainSpec(2, (0.0, lam0 + lam0 / 4), g, omega_q=w, velocity=1e2)
    lam, K = model.positional_couplings(spec)
    scale = g[0] * g[1] * w
    assert K[0, 1] == pytest.approx(-4 * math.pi * scale * math.cos(math.pi / 4), rel=1e-12)
    assert lam[0, 1] == pytest.approx(-2 * math.pi * scale * math.sin(math.pi / 4), rel=1e-12)
    assert np.allclose(np.diag(K), 4 * math.pi * np.array(g) ** 2 * w)
    assert np.allclose(K, K.T) and np.allclose(lam, lam.T)


def test_rotating_frame_hamiltonian_examples():
    spec = ChainSpec(2, mhz(40), (1.0, -1.0), drive=DrivePulse(mhz(8), 1.0))
    h = model.rotating_frame_hamiltonian(spec, 0.5)
    assert np.allclose(h, mhz(8) * model.drive_operator(2))
    assert h[0b10, 0b00] == pytest.approx(mhz(8))
    assert np.allclose(model.rotating_frame_hamiltonian(spec, 1.0), h)  # still on at t0
    assert np.abs(model.rotating_frame_hamiltonian(spec, 1.0 + 1e-12)).max() == 0.0
    with pytest.raises(ValueError):
        model.rotating_frame_hamiltonian(spec, -1.0)


@given(st.floats(0, 10), st.floats(-50, 50), st.floats(-0.005, 0.005))
def test_hamiltonian_hermitian(t, detune_mhz, dx):
    ideal = ChainSpec(3, mhz(40), (2.0, -1.0, -1.0), omega_d=mhz(5000 + detune_mhz), drive=DrivePulse(mhz(1.0), 5.0))
    pos = model.positional_from_ideal(ideal).displaced(2, dx)
    for spec in (ideal, pos):
        h = model.rotating_frame_hamiltonian(spec, t)
        assert np.abs(h - h.conj().T).max() < 1e-14 * max(1.0, np.abs(h).max())


def test_collective_jump_annihilates_dark_bell_state():
    spec = ChainSpec(2, mhz(40), (1.0, -1.0))
    J = model.collective_jump_operator(spec)
    assert np.abs(J @ make_bell(+1)).max() < 1e-12
    bright = make_bell(-1)
    out = J @ bright
    # |J B|^2 is the bright-mode decay rate sum_j kappa_jj
    assert np.vdot(out, out).real == pytest.approx(2 * mhz(40), rel=1e-12)
    assert np.abs(out[1:]).max() < 1e-12


@given(st.lists(reals, min_size=2, max_size=5))
def test_bright_state_decay_rate(c):
    spec = ChainSpec(len(c), 2.5, tuple(c))
    J = model.collective_jump_operator(spec)
    bright = single_excitation_state(np.array(c) / np.linalg.norm(c))
    out = J @ bright
    assert np.vdot(out, out).real == pytest.approx(np.trace(model.ideal_decay_matrix(spec)), rel=1e-10)


def test_w_coupling_vector():
    assert model.w_coupling_vector(5) == (4.0, -1.0, -1.0, -1.0, -1.0)
    assert model.w_coupling_vector(2) == (1.0, -1.0)
    with pytest.raises(ValueError):
        model.w_coupling_vector(1)


def test_lab_frame_hamiltonian_phase():
    spec = ChainSpec(2, mhz(40), (1.0, -1.0), omega_q=mhz(50), drive=DrivePulse(mhz(2)))
    t = 0.013
    h = model.lab_frame_hamiltonian(spec, t)
    assert h[0b10, 0b00] == pytest.approx(mhz(2) * np.exp(-1j * mhz(50) * t))
    assert h[0b11, 0b11] == pytest.approx(2 * mhz(50))
