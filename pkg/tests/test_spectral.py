import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wgqed import model, spectral
from wgqed.errors import DegenerateInputError
from wgqed.model import mhz

coupling = st.floats(-3, 3, allow_nan=False).filter(lambda x: abs(x) > 1e-2)
vectors = st.lists(coupling, min_size=2, max_size=8)


def h_for(c, kappa_11=mhz(40), omega_q=mhz(5000)):
    kappa = kappa_11 / (2 * c[0] ** 2)
    return spectral.build_h_eff(c, kappa, omega_q)


def test_bell_heff_and_spectrum():
    k = mhz(40)
    w = mhz(5000)
    h = h_for((1.0, -1.0), k, w)
    assert np.allclose(h, [[w - 0.5j * k, 0.5j * k], [0.5j * k, w - 0.5j * k]])
    vals = np.sort_complex(np.linalg.eigvals(h))
    assert np.allclose(vals, [w - 1j * k, w])


@given(vectors)
def test_heff_trace_and_symmetry(c):
    h = h_for(c)
    kappa = mhz(40) / (2 * c[0] ** 2)
    assert np.allclose(h, h.T)
    assert np.trace(h).imag == pytest.approx(-kappa * float(np.dot(c, c)), rel=1e-12)


def test_bell_modes():
    modes = spectral.eigenmodes(h_for((1.0, -1.0)))
    dark, bright = modes
    assert dark.kind == "dark" and bright.kind == "bright"
    s = 1 / math.sqrt(2)
    assert abs(abs(np.vdot(dark.vector, [s, s])) - 1) < 1e-12
    assert abs(abs(np.vdot(bright.vector, [s, -s])) - 1) < 1e-12


def test_three_qubit_bright_rate():
    k11 = mhz(90)
    modes = spectral.eigenmodes(h_for((2.0, -1.0, -1.0), k11))
    bright = [m for m in modes if m.kind == "bright"]
    assert len(bright) == 1
    assert bright[0].eigenvalue.imag == pytest.approx(-(k11 + 2 * k11 / 4) / 2, rel=1e-12)


@given(vectors)
def test_explicit_dark_vectors_are_eigenvectors(c):
    h = h_for(c)
    w = mhz(5000)
    for v in spectral.explicit_dark_vectors(c):
        assert np.abs(h @ v - w * v).max() < 1e-10 * np.abs(h).max()


@given(vectors)
def test_dark_bright_counts_and_jump_null_space(c):
    modes = spectral.eigenmodes(h_for(c))
    dark = [m for m in modes if m.kind == "dark"]
    assert len(dark) == len(c) - 1
    for m in dark:
        # the single-excitation action of the collective jump is proportional to <c|v>
        assert abs(np.dot(c, m.vector)) < 1e-8 * np.linalg.norm(c)


@given(vectors)
def test_dark_subspace_matches_explicit_vectors(c):
    modes = spectral.eigenmodes(h_for(c))
    numeric = spectral.dark_projector([m.vector for m in modes if m.kind == "dark"])
    explicit = spectral.dark_projector(spectral.explicit_dark_vectors(c))
    assert np.abs(numeric - explicit).max() < 1e-8


@given(vectors)
def test_orthonormal_dark_basis(c):
    modes = spectral.eigenmodes(h_for(c))
    basis = spectral.orthonormal_dark_basis(modes, c)
    vecs = np.array(basis.vectors)
    assert np.abs(vecs.conj() @ vecs.T - np.eye(len(c) - 1)).max() < 1e-12
    assert np.abs(vecs.conj() @ basis.bright).max() < 1e-12
    for v in vecs:
        first = v[np.flatnonzero(np.abs(v) > 1e-12)[0]]
        assert first.real > 0 and abs(first.imag) < 1e-12


def test_two_qubit_gram_schmidt_trivial():
    c = (1.0, -1.0)
    basis = spectral.orthonormal_dark_basis(spectral.eigenmodes(h_for(c)), c)
    assert np.allclose(basis.vectors[0], [1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_decoupled_qubit_warns():
    c = (1.0, 0.0, -1.0)
    with pytest.warns(UserWarning):
        basis = spectral.orthonormal_dark_basis(spectral.eigenmodes(h_for(c)), c)
    assert len(basis.vectors) == 2


def test_undriven_qubit_decoupled_collapses_dark_vectors():
    # with c_1 = 0 every explicit vector is parallel to |phi_1>
    c = (0.0, 1.0, 1.0, 2.0)
    modes = spectral.eigenmodes(spectral.build_h_eff(c, 1.0, 0.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(DegenerateInputError) as info:
            spectral.orthonormal_dark_basis(modes, c)
    assert info.value.indices == (2, 3)


def test_decompose_phi1_examples():
    f, pb = spectral.decompose_phi1((1.0, -1.0))
    assert np.allclose(f, [0.5, 0.5]) and pb == pytest.approx(1 / math.sqrt(2))
    f, pb = spectral.decompose_phi1((4.0, -1.0, -1.0, -1.0, -1.0))
    assert np.allclose(f, 0.2) and pb == pytest.approx(4 / math.sqrt(20))
    f, _ = spectral.decompose_phi1((1.0, 1.0, 1.0))
    assert np.allclose(f, [2 / 3, -1 / 3, -1 / 3])
    with pytest.raises(ValueError):
        spectral.decompose_phi1((0.0, 0.0))


@given(vectors)
def test_decomposition_identity(c):
    f, pb = spectral.decompose_phi1(c)
    bright = np.array(c) / np.linalg.norm(c)
    phi1 = np.zeros(len(c))
    phi1[0] = 1
    assert np.abs(f + pb * bright - phi1).max() < 1e-12
    assert abs(np.dot(f, bright)) < 1e-12


@given(vectors, st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3))
def test_decomposition_scale_invariant(c, alpha):
    f, pb = spectral.decompose_phi1(c)
    g, qb = spectral.decompose_phi1([alpha * x for x in c])
    assert np.allclose(f, g, atol=1e-12)
    assert qb == pytest.approx(math.copysign(1, alpha) * pb)
    assert spectral.verify_w_condition(c, 1e-9) == spectral.verify_w_condition([alpha * x for x in c], 1e-9)


@pytest.mark.parametrize("n", range(2, 9))
def test_w_condition_norms(n):
    c = model.w_coupling_vector(n)
    assert spectral.verify_w_condition(c)
    f, pb = spectral.decompose_phi1(c)
    assert np.dot(f, f) + pb**2 == pytest.approx(1.0, abs=1e-12)
    assert np.dot(f, f) == pytest.approx(1 / n)


def test_w_condition_rejects_uniform():
    assert spectral.verify_w_condition(model.w_coupling_vector(7))
    for n in (3, 5):
        assert not spectral.verify_w_condition((1.0,) * n)
