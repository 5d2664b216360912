"""Single-excitation spectral analysis: dark and bright modes of the waveguide.

Vectors here are N-component amplitude vectors over |phi_1> ... |phi_N>; use
:func:`wgqed.operators.single_excitation_state` to lift one to the full space.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NumericalFailure

DARK_THRESHOLD = 1e-9  # |Im E| / kappa_11 below which a mode counts as dark


@dataclass(frozen=True)
class EigenMode:
    vector: np.ndarray
    eigenvalue: complex
    kind: str  # "dark" | "bright"


@dataclass(frozen=True)
class DarkBasis:
    vectors: tuple[np.ndarray, ...]
    bright: np.ndarray


def _coupling_vector(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size < 1:
        raise ValueError("coupling vector must be one-dimensional")
    if not np.any(c):
        raise ValueError("coupling vector must be nonzero")
    return c


def build_h_eff(c, kappa: float, omega_q: float) -> np.ndarray:
    """omega_q on the diagonal minus i kappa_jm / 2, with kappa_jm = 2 c_j c_m kappa."""
    c = np.asarray(c, dtype=float)
    if c.size < 2:
        raise ValueError("need at least two qubits")
    K = 2.0 * kappa * np.outer(c, c)
    return omega_q * np.eye(c.size) - 0.5j * K


def eigenmodes(h: np.ndarray) -> list[EigenMode]:
    """Diagonalize ``h`` and label modes dark/bright by |Im E| against kappa_11 = -2 Im h_11."""
    h = np.asarray(h, dtype=complex)
    kappa_11 = -2.0 * h[0, 0].imag
    scale = abs(kappa_11) if kappa_11 else np.abs(h.imag).max()
    try:
        values, vectors = np.linalg.eig(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    modes = []
    for value, vec in zip(values, vectors.T):
        kind = "dark" if abs(value.imag) < DARK_THRESHOLD * scale else "bright"
        modes.append(EigenMode(vec / np.linalg.norm(vec), complex(value), kind))
    # dark modes first, then by decay rate
    modes.sort(key=lambda m: (m.kind != "dark", -m.eigenvalue.imag))
    return modes


def explicit_dark_vectors(c) -> list[np.ndarray]:
    """Non-orthogonal dark vectors c_{n+1} |phi_1> - c_1 |phi_{n+1}>, n = 1 .. N-1."""
    c = _coupling_vector(c)
    out = []
    for n in range(1, c.size):
        v = np.zeros(c.size)
        v[0] = c[n]
        v[n] = -c[0]
        out.append(v.astype(complex))
    return out


def _fix_phase(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    first = v[nz[0]]
    return v * (abs(first) / first)


def orthonormal_dark_basis(modes: list[EigenMode], c, tol: float = 1e-9) -> DarkBasis:
    """Modified Gram-Schmidt over the explicit dark vectors, in order n = 1 .. N-1.

    The numerically found dark modes fix the subspace; each explicit vector is
    checked to lie in it before orthonormalization. Phases are chosen so the
    first nonzero component of each vector is positive real.
    """
    c = _coupling_vector(c)
    n = c.size
    dark = [m.vector for m in modes if m.kind == "dark"]
    if len(dark) != n - 1:
        raise ValueError(f"expected {n - 1} dark modes, got {len(dark)}")
    if np.count_nonzero(c == 0.0) == 1:
        warnings.warn(f"qubit {int(np.flatnonzero(c == 0.0)[0]) + 1} is decoupled from the waveguide", stacklevel=2)
    u, _, _ = np.linalg.svd(np.array(dark).T, full_matrices=False)
    span = u[:, : n - 1]
    basis = []
    collapsed = []
    for k, v in enumerate(explicit_dark_vectors(c), start=1):
        outside = v - span @ (span.conj().T @ v)
        if np.linalg.norm(outside) > tol * max(np.linalg.norm(v), 1e-300):
            raise ValueError(f"explicit dark vector {k} is not in the numerical dark subspace")
        w = v.copy()
        for b in basis:
            w = w - np.vdot(b, w) * b
        norm = np.linalg.norm(w)
        if norm < tol * max(np.linalg.norm(v), 1e-300) or norm == 0.0:
            collapsed.append(k)
            continue
        basis.append(_fix_phase(w / norm))
    if collapsed:
        raise DegenerateInputError("dark vectors are linearly dependent", collapsed)
    bright = c / np.linalg.norm(c)
    return DarkBasis(tuple(basis), bright.astype(complex))


def decompose_phi1(c) -> tuple[np.ndarray, float]:
    """Split |phi_1| into its dark part sum_j f_j |phi_j> and bright amplitude p_b."""
    c = _coupling_vector(c)
    s = float(np.dot(c, c))
    f = -c[0] * c / s
    f[0] = 1.0 - c[0] ** 2 / s
    return f, c[0] / np.sqrt(s)


def verify_w_condition(c, tol: float = 1e-12) -> bool:
    f, _ = decompose_phi1(c)
    return bool(np.max(np.abs(f - 1.0 / f.size)) < tol)


def dark_projector(vectors) -> np.ndarray:
    """Orthogonal projector onto the span of ``vectors`` (need not be orthonormal)."""
    q, _ = np.linalg.qr(np.array(vectors, dtype=complex).T)
    return q @ q.conj().T
