"""Operators and states on a tensor product of few-level systems.

Basis ordering: site 1 is the most significant tensor factor, so
``|phi_1> = |10...0>`` lives at index ``2**(N-1)``. Local level ``0`` is the
ground state, so ``SIGMA_MINUS = |0><1|``. Site indices in this module are
1-based, matching qubit labels Q_1 ... Q_N.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T.copy()
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)
NUMBER = np.diag([0.0, 1.0]).astype(complex)

SIGMA_MINUS.setflags(write=False)
SIGMA_PLUS.setflags(write=False)
SIGMA_Z.setflags(write=False)
NUMBER.setflags(write=False)


@dataclass(frozen=True)
class HilbertSpec:
    local_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.local_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"local dimensions must be positive, got {self.local_dims}")
        if int(np.prod(dims)) < 2:
            raise ValueError("total Hilbert dimension must be at least 2")
        object.__setattr__(self, "local_dims", dims)

    @classmethod
    def qubits(cls, n: int) -> "HilbertSpec":
        return cls((2,) * int(n))

    @property
    def num_sites(self) -> int:
        return len(self.local_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.local_dims))


def site_operator(spec: HilbertSpec, local_op, site: int) -> np.ndarray:
    """Embed ``local_op`` at ``site`` (1-based) with identities elsewhere."""
    local_op = np.asarray(local_op, dtype=complex)
    if not 1 <= site <= spec.num_sites:
        raise ValueError(f"site {site} out of range 1..{spec.num_sites}")
    d = spec.local_dims[site - 1]
    if local_op.shape != (d, d):
        raise ValueError(f"local operator shape {local_op.shape} does not match local dimension {d}")
    factors = [np.eye(k, dtype=complex) for k in spec.local_dims]
    factors[site - 1] = local_op
    return reduce(np.kron, factors)


def basis_index(spec: HilbertSpec, occupation) -> int:
    occupation = tuple(int(x) for x in occupation)
    if len(occupation) != spec.num_sites:
        raise ValueError(f"occupation has {len(occupation)} entries, expected {spec.num_sites}")
    index = 0
    for level, d in zip(occupation, spec.local_dims):
        if not 0 <= level < d:
            raise ValueError(f"occupation {occupation} out of range for local dims {spec.local_dims}")
        index = index * d + level
    return index


def basis_ket(spec: HilbertSpec, occupation) -> np.ndarray:
    psi = np.zeros(spec.dim, dtype=complex)
    psi[basis_index(spec, occupation)] = 1.0
    return psi


def single_excitation_index(n: int, j: int) -> int:
    """Index of |phi_j> (qubit j excited, 1-based) in the n-qubit basis."""
    if not 1 <= j <= n:
        raise ValueError(f"qubit {j} out of range 1..{n}")
    return 1 << (n - j)


def single_excitation_ket(n: int, j: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[single_excitation_index(n, j)] = 1.0
    return psi


def single_excitation_state(amplitudes) -> np.ndarray:
    """Full-space ket sum_j a_j |phi_j> for an N-vector of amplitudes."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    n = amplitudes.size
    psi = np.zeros(2**n, dtype=complex)
    for j in range(1, n + 1):
        psi[single_excitation_index(n, j)] = amplitudes[j - 1]
    return psi


def make_bell(sign: int, n: int = 2) -> np.ndarray:
    """(|10> + sign |01>)/sqrt(2)."""
    if n != 2:
        raise ValueError("Bell states are defined for two qubits")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return single_excitation_state([1.0, float(sign)]) / np.sqrt(2.0)


def make_w(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError(f"W state needs n >= 2, got {n}")
    return single_excitation_state(np.ones(n)) / np.sqrt(n)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def fidelity(rho, target) -> float:
    """<target|rho|target>, clamped to [0, 1]."""
    rho = np.asarray(rho)
    target = np.asarray(target)
    if rho.shape != (target.size, target.size):
        raise ValueError(f"density matrix {rho.shape} does not match state of length {target.size}")
    value = np.vdot(target, rho @ target)
    return float(min(1.0, max(0.0, value.real)))


def hermiticity_error(a) -> float:
    a = np.asarray(a)
    scale = max(np.abs(a).max(), 1e-300)
    return float(np.abs(a - a.conj().T).max() / scale)


def check_density_matrix(rho, herm_tol=1e-10, trace_tol=1e-9, psd_tol=1e-9):
    """Raise ValueError unless ``rho`` is Hermitian, unit-trace and PSD to tolerance."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = hermiticity_error(rho)
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian (relative deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lowest:.3g}")


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random Hermitian, unit-trace, PSD matrix (Wishart with ``rank`` columns)."""
    rank = dim if rank is None else rank
    x = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)
