"""Physical description of the qubit chain and the matrices it induces.

Units: time in microseconds, angular frequencies and rates in rad/us. Values
quoted as "frequency/2pi in MHz" convert with :func:`mhz`; lifetimes quoted in
microseconds convert to rates with :func:`inverse_us` (no factor 2pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .operators import SIGMA_MINUS, SIGMA_PLUS, HilbertSpec, site_operator

TWO_PI = 2.0 * math.pi


def mhz(nu: float) -> float:
    """Angular frequency in rad/us for a value nu/2pi given in MHz."""
    return TWO_PI * nu


def to_mhz(omega: float) -> float:
    return omega / TWO_PI


def inverse_us(lifetime: float) -> float:
    """Rate 1/lifetime; an infinite lifetime means no decay."""
    return 0.0 if math.isinf(lifetime) else 1.0 / lifetime


@dataclass(frozen=True)
class DrivePulse:
    rabi: float = 0.0
    duration: float = math.inf

    def __post_init__(self):
        if self.rabi < 0:
            raise ValueError(f"Rabi frequency must be >= 0, got {self.rabi}")
        if not self.duration > 0:
            raise ValueError(f"pulse duration must be > 0, got {self.duration}")

    def amplitude(self, t: float) -> float:
        # drive still on at t == duration
        return self.rabi if t <= self.duration else 0.0


def _check_rates(**rates):
    for name, value in rates.items():
        if not value >= 0:
            raise ValueError(f"{name} must be >= 0, got {value}")


@dataclass(frozen=True)
class ChainSpec:
    """Ideal chain: qubits at x_j = l_j * lambda_0 with real relative couplings c_j."""

    n: int
    kappa_11: float
    c: tuple[float, ...]
    omega_q: float = mhz(5000.0)
    omega_d: float | None = None
    gamma: float = 0.0
    gamma_phi: float = 0.0
    drive: DrivePulse = field(default_factory=DrivePulse)

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        object.__setattr__(self, "c", c)
        if self.omega_d is None:
            object.__setattr__(self, "omega_d", self.omega_q)
        if self.n < 2:
            raise ValueError(f"chain needs n >= 2, got {self.n}")
        if len(c) != self.n:
            raise ValueError(f"c has {len(c)} entries, expected n={self.n}")
        if c[0] == 0.0:
            raise ValueError("c_1 must be nonzero: the driven qubit has to couple to the waveguide")
        _check_rates(kappa_11=self.kappa_11, gamma=self.gamma, gamma_phi=self.gamma_phi)

    @property
    def kappa(self) -> float:
        """Collective rate kappa, with kappa_11 = 2 c_1^2 kappa."""
        return self.kappa_11 / (2.0 * self.c[0] ** 2)

    @property
    def detuning(self) -> float:
        return self.omega_q - self.omega_d

    def with_drive(self, rabi: float, duration: float = math.inf) -> "ChainSpec":
        return replace(self, drive=DrivePulse(rabi, duration))


@dataclass(frozen=True)
class PositionalChainSpec:
    """Chain described by qubit positions and bare couplings (resonant qubits)."""

    n: int
    positions: tuple[float, ...]  # m
    g: tuple[float, ...]
    omega_q: float = mhz(5000.0)
    velocity: float = 1e2  # m/us, i.e. 1e8 m/s
    omega_d: float | None = None
    gamma: float = 0.0
    gamma_phi: float = 0.0
    drive: DrivePulse = field(default_factory=DrivePulse)

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(float(x) for x in self.positions))
        object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        if self.omega_d is None:
            object.__setattr__(self, "omega_d", self.omega_q)
        if self.n < 2:
            raise ValueError(f"chain needs n >= 2, got {self.n}")
        if len(self.positions) != self.n or len(self.g) != self.n:
            raise ValueError("positions and g must both have n entries")
        if not all(math.isfinite(x) for x in self.positions):
            raise ValueError("positions must be finite")
        if not (self.omega_q > 0 and self.velocity > 0):
            raise ValueError("omega_q and velocity must be positive")
        _check_rates(gamma=self.gamma, gamma_phi=self.gamma_phi)

    @property
    def wavenumber(self) -> float:
        return self.omega_q / self.velocity

    @property
    def lambda_0(self) -> float:
        """Spacing pi/k between ideal positions."""
        return math.pi / self.wavenumber

    @property
    def detuning(self) -> float:
        return self.omega_q - self.omega_d

    @property
    def kappa_11(self) -> float:
        return 4.0 * math.pi * self.g[0] ** 2 * self.omega_q

    def with_drive(self, rabi: float, duration: float = math.inf) -> "PositionalChainSpec":
        return replace(self, drive=DrivePulse(rabi, duration))

    def displaced(self, qubit: int, dx: float) -> "PositionalChainSpec":
        x = list(self.positions)
        x[qubit - 1] += dx
        return replace(self, positions=tuple(x))


def ideal_decay_matrix(spec: ChainSpec) -> np.ndarray:
    c = np.asarray(spec.c, dtype=float)
    if c[0] == 0.0:
        raise ValueError("c_1 must be nonzero")
    kappa = spec.kappa_11 / (2.0 * c[0] ** 2)
    K = 2.0 * kappa * np.outer(c, c)
    K[0, 0] = spec.kappa_11
    return K


def positional_couplings(spec: PositionalChainSpec) -> tuple[np.ndarray, np.ndarray]:
    """Coherent couplings Lambda and decay matrix K for resonant qubits at arbitrary positions.

    lambda_jm = 2 pi g_j g_m w sin(k|x_j - x_m|), kappa_jm = 4 pi g_j g_m w cos(k|x_j - x_m|).
    The diagonal of Lambda is zero (sin 0).
    """
    x = np.asarray(spec.positions)
    g = np.asarray(spec.g)
    phase = spec.wavenumber * np.abs(x[:, None] - x[None, :])
    gg = np.outer(g, g) * spec.omega_q
    coupling = 2.0 * math.pi * gg * np.sin(phase)
    decay = 4.0 * math.pi * gg * np.cos(phase)
    np.fill_diagonal(coupling, 0.0)
    return coupling, decay


def positional_from_ideal(spec: ChainSpec, velocity: float = 1e2) -> PositionalChainSpec:
    """Positional chain at ideal sites reproducing ``spec``'s decay matrix.

    Q_1 sits at x = 0; each later qubit takes the next multiple of lambda_0 whose
    parity gives sign(c_j / c_1), so Q_2 lands at lambda_0 for c_2 < 0.
    """
    kappa = spec.kappa
    g0 = math.sqrt(kappa / (2.0 * math.pi * spec.omega_q))
    lam0 = math.pi * velocity / spec.omega_q
    sites = [0]
    for cj in spec.c[1:]:
        want_odd = (cj * spec.c[0]) < 0
        l = sites[-1] + 1
        if (l % 2 == 1) != want_odd:
            l += 1
        sites.append(l)
    return PositionalChainSpec(
        n=spec.n,
        positions=tuple(l * lam0 for l in sites),
        g=tuple(abs(cj) * g0 for cj in spec.c),
        omega_q=spec.omega_q,
        velocity=velocity,
        omega_d=spec.omega_d,
        gamma=spec.gamma,
        gamma_phi=spec.gamma_phi,
        drive=spec.drive,
    )


def lowering_operators(n: int) -> list[np.ndarray]:
    hs = HilbertSpec.qubits(n)
    return [site_operator(hs, SIGMA_MINUS, j) for j in range(1, n + 1)]


def coupling_matrix(spec) -> np.ndarray:
    if isinstance(spec, PositionalChainSpec):
        return positional_couplings(spec)[0]
    return np.zeros((spec.n, spec.n))


def decay_matrix(spec) -> np.ndarray:
    if isinstance(spec, PositionalChainSpec):
        return positional_couplings(spec)[1]
    return ideal_decay_matrix(spec)


def drift_hamiltonian(spec) -> np.ndarray:
    """Time-independent part in the frame rotating at omega_d: detuning plus waveguide exchange."""
    lowers = lowering_operators(spec.n)
    lam = coupling_matrix(spec)
    d = 2**spec.n
    h = np.zeros((d, d), dtype=complex)
    for j, sj in enumerate(lowers):
        h += spec.detuning * (sj.conj().T @ sj)
        for m in range(j + 1, spec.n):
            if lam[j, m] != 0.0:
                hop = sj.conj().T @ lowers[m]
                h += lam[j, m] * (hop + hop.conj().T)
    return h


def drive_operator(n: int) -> np.ndarray:
    """sigma_1^+ + sigma_1^- (drive on Q_1)."""
    s1 = site_operator(HilbertSpec.qubits(n), SIGMA_PLUS, 1)
    return s1 + s1.conj().T


def rotating_frame_hamiltonian(spec, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    h = drift_hamiltonian(spec)
    amp = spec.drive.amplitude(t)
    if amp:
        h = h + amp * drive_operator(spec.n)
    return h


def lab_frame_hamiltonian(spec, t: float) -> np.ndarray:
    """omega_q sum_j n_j + Theta(t0 - t) Omega (sigma_1^+ e^{-i w_d t} + h.c.), plus exchange."""
    lowers = lowering_operators(spec.n)
    h = drift_hamiltonian(spec)
    for sj in lowers:
        h += spec.omega_d * (sj.conj().T @ sj)
    amp = spec.drive.amplitude(t)
    if amp:
        sp = lowers[0].conj().T
        phase = np.exp(-1j * spec.omega_d * t)
        h = h + amp * (phase * sp + np.conj(phase) * sp.conj().T)
    return h


def collective_jump_operator(spec: ChainSpec) -> np.ndarray:
    """J = sqrt(2 kappa) sum_j c_j sigma_j^-; the waveguide dissipator equals D[J]."""
    lowers = lowering_operators(spec.n)
    return math.sqrt(2.0 * spec.kappa) * sum(cj * sj for cj, sj in zip(spec.c, lowers))


def w_coupling_vector(n: int) -> tuple[float, ...]:
    """Couplings (N-1, -1, ..., -1) that make the dark part of |phi_1> a W state."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return (float(n - 1),) + (-1.0,) * (n - 1)
