"""Leakage check for a single driven transmon kept to its lowest three levels."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .lindblad import IntegratorConfig, LindbladGenerator, evolve
from .model import inverse_us, mhz


def _ketbra(j: int, k: int, d: int = 3) -> np.ndarray:
    op = np.zeros((d, d), dtype=complex)
    op[j, k] = 1.0
    return op


@dataclass(frozen=True)
class QutritSpec:
    omega_10: float = mhz(5000.0)
    omega_21: float = mhz(4760.0)
    omega_d: float | None = None  # defaults to omega_10
    rabi: float = mhz(1.0)
    gamma_01: float = inverse_us(60.0)
    gamma_12: float = inverse_us(60.0)
    gamma_02: float = inverse_us(150.0)
    gamma_00: float = 3 * inverse_us(25.0)
    gamma_11: float = inverse_us(25.0)
    gamma_22: float = inverse_us(25.0)

    def __post_init__(self):
        if self.omega_d is None:
            object.__setattr__(self, "omega_d", self.omega_10)
        if not self.omega_10 > self.omega_21:
            raise ValueError("transmon anharmonicity must be positive: omega_10 > omega_21")
        if self.rabi < 0:
            raise ValueError("Rabi frequency must be >= 0")
        for name, value in self.rates().items():
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    @property
    def anharmonicity(self) -> float:
        return self.omega_10 - self.omega_21

    def rates(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("gamma_01", "gamma_12", "gamma_02", "gamma_00", "gamma_11", "gamma_22")}


def qutrit_hamiltonian(spec: QutritSpec, couple_second: bool = True) -> np.ndarray:
    """Frame rotating at omega_d: level 2 sits at omega_10 + omega_21 - 2 omega_d."""
    h = np.zeros((3, 3), dtype=complex)
    h[1, 1] = spec.omega_10 - spec.omega_d
    h[2, 2] = spec.omega_10 + spec.omega_21 - 2 * spec.omega_d
    drive = _ketbra(1, 0) + (_ketbra(2, 1) if couple_second else 0)
    return h + spec.rabi * (drive + drive.conj().T)


def qutrit_generator(spec: QutritSpec, couple_second: bool = True) -> LindbladGenerator:
    """One jump per channel gamma_{jk} L[|j><k|], j <= k."""
    jumps = tuple((rate, _ketbra(int(name[-2]), int(name[-1]))) for name, rate in spec.rates().items() if rate)
    h = qutrit_hamiltonian(spec, couple_second)
    return LindbladGenerator(hamiltonian=lambda t: h, dim=3, jumps=jumps, population_index=(0, 1, 2), autonomous=True)


@dataclass
class QutritTrajectory:
    times: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    stats: dict = field(default_factory=dict)


def run_leakage(spec: QutritSpec, t_end: float = 20.0, cfg: IntegratorConfig | None = None) -> QutritTrajectory:
    """Evolve from |0><0| and record the three level populations (default every 10 ns).

    The generator is time independent, so the default propagates exactly with
    exp(L dt); pass a dopri5 config to integrate instead.
    """
    cfg = IntegratorConfig(sample_interval=0.01, method="expm") if cfg is None else cfg
    if cfg.sample_interval is None:
        cfg = replace(cfg, sample_interval=0.01)
    gen = qutrit_generator(spec)
    rho0 = np.zeros((3, 3), dtype=complex)
    rho0[0, 0] = 1.0
    traj = evolve(gen, rho0, t_end, cfg)
    p = traj.populations
    return QutritTrajectory(traj.times, p[:, 0], p[:, 1], p[:, 2], traj.stats)


def max_leakage(traj: QutritTrajectory) -> float:
    if traj.p2.size == 0:
        raise ValueError("empty trajectory")
    return float(np.max(traj.p2))
