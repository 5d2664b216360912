"""Master-equation right-hand side and trajectory integration.

The generator keeps everything as d x d operator products: a non-Hermitian
effective Hamiltonian absorbs the anticommutator terms, collective waveguide
emission enters through a few dense jump operators, local relaxation through
index gathers, and pure dephasing through an elementwise mask. The d^2 x d^2
superoperator is only built by :func:`superoperator_matrix`, as an
independent check for small systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import model
from .errors import NumericalInstabilityError, UnsupportedError
from .integrate import RK4, Dopri5
from .operators import SIGMA_Z, HilbertSpec, fidelity, hermiticity_error, site_operator

SUPEROPERATOR_MAX_DIM = 16
EXPM_MAX_DIM = 40
DENSE_RHS_MAX_DIM = 8  # below this a d^2 x d^2 matvec beats the operator-form products


class Basis:
    """Computational basis states of an n-qubit register kept in the simulation.

    ``Basis.full(n)`` keeps all 2**n states; ``Basis.truncated(n, k)`` keeps
    states with at most k excitations, in increasing full-space index order.
    """

    def __init__(self, n: int, states: Sequence[int]):
        self.n = n
        self.states = np.asarray(states, dtype=int)
        self.dim = self.states.size
        self.full_dim = 2**n
        self._position = {int(s): i for i, s in enumerate(self.states)}
        self.truncated = self.dim < self.full_dim

    @classmethod
    def full(cls, n: int) -> "Basis":
        return cls(n, range(2**n))

    @classmethod
    def truncated(cls, n: int, max_excitations: int = 2) -> "Basis":
        return cls(n, [s for s in range(2**n) if bin(s).count("1") <= max_excitations])

    def __repr__(self):
        return f"Basis(n={self.n}, dim={self.dim})"

    def index(self, full_index: int) -> int:
        return self._position[int(full_index)]

    def restrict(self, op: np.ndarray) -> np.ndarray:
        if not self.truncated:
            return op
        return op[np.ix_(self.states, self.states)]

    def embed_state(self, psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        """Restrict a full-space ket to the basis; it must have no weight outside."""
        psi = np.asarray(psi, dtype=complex)
        if psi.size == self.dim:
            return psi
        if psi.size != self.full_dim:
            raise ValueError(f"state of length {psi.size} does not fit basis {self}")
        inside = psi[self.states]
        if abs(np.vdot(psi, psi).real - np.vdot(inside, inside).real) > tol:
            raise ValueError("target state has weight outside the truncated basis")
        return inside

    def excitation_bits(self) -> np.ndarray:
        """(dim, n) array, entry 1 where qubit j (column j-1) is excited."""
        shifts = np.arange(self.n - 1, -1, -1)
        return (self.states[:, None] >> shifts[None, :]) & 1

    def lowering_maps(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per qubit, (source, destination) basis positions of sigma_j^- acting on basis states."""
        maps = []
        for j in range(1, self.n + 1):
            bit = 1 << (self.n - j)
            src = [i for i, s in enumerate(self.states) if s & bit]
            dst = [self.index(int(self.states[i]) ^ bit) for i in src]
            maps.append((np.asarray(src, dtype=int), np.asarray(dst, dtype=int)))
        return maps

    def population_indices(self) -> tuple[int, ...]:
        """Positions of |0...0> and |phi_1> ... |phi_N>."""
        return (self.index(0),) + tuple(self.index(1 << (self.n - j)) for j in range(1, self.n + 1))

    def embed_rho(self, rho: np.ndarray) -> np.ndarray:
        if not self.truncated:
            return rho
        out = np.zeros((self.full_dim, self.full_dim), dtype=complex)
        out[np.ix_(self.states, self.states)] = rho
        return out


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = math.inf  # us
    sample_interval: float | None = None  # us; None -> t_end / 2000
    method: str = "dopri5"  # "rk4", or "expm" for generators constant between breakpoints
    rk4_step: float = 1e-3  # us
    max_steps: int | None = 10_000_000
    rehermitize: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("integrator tolerances must be positive")
        if self.sample_interval is not None and not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.max_steps is not None and not self.max_steps > 0:
            raise ValueError("max_steps must be positive")
        if self.method not in ("dopri5", "rk4", "expm"):
            raise ValueError(f"unknown integration method {self.method!r}")


@dataclass
class LindbladGenerator:
    """d rho/dt = -i[H(t), rho] + sum_k r_k D[L_k] + gamma sum_j D[s_j^-] + (gamma_phi/2) sum_j (s^z rho s^z - rho).

    ``jumps`` holds (rate, L) pairs; rates may be negative when they come from
    an indefinite decay matrix, the dissipator stays linear either way.
    ``decay``/``coherent`` keep the N x N matrices the chain was built from.
    """

    hamiltonian: Callable[[float], np.ndarray]
    dim: int
    jumps: tuple = ()
    gamma: float = 0.0
    gamma_phi: float = 0.0
    basis: Basis | None = None
    decay: np.ndarray | None = None
    coherent: np.ndarray | None = None
    breakpoints: tuple[float, ...] = ()
    population_index: tuple[int, ...] = ()
    autonomous: bool = False  # hamiltonian(t) constant between breakpoints
    _jump_terms: list = field(init=False, repr=False)
    _loss: np.ndarray = field(init=False, repr=False)
    _lowering: list = field(init=False, repr=False)
    _dephase: np.ndarray | None = field(init=False, repr=False)
    _cache: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.gamma < 0 or self.gamma_phi < 0:
            raise ValueError("gamma and gamma_phi must be >= 0")
        if self.decay is not None and np.abs(self.decay - self.decay.T).max() > 1e-12 * max(1.0, np.abs(self.decay).max()):
            raise ValueError("decay matrix must be symmetric")
        d = self.dim
        loss = np.zeros((d, d), dtype=complex)
        terms = []
        for rate, op in self.jumps:
            op = np.asarray(op, dtype=complex)
            opd = op.conj().T
            terms.append((float(rate), op, opd))
            loss += rate * (opd @ op)
        self._lowering = []
        self._dephase = None
        if self.gamma or self.gamma_phi:
            if self.basis is None:
                raise ValueError("local relaxation and dephasing need a qubit basis")
            bits = self.basis.excitation_bits()
            if self.gamma:
                loss += self.gamma * np.diag(bits.sum(axis=1)).astype(complex)
                self._lowering = self.basis.lowering_maps()
            if self.gamma_phi:
                signs = 2 * bits - 1
                mask = signs @ signs.T - self.basis.n
                self._dephase = 0.5 * self.gamma_phi * mask
        self._jump_terms = terms
        self._loss = loss
        self._cache = [None, None, None]

    def effective_hamiltonian(self, t: float) -> np.ndarray:
        h = self.hamiltonian(t)
        if self._cache[0] is not h:
            self._cache[:] = [h, h - 0.5j * self._loss, None]
        return self._cache[1]

    def liouvillian(self, t: float) -> np.ndarray:
        """Row-major d^2 x d^2 matrix of :func:`rhs`, assembled from the same factorized terms."""
        heff = self.effective_hamiltonian(t)
        if self._cache[2] is None:
            eye = np.eye(self.dim)
            s = -1j * (np.kron(heff, eye) - np.kron(eye, heff.conj()))
            for rate, op, _ in self._jump_terms:
                s += rate * np.kron(op, op.conj())
            for src, dst in self._lowering:
                low = np.zeros((self.dim, self.dim))
                low[dst, src] = 1.0
                s += self.gamma * np.kron(low, low)
            if self._dephase is not None:
                s += np.diag(self._dephase.ravel())
            self._cache[2] = s
        return self._cache[2]


def _piecewise(on: np.ndarray, off: np.ndarray, t_switch: float) -> Callable[[float], np.ndarray]:
    def hamiltonian(t: float) -> np.ndarray:
        return on if t <= t_switch else off

    return hamiltonian


def chain_generator(spec, basis: Basis | None = None, frame: str = "rotating") -> LindbladGenerator:
    """Generator for an ideal (``ChainSpec``) or positional chain.

    The ideal chain uses the single collective jump operator; a positional
    chain diagonalizes its decay matrix into at most two collective channels.
    """
    basis = Basis.full(spec.n) if basis is None else basis
    if isinstance(spec, model.ChainSpec):
        jumps = [(1.0, basis.restrict(model.collective_jump_operator(spec)))]
    else:
        decay = model.decay_matrix(spec)
        mu, vecs = np.linalg.eigh(decay)
        lowers = model.lowering_operators(spec.n)
        cutoff = 1e-13 * max(np.abs(mu).max(), 1e-300)
        jumps = []
        for rate, v in zip(mu, vecs.T):
            if abs(rate) > cutoff:
                jumps.append((float(rate), basis.restrict(sum(vj * sj for vj, sj in zip(v, lowers)))))
    if frame == "rotating":
        drift = basis.restrict(model.drift_hamiltonian(spec))
        if spec.drive.rabi:
            on = drift + spec.drive.rabi * basis.restrict(model.drive_operator(spec.n))
        else:
            on = drift
        hamiltonian = _piecewise(on, drift, spec.drive.duration)
    elif frame == "lab":
        def hamiltonian(t):
            return basis.restrict(model.lab_frame_hamiltonian(spec, t))
    else:
        raise ValueError(f"unknown frame {frame!r}")
    breaks = (spec.drive.duration,) if math.isfinite(spec.drive.duration) and spec.drive.rabi else ()
    return LindbladGenerator(
        hamiltonian=hamiltonian,
        dim=basis.dim,
        jumps=tuple(jumps),
        gamma=spec.gamma,
        gamma_phi=spec.gamma_phi,
        basis=basis,
        decay=model.decay_matrix(spec),
        coherent=model.coupling_matrix(spec),
        breakpoints=breaks,
        population_index=basis.population_indices(),
        autonomous=frame == "rotating",
    )


def rhs(gen: LindbladGenerator, rho: np.ndarray, t: float, dense: bool | None = None) -> np.ndarray:
    """d rho / dt. ``dense`` picks the Liouvillian matvec; by default it is used for dim <= 8."""
    if rho.shape != (gen.dim, gen.dim):
        raise ValueError(f"rho has shape {rho.shape}, generator acts on dimension {gen.dim}")
    if dense is None:
        dense = gen.dim <= DENSE_RHS_MAX_DIM
    if dense:
        return (gen.liouvillian(t) @ rho.reshape(-1)).reshape(rho.shape)
    heff = gen.effective_hamiltonian(t)
    out = -1j * (heff @ rho - rho @ heff.conj().T)
    for rate, op, opd in gen._jump_terms:
        out += rate * (op @ rho @ opd)
    if gen._lowering:
        g = gen.gamma
        for src, dst in gen._lowering:
            out[dst[:, None], dst[None, :]] += g * rho[src[:, None], src[None, :]]
    if gen._dephase is not None:
        out += gen._dephase * rho
    return out


def superoperator_matrix(gen: LindbladGenerator, t: float) -> np.ndarray:
    """Matrix S with vec(rhs(rho)) = S vec(rho), row-major vec.

    Built from the physical definitions (full double sum over the decay matrix,
    explicit sigma^z dephasing) rather than from the generator's internal
    factorization, so it can serve as an oracle for :func:`rhs`.
    """
    d = gen.dim
    if d > SUPEROPERATOR_MAX_DIM:
        raise UnsupportedError(f"superoperator limited to dimension <= {SUPEROPERATOR_MAX_DIM}, got {d}")
    eye = np.eye(d)

    def left(a):
        return np.kron(a, eye)

    def right(b):
        return np.kron(eye, b.T)

    def sandwich(a, b):
        return np.kron(a, b.T)

    h = gen.hamiltonian(t)
    s = -1j * (left(h) - right(h))
    if gen.decay is not None and gen.basis is not None:
        hs = HilbertSpec.qubits(gen.basis.n)
        lowers = [gen.basis.restrict(op) for op in model.lowering_operators(gen.basis.n)]
        raises = [op.conj().T for op in lowers]
        K = gen.decay
        for j in range(gen.basis.n):
            for m in range(gen.basis.n):
                if K[j, m] == 0.0:
                    continue
                prod = raises[m] @ lowers[j]
                s += 0.5 * K[j, m] * (2 * sandwich(lowers[j], raises[m]) - left(prod) - right(prod))
        for j in range(gen.basis.n):
            n_j = raises[j] @ lowers[j]
            s += 0.5 * gen.gamma * (2 * sandwich(lowers[j], raises[j]) - left(n_j) - right(n_j))
            z = gen.basis.restrict(site_operator(hs, SIGMA_Z, j + 1))
            s += 0.5 * gen.gamma_phi * (sandwich(z, z) - np.eye(d * d))
    else:
        for rate, op in gen.jumps:
            op = np.asarray(op, dtype=complex)
            opd = op.conj().T
            s += rate * (sandwich(op, opd) - 0.5 * left(opd @ op) - 0.5 * right(opd @ op))
    return s


@dataclass
class Trajectory:
    times: np.ndarray
    fidelities: np.ndarray  # (T, n_targets)
    populations: np.ndarray  # (T, len(population_index)); ground then phi_1..phi_N for chains
    final_rho: np.ndarray
    basis: Basis | None = None
    stats: dict = field(default_factory=dict)

    @property
    def fidelity(self) -> np.ndarray:
        """Fidelity against the first target."""
        return self.fidelities[:, 0]

    def __len__(self):
        return self.times.size


def sample_times(t_end: float, interval: float) -> np.ndarray:
    n = int(math.floor(t_end / interval + 1e-9))
    times = interval * np.arange(n + 1)
    if t_end - times[-1] > 1e-9 * interval:
        times = np.append(times, t_end)
    return times


def _check_sample(rho, t, herm_tol=1e-9, trace_tol=1e-8, psd_tol=1e-8):
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise NumericalInstabilityError(f"trace drifted to {tr!r}", t)
    herm = hermiticity_error(rho)
    if herm > herm_tol:
        raise NumericalInstabilityError(f"Hermiticity lost (deviation {herm:.3g})", t)
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -psd_tol:
        raise NumericalInstabilityError(f"negative eigenvalue {lowest:.3g}", t)


def evolve(
    gen: LindbladGenerator,
    rho0: np.ndarray,
    t_end: float,
    cfg: IntegratorConfig | None = None,
    targets: Sequence[np.ndarray] = (),
    check_invariants: bool = True,
) -> Trajectory:
    """Integrate from t=0 to ``t_end``, recording observables every ``sample_interval``.

    Targets given on the full 2**N space are restricted to the generator's basis.
    The pulse switch-off (if any) is treated as a breakpoint: integration stops
    there and restarts with the post-pulse Hamiltonian.
    """
    cfg = IntegratorConfig() if cfg is None else cfg
    if not t_end > 0:
        raise ValueError(f"t_end must be > 0, got {t_end}")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (gen.dim, gen.dim):
        raise ValueError(f"rho0 shape {rho0.shape} does not match generator dimension {gen.dim}")
    if gen.basis is not None:
        targets = [gen.basis.embed_state(psi) for psi in targets]
    targets = [np.asarray(psi, dtype=complex) for psi in targets]
    interval = cfg.sample_interval if cfg.sample_interval is not None else t_end / 2000
    times = sample_times(t_end, interval)
    fids = np.zeros((times.size, len(targets)))
    pops = np.zeros((times.size, len(gen.population_index)))
    pop_idx = np.asarray(gen.population_index, dtype=int)
    cursor = [0]

    def record(t, rho):
        if cfg.rehermitize:
            rho = 0.5 * (rho + rho.conj().T)
        if check_invariants:
            _check_sample(rho, t)
        i = cursor[0]
        for k, psi in enumerate(targets):
            fids[i, k] = fidelity(rho, psi)
        pops[i] = rho[pop_idx, pop_idx].real
        cursor[0] += 1

    post = (lambda y: 0.5 * (y + y.conj().T)) if cfg.rehermitize else None
    if cfg.method == "expm":
        if not gen.autonomous:
            raise UnsupportedError("expm propagation needs a generator that is constant between breakpoints")
        if gen.dim > EXPM_MAX_DIM:
            raise UnsupportedError(f"expm propagation limited to dimension <= {EXPM_MAX_DIM}, got {gen.dim}")
        stepper = _Propagator(gen)
    elif cfg.method == "dopri5":
        stepper = Dopri5(cfg.rel_tol, cfg.abs_tol, cfg.max_step, post_step=post, max_steps=cfg.max_steps)
    else:
        stepper = RK4(min(cfg.rk4_step, cfg.max_step), post_step=post, max_steps=cfg.max_steps)

    record(0.0, rho0)
    edges = [0.0] + [b for b in sorted(gen.breakpoints) if 0.0 < b < t_end] + [t_end]
    rho = rho0
    for a, b in zip(edges[:-1], edges[1:]):
        # clamp stage times into the segment: a pulse edge at `a` counts as past, one at `b` as not yet
        t_floor = a if a == 0.0 else math.nextafter(a, math.inf)

        def f(t, y, _lo=t_floor, _hi=b):
            return rhs(gen, y, min(max(t, _lo), _hi))

        if cfg.method == "expm":
            rho = stepper.integrate(math.nextafter(a, math.inf) if a else 0.0, a, rho, b, times[1:], record)
        else:
            rho = stepper.integrate(f, a, rho, b, times[1:], record)
    if cursor[0] != times.size:
        raise RuntimeError(f"recorded {cursor[0]} of {times.size} samples")
    final = 0.5 * (rho + rho.conj().T) if cfg.rehermitize else rho
    if check_invariants:
        _check_sample(final, t_end)
    stats = {"accepted_steps": stepper.n_accepted, "rejected_steps": stepper.n_rejected, "rhs_evaluations": stepper.n_rhs}
    return Trajectory(times, fids, pops, final, gen.basis, stats)


class _Propagator:
    """Exact exp(L dt) stepping between output times; one matrix exponential per distinct dt."""

    def __init__(self, gen: LindbladGenerator):
        self.gen = gen
        self.n_rhs = 0
        self.n_accepted = 0
        self.n_rejected = 0

    def integrate(self, t_probe, t0, y0, t1, outputs, sink):
        liou = self.gen.liouvillian(t_probe)
        cache = {}
        marks = [t for t in outputs if t0 < t < t1] + [t1]
        t, y = t0, y0.reshape(-1)
        for mark in marks:
            key = round((mark - t) * 1e12)
            if key not in cache:
                cache[key] = scipy.linalg.expm(liou * (mark - t))
            y = cache[key] @ y
            t = mark
            self.n_accepted += 1
            if mark in outputs:
                sink(mark, y.reshape(y0.shape))
        return y.reshape(y0.shape)


def ground_state(gen: LindbladGenerator) -> np.ndarray:
    rho = np.zeros((gen.dim, gen.dim), dtype=complex)
    idx = gen.basis.index(0) if gen.basis is not None else 0
    rho[idx, idx] = 1.0
    return rho
