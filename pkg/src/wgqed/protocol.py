"""End-to-end state preparation: drive Q_1 from the ground state and score the result."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from . import model, spectral
from .errors import IntegrationFailure, NumericalInstabilityError, OptimizationFailure
from .lindblad import Basis, IntegratorConfig, Trajectory, chain_generator, evolve, ground_state
from .operators import make_bell, make_w

log = logging.getLogger(__name__)

TARGETS = ("bell+", "bell-", "w")
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Scenario:
    target: str
    chain: model.ChainSpec | model.PositionalChainSpec
    search_window: tuple[float, float] | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    max_excitations: int | None = None
    enforce_couplings: bool = True

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}; expected one of {TARGETS}")
        n = self.chain.n
        if self.target in ("bell+", "bell-") and n != 2:
            raise ValueError(f"target {self.target} needs n = 2, got {n}")
        if self.enforce_couplings and isinstance(self.chain, model.ChainSpec):
            c1, *rest = self.chain.c
            if self.target == "bell+" and rest[0] != -c1:
                raise ValueError("bell+ needs c_1 = -c_2")
            if self.target == "bell-" and rest[0] != c1:
                raise ValueError("bell- needs c_1 = c_2")
            if self.target == "w" and not spectral.verify_w_condition(self.chain.c, tol=1e-12):
                raise ValueError("w target needs couplings proportional to (N-1, -1, ..., -1)")
        if self.max_excitations is not None and self.max_excitations < 1:
            raise ValueError("max_excitations must be >= 1")

    @property
    def target_state(self) -> np.ndarray:
        if self.target == "bell+":
            return make_bell(+1)
        if self.target == "bell-":
            return make_bell(-1)
        return make_w(self.chain.n)

    def basis(self) -> Basis:
        if self.max_excitations is None:
            return Basis.full(self.chain.n)
        return Basis.truncated(self.chain.n, self.max_excitations)


def default_window(chain, rabi: float) -> tuple[float, float]:
    """[0, min(20/Omega, 5/(gamma + gamma_phi/2))], with 100 us standing in for the decay bound without decoherence."""
    loss = chain.gamma + 0.5 * chain.gamma_phi
    bound = 5.0 / loss if loss > 0 else 100.0
    if rabi > 0:
        bound = min(bound, 20.0 / rabi)
    return 0.0, bound


@dataclass
class RunResult:
    trajectory: Trajectory
    f_max: float
    t_max: float
    rabi: float
    t0: float
    boundary: bool = False
    warnings: tuple[str, ...] = ()

    @property
    def final_fidelity(self) -> float:
        return float(self.trajectory.fidelity[-1])


def locate_max(traj: Trajectory, window: tuple[float, float] | None = None, column: int = 0) -> tuple[float, float]:
    """Largest recorded fidelity and its time, refined by a parabola through the three samples around it."""
    t = traj.times
    f = traj.fidelities[:, column]
    if t.size == 0:
        raise ValueError("empty trajectory")
    if window is not None:
        keep = np.flatnonzero((t >= window[0] - 1e-12) & (t <= window[1] + 1e-12))
    else:
        keep = np.arange(t.size)
    i = int(keep[np.argmax(f[keep])])
    f_max = float(f[i])
    if i == keep[0] or i == keep[-1]:
        return f_max, float(t[i])
    t3, f3 = t[i - 1 : i + 2], f[i - 1 : i + 2]
    a, b, _ = np.polyfit(t3 - t[i], f3, 2)
    if a >= 0:
        return f_max, float(t[i])
    t_vertex = t[i] - b / (2 * a)
    return f_max, float(min(max(t_vertex, t3[0]), t3[-1]))


def run_preparation(s: Scenario, rabi: float, t0: float = math.inf, t_end: float | None = None) -> RunResult:
    """Drive Q_1 with a rectangular pulse (Rabi ``rabi``, duration ``t0``) starting from |0...0>."""
    chain = s.chain.with_drive(rabi, t0)
    window = s.search_window or default_window(chain, rabi)
    if t_end is None:
        t_end = window[1]
    gen = chain_generator(chain, s.basis())
    cfg = s.integrator
    if cfg.sample_interval is None:
        cfg = replace(cfg, sample_interval=min(window[1], t_end) / 2000)
    traj = evolve(gen, ground_state(gen), t_end, cfg, [s.target_state])
    f_max, t_max = locate_max(traj, window)
    notes = []
    in_window = traj.times[traj.times <= window[1] + 1e-12]
    boundary = bool(in_window.size > 1 and abs(t_max - in_window[-1]) < 1e-12 and f_max > 0)
    if boundary:
        notes.append(f"fidelity maximum on the search-window boundary t={window[1]:.6g} us")
    return RunResult(traj, f_max, t_max, rabi, t0, boundary, tuple(notes))


@dataclass
class OptimizationResult:
    omega_opt: float
    t_opt: float
    f_opt: float
    scan: list[tuple[float, float, float]]  # (Omega, f_max, t_max) over the coarse grid
    boundary: str | None = None  # "lo" / "hi" when the best grid point is a bracket end
    evaluations: int = 0
    refinement: list[tuple[float, float, float]] = field(default_factory=list)


def _evaluate(args) -> tuple[float, float]:
    s, rabi = args
    try:
        r = run_preparation(s, rabi)
    except (IntegrationFailure, NumericalInstabilityError) as exc:
        log.warning("drive %.6g rad/us failed: %s", rabi, exc)
        return math.nan, math.nan
    return r.f_max, r.t_max


def _map(func, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def golden_section_max(func, lo: float, hi: float, rel_tol: float = 1e-3, log_scale: bool = True):
    """Maximize a unimodal ``func`` on [lo, hi]; returns (x_best, value_best, history).

    With ``log_scale`` the search runs in log(x), so the stopping width is a
    relative tolerance on x.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    fwd = math.log if log_scale else (lambda x: x)
    inv = math.exp if log_scale else (lambda u: u)
    a, b = fwd(lo), fwd(hi)
    tol = rel_tol if log_scale else rel_tol * max(abs(lo), abs(hi))
    history = []

    def score(u):
        value = func(inv(u))
        history.append((inv(u), value))
        return value

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = score(c), score(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = score(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = score(d)
    x_best, f_best = max(history, key=lambda item: item[1])
    return x_best, f_best, history


def optimize_drive(
    s: Scenario,
    omega_bracket: tuple[float, float],
    grid_points: int = 12,
    rel_tol: float = 1e-3,
    workers: int = 1,
) -> OptimizationResult:
    """Coarse logarithmic scan of the Rabi frequency, then golden-section refinement of F_max(Omega).

    Each evaluation holds the drive on (t0 = inf) and takes the fidelity maximum
    over the search window. If the best grid point is a bracket end the result
    carries ``boundary`` instead of being refined.
    """
    lo, hi = omega_bracket
    if not 0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got {omega_bracket}")
    if grid_points < 3:
        raise ValueError("grid needs at least 3 points")
    grid = np.geomspace(lo, hi, grid_points)
    values = _map(_evaluate, [(s, float(w)) for w in grid], workers)
    scan = [(float(w), f, t) for w, (f, t) in zip(grid, values)]
    fs = np.array([f for _, f, _ in scan])
    if np.all(np.isnan(fs)):
        raise OptimizationFailure("every grid evaluation failed")
    i = int(np.nanargmax(fs))
    best = scan[i]
    evaluations = len(scan)
    if i == 0 or i == len(scan) - 1:
        return OptimizationResult(best[0], best[2], best[1], scan, "lo" if i == 0 else "hi", evaluations)
    cache = {}

    def objective(w):
        cache[w] = _evaluate((s, w))
        f = cache[w][0]
        return -math.inf if math.isnan(f) else f

    w_best, f_best, history = golden_section_max(objective, scan[i - 1][0], scan[i + 1][0], rel_tol)
    evaluations += len(history)
    refinement = [(w, cache[w][0], cache[w][1]) for w, _ in history]
    if f_best < best[1]:
        return OptimizationResult(best[0], best[2], best[1], scan, None, evaluations, refinement)
    return OptimizationResult(w_best, cache[w_best][1], f_best, scan, None, evaluations, refinement)


def omega_sweep(s: Scenario, rabis: Sequence[float], workers: int = 1) -> list[tuple[float, float, float]]:
    """(Omega, f_max, t_max) for each drive strength, t0 = inf."""
    values = _map(_evaluate, [(s, float(w)) for w in rabis], workers)
    return [(float(w), f, t) for w, (f, t) in zip(rabis, values)]


def decay_rate_fit(
    traj: Trajectory,
    t_pulse_off: float,
    skip: float = 0.0,
    min_points: int = 10,
    column: int = 0,
    rate_floor: float = 1e-6,
) -> float:
    """Decay rate (1/us) from a least-squares fit of ln F over t >= t_pulse_off + skip.

    The data must span at least three decay constants past pulse-off; rates
    below ``rate_floor`` count as no decay and are returned without that check.
    """
    t = traj.times
    f = traj.fidelities[:, column]
    mask = t >= t_pulse_off + skip
    if np.count_nonzero(mask) < min_points:
        raise ValueError(f"only {np.count_nonzero(mask)} samples after pulse-off; need {min_points}")
    if np.any(f[mask] <= 0):
        raise ValueError("fidelity vanishes in the fit window")
    slope, _ = np.polyfit(t[mask], np.log(f[mask]), 1)
    rate = -float(slope)
    span = t[mask][-1] - t_pulse_off
    if rate > rate_floor and rate * span < 3.0:
        raise ValueError(f"fit window covers {rate * span:.2f} decay constants; need >= 3")
    return rate


class DeviationPoint(NamedTuple):
    dx: float
    f_opt: float
    omega: float
    t_opt: float


def _deviation_point(args) -> DeviationPoint:
    s, qubit, dx, mode, bracket, rabi = args
    chain = s.chain.displaced(qubit, dx)
    shifted = replace(s, chain=chain, enforce_couplings=False)
    if mode == "reoptimize":
        opt = optimize_drive(shifted, bracket)
        return DeviationPoint(dx, opt.f_opt, opt.omega_opt, opt.t_opt)
    r = run_preparation(shifted, rabi)
    return DeviationPoint(dx, r.f_max, rabi, r.t_max)


def position_deviation_sweep(
    s: Scenario,
    deviations: Sequence[float],
    qubit: int = 2,
    mode: str = "reoptimize",
    omega_bracket: tuple[float, float] | None = None,
    rabi: float | None = None,
    workers: int = 1,
) -> list[DeviationPoint]:
    """Optimal fidelity as one qubit is moved by dx (m) from its ideal position.

    ``mode="reoptimize"`` reruns :func:`optimize_drive` per point;
    ``mode="fixed"`` keeps the drive at ``rabi`` and only re-locates the maximum.
    """
    if not isinstance(s.chain, model.PositionalChainSpec):
        raise ValueError("position sweeps need a PositionalChainSpec")
    if not 1 <= qubit <= s.chain.n:
        raise ValueError(f"qubit {qubit} out of range")
    if mode == "reoptimize" and omega_bracket is None:
        raise ValueError("reoptimize mode needs omega_bracket")
    if mode == "fixed" and rabi is None:
        raise ValueError("fixed mode needs rabi")
    if mode not in ("reoptimize", "fixed"):
        raise ValueError(f"unknown mode {mode!r}")
    jobs = [(s, qubit, float(dx), mode, omega_bracket, rabi) for dx in deviations]
    return _map(_deviation_point, jobs, workers)
