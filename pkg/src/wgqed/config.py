"""TOML run configuration: schema checks, unit conversion, and construction of the physics objects.

Layout (all sections optional except what the command needs)::

    name = "fig2a"
    target = "bell+"            # bell+ | bell- | w | qutrit

    [chain]
    n = 2
    kappa11_mhz = 40.0          # nu/2pi in MHz
    c = [1, -1]                 # defaults to (N-1, -1, ..., -1) for target w
    omega_q_mhz = 5000.0
    omega_d_mhz = 5000.0        # defaults to omega_q_mhz
    gamma_inv_us = "inf"        # lifetimes in us, "inf" means no decay
    gamma_phi_inv_us = "inf"
    rabi_mhz = 8.0
    t0_us = "inf"               # pulse duration
    velocity_m_per_s = 1e8      # positional variant: explicit positions and couplings
    positions_m = [0.0, 0.01]
    g = [0.0126, 0.0126]

    [integrator]   rtol, atol, max_step_us, max_steps, sample_interval_us, method, truncate_excitations
    [run]          t_end_us, window_us = [lo, hi]
    [optimize]     omega_lo_mhz, omega_hi_mhz, grid_points, rel_tol
    [sweep]        kind = omega | n | position, plus the grid keys below
    [qutrit]       omega_10_mhz, omega_21_mhz, omega_d_mhz, rabi_mhz, gamma_XY_inv_us, t_end_us
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import model
from .errors import ConfigurationError
from .lindblad import IntegratorConfig
from .protocol import TARGETS, Scenario
from .qutrit import QutritSpec


def _number(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(key, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigurationError(key, "must be finite")
    return float(v)


def _nonneg(key, v):
    v = _number(key, v)
    if v < 0:
        raise ConfigurationError(key, f"must be >= 0, got {v}")
    return v


def _positive(key, v):
    v = _number(key, v)
    if not v > 0:
        raise ConfigurationError(key, f"must be > 0, got {v}")
    return v


def _lifetime(key, v):
    """Positive number of microseconds or the string "inf"."""
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity"):
            return math.inf
        raise ConfigurationError(key, f"expected a number or \"inf\", got {v!r}")
    if isinstance(v, float) and math.isinf(v) and v > 0:
        return math.inf
    return _positive(key, v)


def _integer(key, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigurationError(key, f"expected an integer, got {v!r}")
    return v


def _positive_int(key, v):
    v = _integer(key, v)
    if v < 1:
        raise ConfigurationError(key, f"must be >= 1, got {v}")
    return v


def _string(key, v):
    if not isinstance(v, str):
        raise ConfigurationError(key, f"expected a string, got {v!r}")
    return v


def _numbers(key, v):
    if not isinstance(v, list):
        raise ConfigurationError(key, f"expected an array, got {v!r}")
    return [_number(f"{key}[{i}]", x) for i, x in enumerate(v)]


def _positive_numbers(key, v):
    return [_positive(f"{key}[{i}]", x) for i, x in enumerate(_numbers(key, v))]


def _integers(key, v):
    if not isinstance(v, list):
        raise ConfigurationError(key, f"expected an array, got {v!r}")
    return [_positive_int(f"{key}[{i}]", x) for i, x in enumerate(v)]


def _truncation(key, v):
    if v in ("off", None):
        return None
    if isinstance(v, str) and v.isdigit():
        v = int(v)
    return _positive_int(key, v)


QUTRIT_RATES = ("gamma_01", "gamma_12", "gamma_02", "gamma_00", "gamma_11", "gamma_22")

SCHEMA: dict[str, dict[str, Any]] = {
    "": {"name": _string, "target": _string, "description": _string},
    "chain": {
        "n": _positive_int,
        "omega_q_mhz": _positive,
        "omega_d_mhz": _positive,
        "kappa11_mhz": _nonneg,
        "c": _numbers,
        "gamma_inv_us": _lifetime,
        "gamma_phi_inv_us": _lifetime,
        "rabi_mhz": _nonneg,
        "t0_us": _lifetime,
        "velocity_m_per_s": _positive,
        "positions_m": _numbers,
        "g": _numbers,
    },
    "integrator": {
        "rtol": _positive,
        "atol": _positive,
        "max_step_us": _positive,
        "max_steps": _positive_int,
        "sample_interval_us": _positive,
        "method": _string,
        "truncate_excitations": _truncation,
    },
    "run": {"t_end_us": _positive, "window_us": _numbers},
    "optimize": {"omega_lo_mhz": _positive, "omega_hi_mhz": _positive, "grid_points": _positive_int, "rel_tol": _positive},
    "sweep": {
        "kind": _string,
        "rabi_mhz": _positive_numbers,
        "rabi_range_mhz": _numbers,  # [lo, hi, points], log spaced
        "n_values": _integers,
        "deviations_m": _numbers,
        "deviations_lambda0": _numbers,
        "qubit": _positive_int,
        "mode": _string,
        "action": _string,
    },
    "qutrit": {
        "omega_10_mhz": _positive,
        "omega_21_mhz": _positive,
        "omega_d_mhz": _positive,
        "rabi_mhz": _nonneg,
        "t_end_us": _positive,
        **{f"{r}_inv_us": _lifetime for r in QUTRIT_RATES},
    },
}


def check_schema(raw: dict) -> dict:
    """Validate and normalize a raw nested mapping; unknown sections or keys are errors."""
    out: dict[str, dict] = {"": {}}
    for key, value in raw.items():
        if isinstance(value, dict):
            if key not in SCHEMA or key == "":
                raise ConfigurationError(key, "unknown section")
            section = {}
            for sub, v in value.items():
                path = f"{key}.{sub}"
                if sub not in SCHEMA[key]:
                    raise ConfigurationError(path, "unknown key")
                section[sub] = SCHEMA[key][sub](path, v)
            out[key] = section
        else:
            if key not in SCHEMA[""]:
                raise ConfigurationError(key, "unknown key")
            out[""][key] = SCHEMA[""][key](key, value)
    return out


def parse_value(text: str):
    """TOML literal if it parses as one, else the bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(raw: dict, assignments) -> dict:
    """``section.key=value`` strings applied on top of a raw config."""
    raw = copy.deepcopy(raw)
    for item in assignments:
        if "=" not in item:
            raise ConfigurationError(item, "override must look like section.key=value")
        path, text = item.split("=", 1)
        parts = path.strip().split(".")
        if len(parts) > 2:
            raise ConfigurationError(path, "override paths have at most one section")
        node = raw
        if len(parts) == 2:
            node = raw.setdefault(parts[0], {})
            if not isinstance(node, dict):
                raise ConfigurationError(parts[0], "not a section")
        node[parts[-1]] = parse_value(text.strip())
    return raw


def load_toml(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(str(path), "config file not found")
    try:
        return tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(str(path), f"malformed TOML: {exc}") from exc


@dataclass
class RunConfig:
    name: str
    target: str
    sections: dict
    raw: dict = field(repr=False, default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def require(self, section: str, key: str):
        try:
            return self.sections[section][key]
        except KeyError:
            raise ConfigurationError(f"{section}.{key}", "required key missing") from None

    # -- physics objects -------------------------------------------------

    def chain(self, n: int | None = None):
        """Chain spec from [chain]; ``n`` overrides the qubit number (W couplings then follow n)."""
        ch = self.sections.get("chain")
        if ch is None:
            raise ConfigurationError("chain", "required section missing")
        n = self.require("chain", "n") if n is None else n
        gamma = model.inverse_us(ch.get("gamma_inv_us", math.inf))
        gamma_phi = model.inverse_us(ch.get("gamma_phi_inv_us", math.inf))
        omega_q = model.mhz(ch.get("omega_q_mhz", 5000.0))
        omega_d = model.mhz(ch["omega_d_mhz"]) if "omega_d_mhz" in ch else None
        drive = model.DrivePulse(model.mhz(ch.get("rabi_mhz", 0.0)), ch.get("t0_us", math.inf))
        if "positions_m" in ch or "g" in ch:
            for key in ("positions_m", "g"):
                if key not in ch:
                    raise ConfigurationError(f"chain.{key}", "positional chains need both positions_m and g")
                if len(ch[key]) != n:
                    raise ConfigurationError(f"chain.{key}", f"has {len(ch[key])} entries, expected n={n}")
            for key in ("c", "kappa11_mhz"):
                if key in ch:
                    raise ConfigurationError(f"chain.{key}", "not allowed together with positions_m/g")
            return model.PositionalChainSpec(
                n=n,
                positions=tuple(ch["positions_m"]),
                g=tuple(ch["g"]),
                omega_q=omega_q,
                velocity=ch.get("velocity_m_per_s", 1e8) * 1e-6,
                omega_d=omega_d,
                gamma=gamma,
                gamma_phi=gamma_phi,
                drive=drive,
            )
        kappa_11 = model.mhz(self.require("chain", "kappa11_mhz"))
        if "c" in ch and (n == ch.get("n", n) or self.target != "w"):
            c = tuple(ch["c"])
        elif self.target == "w":
            c = model.w_coupling_vector(n)
        else:
            raise ConfigurationError("chain.c", "required key missing")
        if len(c) != n:
            raise ConfigurationError("chain.c", f"has {len(c)} entries, expected n={n}")
        if c[0] == 0.0:
            raise ConfigurationError("chain.c", "c[0] must be nonzero")
        try:
            return model.ChainSpec(n, kappa_11, c, omega_q, omega_d, gamma, gamma_phi, drive)
        except ValueError as exc:
            raise ConfigurationError("chain", str(exc)) from exc

    def velocity(self) -> float:
        """Signal velocity in m/us."""
        return self.section("chain").get("velocity_m_per_s", 1e8) * 1e-6

    def integrator(self) -> IntegratorConfig:
        s = self.section("integrator")
        try:
            return IntegratorConfig(
                rel_tol=s.get("rtol", 1e-8),
                abs_tol=s.get("atol", 1e-10),
                max_step=s.get("max_step_us", math.inf),
                sample_interval=s.get("sample_interval_us"),
                method=s.get("method", "dopri5"),
                max_steps=s.get("max_steps", 10_000_000),
            )
        except ValueError as exc:
            raise ConfigurationError("integrator", str(exc)) from exc

    @property
    def truncation(self) -> int | None:
        return self.section("integrator").get("truncate_excitations")

    def scenario(self, n: int | None = None, chain=None) -> Scenario:
        chain = self.chain(n) if chain is None else chain
        window = self.section("run").get("window_us")
        if window is not None:
            if len(window) != 2 or not 0 <= window[0] < window[1]:
                raise ConfigurationError("run.window_us", "expected [lo, hi] with 0 <= lo < hi")
            window = (window[0], window[1])
        trunc = self.truncation
        try:
            return Scenario(self.target, chain, window, self.integrator(), trunc if trunc and trunc < chain.n else None)
        except ValueError as exc:
            raise ConfigurationError("target", str(exc)) from exc

    def omega_bracket(self) -> tuple[float, float]:
        lo = self.require("optimize", "omega_lo_mhz")
        hi = self.require("optimize", "omega_hi_mhz")
        if not lo < hi:
            raise ConfigurationError("optimize.omega_hi_mhz", "must exceed omega_lo_mhz")
        return model.mhz(lo), model.mhz(hi)

    def rabi_grid(self) -> list[float]:
        """Sweep drive strengths in rad/us."""
        s = self.section("sweep")
        if "rabi_mhz" in s and "rabi_range_mhz" in s:
            raise ConfigurationError("sweep.rabi_range_mhz", "give either rabi_mhz or rabi_range_mhz")
        if "rabi_range_mhz" in s:
            spec = s["rabi_range_mhz"]
            if len(spec) != 3 or not (0 < spec[0] < spec[1]) or spec[2] != int(spec[2]) or spec[2] < 1:
                raise ConfigurationError("sweep.rabi_range_mhz", "expected [lo, hi, points] with 0 < lo < hi")
            grid = np.geomspace(spec[0], spec[1], int(spec[2])).tolist()
        else:
            grid = s.get("rabi_mhz", [])
        if not grid:
            raise ConfigurationError("sweep.rabi_mhz", "empty grid")
        return [model.mhz(w) for w in grid]

    def qutrit(self) -> QutritSpec:
        q = self.sections.get("qutrit")
        if q is None:
            raise ConfigurationError("qutrit", "required section missing")
        kwargs = {}
        for key in ("omega_10", "omega_21", "omega_d"):
            if f"{key}_mhz" in q:
                kwargs[key] = model.mhz(q[f"{key}_mhz"])
        if "rabi_mhz" in q:
            kwargs["rabi"] = model.mhz(q["rabi_mhz"])
        for rate in QUTRIT_RATES:
            if f"{rate}_inv_us" in q:
                kwargs[rate] = model.inverse_us(q[f"{rate}_inv_us"])
        if "gamma_00_inv_us" not in q and "gamma_11_inv_us" in q:
            kwargs["gamma_00"] = 3 * kwargs["gamma_11"]
        try:
            return QutritSpec(**kwargs)
        except ValueError as exc:
            raise ConfigurationError("qutrit", str(exc)) from exc


def parse_config(raw: dict, name: str | None = None) -> RunConfig:
    sections = check_schema(raw)
    top = sections.pop("")
    target = top.get("target", "bell+")
    if target not in TARGETS + ("qutrit",):
        raise ConfigurationError("target", f"unknown target {target!r}")
    ch = sections.get("chain", {})
    if "c" in ch and "n" in ch and len(ch["c"]) != ch["n"]:
        raise ConfigurationError("chain.c", f"has {len(ch['c'])} entries, expected n={ch['n']}")
    if "n" in ch and ch["n"] < 2:
        raise ConfigurationError("chain.n", "chain needs n >= 2")
    sweep = sections.get("sweep", {})
    for key, allowed in (("kind", ("omega", "n", "position")), ("mode", ("reoptimize", "fixed")), ("action", ("run", "optimize"))):
        if key in sweep and sweep[key] not in allowed:
            raise ConfigurationError(f"sweep.{key}", f"expected one of {allowed}, got {sweep[key]!r}")
    method = sections.get("integrator", {}).get("method")
    if method is not None and method not in ("dopri5", "rk4", "expm"):
        raise ConfigurationError("integrator.method", f"unknown method {method!r}")
    return RunConfig(top.get("name", name or "custom"), target, sections, raw)


def load_config(path, overrides=()) -> RunConfig:
    raw = apply_overrides(load_toml(path), overrides)
    return parse_config(raw, Path(path).stem)


def flatten(raw: dict, prefix: str = "config") -> dict:
    """Flat snake_case echo of a raw config; infinities become the string "inf"."""
    out = {}
    for key, value in raw.items():
        name = f"{prefix}_{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name))
        else:
            out[name] = json_safe(value)
    return out


def json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return json_safe(value.item())
    return value
