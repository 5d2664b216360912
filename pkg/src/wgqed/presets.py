"""Named scenarios with the published figure and table parameters (raw config mappings)."""

from __future__ import annotations

import copy

from .errors import ConfigurationError

BELL = {"n": 2, "kappa11_mhz": 40.0, "c": [1.0, -1.0], "omega_q_mhz": 5000.0}
BELL_MINUS = {**BELL, "c": [1.0, 1.0]}
LOSSY_60_25 = {"gamma_inv_us": 60.0, "gamma_phi_inv_us": 25.0}
LOSSY_90_40 = {"gamma_inv_us": 90.0, "gamma_phi_inv_us": 40.0}

# decoherence and waveguide rate for the three optimization blocks
BLOCKS = {
    1: {"kappa11_mhz": 40.0, **LOSSY_60_25},
    2: {"kappa11_mhz": 90.0, **LOSSY_60_25},
    3: {"kappa11_mhz": 90.0, **LOSSY_90_40},
}
OPT_BRACKET = {"omega_lo_mhz": 0.1, "omega_hi_mhz": 3.0, "grid_points": 12, "rel_tol": 1e-3}
TABLE1_T_MAX = {3: 43.3, 4: 50.1, 5: 55.8, 6: 61.4, 7: 66.1, 8: 70.9}
BLOCK3_OPT = {3: (0.370, 1.165), 4: (0.301, 1.645), 5: (0.265, 2.09), 6: (0.233, 2.606), 7: (0.221, 2.878), 8: (0.202, 3.149)}


def _w_chain(n, **extra):
    return {"n": n, "omega_q_mhz": 5000.0, **extra}


def _entry(command, description, raw):
    return {"command": command, "description": description, "config": raw}


def _build() -> dict:
    p = {}
    for name, rabi in (("fig2a", 8.0), ("fig2b", 3.0), ("fig2c", 0.1)):
        p[name] = _entry("run", f"Bell state, no decoherence, continuous drive {rabi} MHz", {
            "target": "bell+", "chain": {**BELL, "rabi_mhz": rabi}})
    for suffix, rabi, t0 in (("-4mhz", 4.0, 0.087), ("-1.5mhz", 1.5, 0.235), ("-0.3mhz", 0.3, 1.176)):
        p["fig2d" + suffix] = _entry("run", f"Bell state, {rabi} MHz pulse of {t0} us", {
            "target": "bell+", "chain": {**BELL, "rabi_mhz": rabi, "t0_us": t0}, "run": {"t_end_us": 3.0}})
    for name, factor in (("fig3a", 7.02), ("fig3", 1.0), ("fig3c", 0.14)):
        p[name] = _entry("run", f"Bell state with decoherence, continuous drive {factor} x 0.57 MHz", {
            "target": "bell+", "chain": {**BELL, **LOSSY_60_25, "rabi_mhz": round(0.57 * factor, 6)}})
    p["fig3d"] = _entry("run", "Bell state with decoherence, optimal pulse", {
        "target": "bell+", "chain": {**BELL, **LOSSY_60_25, "rabi_mhz": 0.57, "t0_us": 0.623}, "run": {"t_end_us": 5.0}})
    p["fig4a"] = _entry("run", "Bell minus state, no decoherence, 0.1 MHz pulse of 3.53 us", {
        "target": "bell-", "chain": {**BELL_MINUS, "rabi_mhz": 0.1, "t0_us": 3.53}, "run": {"t_end_us": 10.0}})
    p["fig4b"] = _entry("run", "Bell minus state with decoherence, optimal pulse", {
        "target": "bell-", "chain": {**BELL_MINUS, **LOSSY_60_25, "rabi_mhz": 0.57, "t0_us": 0.623}, "run": {"t_end_us": 5.0}})
    sweep5 = {"kind": "omega", "n_values": [3, 5, 7], "rabi_range_mhz": [0.1, 3.0, 8]}
    p["fig5"] = _entry("sweep", "Maximum W fidelity versus drive, no decoherence (N = 3, 5, 7)", {
        "target": "w", "chain": _w_chain(3, kappa11_mhz=40.0), "sweep": sweep5,
        "integrator": {"truncate_excitations": 2}})
    p["fig5c"] = _entry("sweep", "Maximum W fidelity versus drive with decoherence (N = 3, 5, 7)", {
        "target": "w", "chain": _w_chain(3, kappa11_mhz=40.0, **LOSSY_60_25), "sweep": sweep5,
        "integrator": {"truncate_excitations": 2}})
    p["fig6a"] = _entry("run", "W state N = 3, weak 0.01 MHz pulse held for t_max", {
        "target": "w", "chain": _w_chain(3, kappa11_mhz=90.0, rabi_mhz=0.01, t0_us=TABLE1_T_MAX[3]),
        "run": {"t_end_us": 60.0}})
    rabi3, t3 = BLOCK3_OPT[3]
    p["fig6b"] = _entry("run", "W state N = 3 with decoherence, optimal pulse, then free decay", {
        "target": "w", "chain": _w_chain(3, kappa11_mhz=90.0, **LOSSY_90_40, rabi_mhz=rabi3, t0_us=t3),
        "run": {"t_end_us": 100.0}})
    p["fig7"] = _entry("sweep", "Optimal fidelity versus N, gamma^-1 = 90 us, gamma_phi^-1 = 40 us, kappa_11 = 90 MHz", {
        "target": "w", "chain": _w_chain(2, **BLOCKS[3]), "optimize": OPT_BRACKET,
        "sweep": {"kind": "n", "action": "optimize", "n_values": [2, 3, 4, 5, 6, 7, 8]},
        "integrator": {"truncate_excitations": 2}})
    p["fig8"] = _entry("sweep", "Optimal W fidelity (N = 4) versus displacement of Q_2", {
        "target": "w", "chain": _w_chain(4, kappa11_mhz=40.0, **LOSSY_60_25, velocity_m_per_s=1e8),
        "optimize": OPT_BRACKET,
        "sweep": {"kind": "position", "qubit": 2, "mode": "reoptimize",
                  "deviations_lambda0": [-2e-4, -1e-4, -5e-5, 0.0, 5e-5, 1e-4, 2e-4]}})
    p["fig9"] = _entry("run", "Driven transmon qutrit: leakage into the second excited level", {
        "target": "qutrit", "qutrit": {
            "omega_10_mhz": 5000.0, "omega_21_mhz": 4760.0, "omega_d_mhz": 5000.0, "rabi_mhz": 1.0,
            "gamma_01_inv_us": 60.0, "gamma_12_inv_us": 60.0, "gamma_02_inv_us": 150.0,
            "gamma_11_inv_us": 25.0, "gamma_22_inv_us": 25.0, "t_end_us": 20.0},
        "integrator": {"sample_interval_us": 0.01}})
    p["qutrit"] = copy.deepcopy(p["fig9"])
    p["table1"] = _entry("sweep", "W states, no decoherence, 0.01 MHz continuous drive: t_max for N = 3..8", {
        "target": "w", "chain": _w_chain(3, kappa11_mhz=90.0, rabi_mhz=0.01),
        "sweep": {"kind": "n", "action": "run", "n_values": [3, 4, 5, 6, 7, 8]},
        "integrator": {"truncate_excitations": 2}})
    for block, params in BLOCKS.items():
        tag = "table2" if block == 1 else f"table2-b{block}"
        p[tag] = _entry("sweep", f"Optimal drive for N = 2..8, block {block}", {
            "target": "w", "chain": _w_chain(2, **params), "optimize": OPT_BRACKET,
            "sweep": {"kind": "n", "action": "optimize", "n_values": [2, 3, 4, 5, 6, 7, 8]},
            "integrator": {"truncate_excitations": 2}})
        for n in range(2, 9):
            raw = {"target": "w", "chain": _w_chain(n, **params), "optimize": OPT_BRACKET}
            if n >= 6:
                raw["integrator"] = {"truncate_excitations": 2}
            p[f"table2-b{block}-n{n}"] = _entry("optimize", f"Optimal drive, block {block}, N = {n}", raw)
    p["gamma0-boundary"] = _entry("optimize", "Bell state without decoherence: optimum runs to the weak-drive edge", {
        "target": "bell+", "chain": dict(BELL), "optimize": {"omega_lo_mhz": 0.3, "omega_hi_mhz": 8.0, "grid_points": 12}})
    return p


PRESETS = _build()


def get_preset(name: str) -> dict:
    try:
        entry = PRESETS[name]
    except KeyError:
        raise ConfigurationError("preset", f"unknown preset {name!r}; run 'wgqed presets list'") from None
    return copy.deepcopy(entry)
