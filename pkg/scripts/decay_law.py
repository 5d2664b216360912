"""Fitted post-pulse decay rate of the W fidelity versus N and fit window.

Compares the log-slope of F after the optimal pulse with gamma + gamma_phi/2
and with the short-time rate gamma + 2 gamma_phi (1 - 1/N) of the dephasing
term as written.

    python3 scripts/decay_law.py --n 3 5 8
"""

import argparse

import numpy as np

from wgqed import model, protocol
from wgqed.lindblad import IntegratorConfig
from wgqed.model import ChainSpec, DrivePulse, mhz
from wgqed.presets import BLOCK3_OPT
from wgqed.protocol import Scenario

GAMMA, GAMMA_PHI = 1 / 90, 1 / 40


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[3, 5])
    ap.add_argument("--windows", type=float, nargs="+", default=[10.0, 50.0, 150.0])
    args = ap.parse_args()
    kappa_11 = mhz(90)
    print(f"gamma + gamma_phi/2 = {GAMMA + GAMMA_PHI / 2:.6f} /us")
    for n in args.n:
        rabi, t0 = BLOCK3_OPT[n]
        chain = ChainSpec(n, kappa_11, model.w_coupling_vector(n), drive=DrivePulse(mhz(rabi), t0),
                          gamma=GAMMA, gamma_phi=GAMMA_PHI)
        # exact propagation; the two-excitation space keeps N > 5 within the expm size limit
        cfg = IntegratorConfig(sample_interval=0.05, method="expm")
        s = Scenario("w", chain, integrator=cfg, max_excitations=2 if n > 5 else None)
        r = protocol.run_preparation(s, chain.drive.rabi, t0, t_end=t0 + max(args.windows))
        t, f = r.trajectory.times, r.trajectory.fidelity
        fits = []
        for span in args.windows:
            # plain log-slope per window; short windows are diagnostic only
            mask = (t >= t0 + 5 / kappa_11) & (t <= t0 + span)
            fits.append(-np.polyfit(t[mask], np.log(f[mask]), 1)[0])
        fits.append(protocol.decay_rate_fit(r.trajectory, t0, skip=5 / kappa_11))
        initial = GAMMA + 2 * GAMMA_PHI * (1 - 1 / n)
        labels = [f"{w:g}us" for w in args.windows] + ["full"]
        cols = "  ".join(f"{w}: {k:.6f}" for w, k in zip(labels, fits))
        print(f"N={n}: short-time {initial:.6f}  fitted {cols}", flush=True)


if __name__ == "__main__":
    main()
