"""Print the weak-drive W-state table (t_max per N) and the optimal-drive table for one parameter block.

    python3 scripts/reproduce_tables.py weak
    python3 scripts/reproduce_tables.py optimal --block 3 --n 2 3 4 5
"""

import argparse
import time

from wgqed import model, protocol
from wgqed.model import ChainSpec, DrivePulse, mhz
from wgqed.presets import BLOCK3_OPT, BLOCKS, TABLE1_T_MAX
from wgqed.protocol import Scenario

TRUNCATE_FROM = 6  # full space beyond this gets slow; two-excitation truncation instead


def weak_table(ns):
    print(f"{'N':>2} {'F_max':>9} {'t_max/us':>9} {'published':>9} {'basis':>9} {'wall/s':>7}")
    for n in ns:
        chain = ChainSpec(n, mhz(90), model.w_coupling_vector(n), drive=DrivePulse(mhz(0.01)))
        truncate = n >= TRUNCATE_FROM
        s = Scenario("w", chain, search_window=(0.0, 100.0), max_excitations=2 if truncate else None)
        start = time.perf_counter()
        r = protocol.run_preparation(s, chain.drive.rabi, t_end=100.0)
        print(f"{n:>2} {r.f_max:9.6f} {r.t_max:9.3f} {TABLE1_T_MAX.get(n, float('nan')):9.1f} "
              f"{'trunc-2' if truncate else 'full':>9} {time.perf_counter() - start:7.1f}", flush=True)


def optimal_table(block, ns):
    params = BLOCKS[block]
    lossy = dict(gamma=model.inverse_us(params["gamma_inv_us"]), gamma_phi=model.inverse_us(params["gamma_phi_inv_us"]))
    print(f"block {block}: kappa_11/2pi = {params['kappa11_mhz']} MHz, "
          f"1/gamma = {params['gamma_inv_us']} us, 1/gamma_phi = {params['gamma_phi_inv_us']} us")
    print(f"{'N':>2} {'omega/MHz':>10} {'t_opt/us':>9} {'F_opt':>8} {'boundary':>8} {'wall/s':>7}")
    for n in ns:
        chain = ChainSpec(n, mhz(params["kappa11_mhz"]), model.w_coupling_vector(n), **lossy)
        s = Scenario("w" if n > 2 else "bell+", chain, max_excitations=2 if n >= TRUNCATE_FROM else None)
        start = time.perf_counter()
        res = protocol.optimize_drive(s, (mhz(0.1), mhz(3.0)))
        ref = f"  (published {BLOCK3_OPT[n]})" if block == 3 and n in BLOCK3_OPT else ""
        print(f"{n:>2} {model.to_mhz(res.omega_opt):10.4f} {res.t_opt:9.4f} {res.f_opt:8.5f} "
              f"{res.boundary or '-':>8} {time.perf_counter() - start:7.1f}{ref}", flush=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("table", choices=["weak", "optimal"])
    ap.add_argument("--block", type=int, choices=sorted(BLOCKS), default=1)
    ap.add_argument("--n", type=int, nargs="+")
    args = ap.parse_args()
    if args.table == "weak":
        weak_table(args.n or range(3, 9))
    else:
        optimal_table(args.block, args.n or range(2, 9))


if __name__ == "__main__":
    main()
