"""Run named presets through the CLI, one output directory per preset.

    python3 scripts/run_presets.py fig2a fig3d fig9      # selected presets
    python3 scripts/run_presets.py --all --out results    # every figure/table preset
"""

import argparse
import sys
from pathlib import Path

from wgqed import cli
from wgqed.presets import PRESETS


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*")
    ap.add_argument("--all", action="store_true", help="every preset except the per-row table2 entries")
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    names = args.names or []
    if args.all:
        names = [n for n in PRESETS if not n.startswith("table2-b")]
    if not names:
        ap.error("name at least one preset or pass --all")
    worst = 0
    for name in names:
        entry = PRESETS.get(name)
        if entry is None:
            print(f"unknown preset {name}", file=sys.stderr)
            worst = max(worst, 2)
            continue
        print(f"== {name}: {entry['description']}", flush=True)
        code = cli.main([entry["command"], "--preset", name, "--out", str(args.out / name), "--threads", str(args.threads)])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
