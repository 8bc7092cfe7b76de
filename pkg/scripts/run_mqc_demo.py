#!/usr/bin/env python3
"""Small-N multiple-quantum coherence demo.

Writes the exact t = 0 spectrum for an x operator and a Brownian-evolved
z spectrum with its continuum prediction (the two runs go to separate
directories because the spectrum filename carries only N and kt), then
optionally renders the bar charts with plots/plot_mqc.py.
"""
import argparse
import sys
from pathlib import Path

from scramblon.cli import main as cli


def run(out: str, N: int, plot: bool) -> int:
    initial = f"{out}/initial"
    evolved = f"{out}/evolved"
    for argv in (
        ["mqc", "--N", str(N), "--t", "0", "--pauli", "x", "--out", initial],
        ["mqc", "--N", str(N), "--t", "1.0", "--dt", "0.025",
         "--realizations", "100", "--out", evolved],
    ):
        rc = cli(argv)
        if rc != 0:
            return rc
    if plot:
        sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "plots"))
        from plot_mqc import plot_mqc

        for d in (initial, evolved):
            print(f"wrote {plot_mqc(d)}")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/mqc")
    ap.add_argument("--N", type=int, default=4)
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()
    raise SystemExit(run(args.out, args.N, args.plot))
