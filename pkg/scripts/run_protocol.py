#!/usr/bin/env python3
"""End-to-end consistency-relation protocol on master-equation data.

Simulates deep-early, selection-window, and late snapshots at N = 10^4,
fits the growth exponent from the early ones, and runs the parameter-free
late-time prediction, leaving band CSVs and protocol_report.json in the
run directory.
"""
import argparse
import math

from scramblon.cli import main as cli


def snapshot_times(N: int):
    """kt values for the deep-early fit, the selection window, and the target.

    The window is defined by the ratio of the mean size to s_sc = 3/4, so
    the times scale with log N.
    """
    def kt_at(ratio):
        return math.log(ratio * 0.75 * N)

    deep = kt_at(0.01)
    early = [round(f * deep, 2) for f in (0.4, 0.6, 0.8, 1.0)]
    window = [round(kt_at(r), 2) for r in (0.032, 0.04, 0.048)]
    late = [round(deep + 4.0, 2)]
    return early, window, late


def run(out: str, N: int) -> int:
    early, window, late = snapshot_times(N)
    kts = [f"{kt:g}" for kt in early + window + late]
    rc = cli(["simulate-master", "--N", str(N), "--kt", ",".join(kts),
              "--out", out])
    if rc != 0:
        return rc
    files = [f"{out}/master_N{N}_kt{kt}.csv" for kt in kts]
    rc = cli(["fit-kappa", *files[:len(early)], "--out", out])
    if rc != 0:
        return rc
    return cli(["predict", *files, "--out", out])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/protocol")
    ap.add_argument("--N", type=int, default=10_000)
    args = ap.parse_args()
    raise SystemExit(run(args.out, args.N))
