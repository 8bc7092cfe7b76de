"""Render an MQC spectrum as bars with the continuum prediction overlaid.

Coherence weights I(m) from ``mqc_N{N}_kt{kt}.csv`` are drawn as bars at
u = m / sqrt(N) with height sqrt(N) I(m), which is the density convention
of the continuum curve in ``mqc_seft_N{N}_kt{kt}.csv``.  If the continuum
file is absent the bars are rendered alone with a warning.
"""
from __future__ import annotations

import argparse
import csv
import math
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from plot_fig3 import _parse_name, _read_columns

SPECTRUM_GLOB = "mqc_N*_kt*.csv"


def _read_spectrum(path: Path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["m", "I"]:
            raise ValueError(f"{path}: expected header m,I")
        m, I = [], []
        for row in r:
            m.append(int(float(row[0])))
            I.append(float(row[1]))
    return np.array(m), np.array(I)


def plot_mqc(run_dir, out=None) -> Path:
    run_dir = Path(run_dir)
    spectra = [p for p in sorted(run_dir.glob(SPECTRUM_GLOB))
               if not p.name.startswith("mqc_seft")]
    if not spectra:
        raise FileNotFoundError(f"no MQC spectra in {run_dir} ({SPECTRUM_GLOB})")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in spectra:
        N, kt = _parse_name(path)
        m, I = _read_spectrum(path)
        root = math.sqrt(N)
        ax.bar(m / root, I * root, width=0.8 / root, alpha=0.6,
               label=f"I(m), N = {N}, kt = {kt:g}")
        seft_path = run_dir / f"mqc_seft_N{N}_kt{kt:g}.csv"
        if seft_path.exists():
            u, Iu = _read_columns(seft_path, ["u", "I_continuum"])
            ax.plot(u, Iu, "-", label=f"prediction, kt = {kt:g}")
        else:
            warnings.warn(
                f"no continuum prediction {seft_path.name}; bars only"
            )
    ax.set_xlabel("u = m / sqrt(N)")
    ax.set_ylabel("sqrt(N) I(m)")
    ax.legend(fontsize=7)
    out = Path(out) if out is not None else run_dir / "mqc.png"
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("run_dir")
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    path = plot_mqc(args.run_dir, out=args.out)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
