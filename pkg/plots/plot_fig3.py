"""Render the size-distribution overlay from a completed run directory.

Layers: dashed numerics (master snapshots), solid analytic curves, and the
shaded prediction band.  Inputs are the CSV artifacts written by the CLI;
nothing in the run directory is modified.
"""
from __future__ import annotations

import argparse
import csv
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

MASTER_GLOB = "master_N*_kt*.csv"
ANALYTIC_GLOB = "analytic_N*_kt*.csv"
BAND_GLOB = "band_N*_kt*.csv"

_NAME_RE = re.compile(r"_N(\d+)_kt([0-9.]+)\.csv$")


@dataclass
class FigureSpec:
    """What goes on the axes and where the data comes from."""

    input_globs: tuple[str, ...] = (MASTER_GLOB, ANALYTIC_GLOB, BAND_GLOB)
    s_range: tuple[float, float] = (0.0, 1.0)
    log_density: bool = False
    labels: dict = field(default_factory=dict)
    explicit_files: tuple[str, ...] = ()

    def check_inputs(self, run_dir: Path) -> None:
        missing = [f for f in self.explicit_files if not (run_dir / f).exists()]
        if missing:
            raise FileNotFoundError(
                f"referenced input files missing from {run_dir}: {missing}"
            )


def _parse_name(path: Path):
    m = _NAME_RE.search(path.name)
    if m is None:
        raise ValueError(f"cannot parse N and kt from {path.name}")
    return int(m.group(1)), float(m.group(2))


def _read_columns(path: Path, expected: list[str]):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != expected:
            raise ValueError(f"{path}: expected header {','.join(expected)}")
        cols = [[] for _ in expected]
        for row in r:
            for c, v in zip(cols, row):
                c.append(float(v))
    return [np.array(c) for c in cols]


def _size_to_density(path: Path):
    """Size CSV n,p[,stderr] -> (s, density) with s = n/N."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header[:2] != ["n", "p"]:
            raise ValueError(f"{path}: expected header n,p[,stderr]")
        n, p = [], []
        for row in r:
            n.append(int(row[0]))
            p.append(float(row[1]))
    N = max(n)
    order = np.argsort(n)
    s = np.array(n, dtype=float)[order] / N
    density = np.array(p)[order] * N
    return s, density


def plot_fig3(run_dir, out=None, spec: FigureSpec | None = None) -> Path:
    run_dir = Path(run_dir)
    spec = spec or FigureSpec()
    spec.check_inputs(run_dir)
    masters = sorted(run_dir.glob(MASTER_GLOB))
    analytics = sorted(run_dir.glob(ANALYTIC_GLOB))
    bands = sorted(run_dir.glob(BAND_GLOB))
    if not masters and not analytics and not bands:
        raise FileNotFoundError(
            f"no inputs in {run_dir}: looked for {MASTER_GLOB}, "
            f"{ANALYTIC_GLOB}, {BAND_GLOB}"
        )
    if not bands:
        warnings.warn(f"no prediction band ({BAND_GLOB}) in {run_dir}; "
                      "rendering without the shaded layer")
    if not masters and not analytics:
        warnings.warn(f"only a band found in {run_dir}; rendering it alone")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in masters:
        _, kt = _parse_name(path)
        s, density = _size_to_density(path)
        label = spec.labels.get(kt, f"numerics, kt = {kt:g}")
        ax.plot(s, density, linestyle="--", label=label)
    for path in analytics:
        _, kt = _parse_name(path)
        s, density = _read_columns(path, ["s", "density"])
        ax.plot(s, density, linestyle="-",
                label=spec.labels.get(("analytic", kt), f"analytic, kt = {kt:g}"))
    for path in bands:
        _, kt = _parse_name(path)
        s, lo, hi, _center = _read_columns(path, ["s", "lo", "hi", "center"])
        ax.fill_between(s, lo, hi, alpha=0.3,
                        label=f"prediction band, kt = {kt:g}")

    ax.set_xlim(*spec.s_range)
    ax.set_xlabel("s")
    ax.set_ylabel("density")
    if spec.log_density:
        ax.set_yscale("log")
    ax.legend(fontsize=7)
    out = Path(out) if out is not None else run_dir / "fig3.png"
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("run_dir")
    ap.add_argument("--out")
    ap.add_argument("--log", action="store_true", help="log-scale density axis")
    args = ap.parse_args(argv)
    spec = FigureSpec(log_density=args.log)
    path = plot_fig3(args.run_dir, out=args.out, spec=spec)
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
