"""Command-line driver.

Subcommands: simulate-master, simulate-exact, fit-kappa, predict, mqc,
compare.  Parameters come from an optional INI config file (one section per
subcommand) overridden by command-line flags; the SCRAMBLON_OUT environment
variable overrides the output directory.  Exit codes: 0 ok, 2 configuration
error, 3 numerical guard tripped, 4 I/O failure.

Times in filenames are the dimensionless product kappa t, e.g.
``master_N10000_kt4.csv``.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import brownian, exact, io, mqc, seft
from .brownian import KAPPA, StabilityError
from .core import InvalidDistributionError, to_continuum
from .exact import ExactSizeError
from .seft import ProtocolError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_PAULI_CODES = {"x": 1, "z": 2, "y": 3}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Resolved parameters of one CLI invocation."""

    command: str
    output_dir: Path
    seed: int = 0
    params: dict = field(default_factory=dict)

    def as_json(self) -> dict:
        out = {"seed": self.seed, "output_dir": str(self.output_dir)}
        out.update(self.params)
        return out


def _kt_name(prefix: str, N: int, kt: float, suffix: str = ".csv") -> str:
    return f"{prefix}_N{N}_kt{kt:g}{suffix}"


def _parse_kt_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ConfigError(f"bad kt list {text!r}: {e}")
    if not vals or any(v < 0 for v in vals):
        raise ConfigError("kt values must be nonnegative")
    return sorted(vals)


def _resolve(args, section: str, key: str, cast, default):
    """Flag > config file > default."""
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    if args.config is not None:
        cp = configparser.ConfigParser()
        read = cp.read(args.config)
        if not read:
            raise ConfigError(f"config file {args.config} not found or unreadable")
        if cp.has_option(section, key):
            try:
                return cast(cp.get(section, key))
            except ValueError as e:
                raise ConfigError(f"config [{section}] {key}: {e}")
    return default


def _output_dir(args, section: str) -> Path:
    env = os.environ.get("SCRAMBLON_OUT")
    if env:
        return Path(env)
    out = _resolve(args, section, "out", str, "runs")
    return Path(out)


def _ensure_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IOError(f"cannot create output directory {path}: {e}")


def _log(msg: str) -> None:
    print(msg)


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate_master(args) -> int:
    sec = "simulate-master"
    N = _resolve(args, sec, "N", int, None)
    if N is None:
        raise ConfigError("simulate-master requires --N")
    if N < 2:
        raise ConfigError("N must be >= 2")
    kts = _parse_kt_list(_resolve(args, sec, "kt", str, "4,6,8,10"))
    dt = _resolve(args, sec, "dt", float, None)
    out = _output_dir(args, sec)
    cfg = RunConfig(
        command=sec, output_dir=out, seed=0,
        params={"N": N, "kt": kts, "dt": dt, "kappa": KAPPA},
    )
    _ensure_dir(out)
    times = [kt / KAPPA for kt in kts]
    params = brownian.BrownianParams.for_snapshots(N, times, dt=dt)
    start = time.perf_counter()
    snaps = brownian.integrate_master(params)
    for kt, snap in zip(kts, snaps):
        path = out / _kt_name("master", N, kt)
        io.write_size_csv(path, snap)
        meta = {**cfg.as_json(), "this_kt": kt, "t": snap.time, "dt": params.dt}
        io.write_sidecar(path, sec, meta, time.perf_counter() - start)
        _log(f"wrote {path} (kt = {kt:g})")
        ana = brownian.analytic_late(N, snap.time, grid_size=2001)
        apath = out / _kt_name("analytic", N, kt)
        io.write_continuum_csv(apath, ana)
        io.write_sidecar(apath, sec, meta, time.perf_counter() - start)
    return EXIT_OK


def cmd_simulate_exact(args) -> int:
    sec = "simulate-exact"
    N = _resolve(args, sec, "N", int, None)
    t = _resolve(args, sec, "t", float, None)
    if N is None or t is None:
        raise ConfigError("simulate-exact requires --N and --t")
    if t < 0:
        raise ConfigError("t must be nonnegative")
    mode = _resolve(args, sec, "mode", str, "trotter")
    realizations = _resolve(args, sec, "realizations", int, 500)
    seed = _resolve(args, sec, "seed", int, 0)
    dt = _resolve(args, sec, "dt", float, 0.01)
    pauli = _resolve(args, sec, "pauli", str, "z")
    if mode not in ("trotter", "chain"):
        raise ConfigError(f"unknown mode {mode!r}")
    if pauli not in _PAULI_CODES:
        raise ConfigError(f"pauli must be one of x, y, z, got {pauli!r}")
    out = _output_dir(args, sec)
    cfg = RunConfig(
        command=sec, output_dir=out, seed=seed,
        params={"N": N, "t": t, "mode": mode, "realizations": realizations,
                "dt": dt, "pauli": pauli},
    )
    _ensure_dir(out)
    code = _PAULI_CODES[pauli]
    start = time.perf_counter()
    if mode == "trotter":
        dist = exact.trotter_brownian(N, t, dt, realizations, seed, initial_code=code)
    else:
        dist = exact.string_chain_evolve(N, t, initial_code=code).size_marginal()
    kt = KAPPA * t
    path = out / _kt_name(mode, N, kt)
    io.write_size_csv(path, dist)
    io.write_sidecar(path, sec, cfg.as_json(), time.perf_counter() - start)
    _log(f"wrote {path} (kt = {kt:g})")
    return EXIT_OK


def _load_snapshots(paths: list[str]):
    snaps = []
    for p in paths:
        p = Path(p)
        if not p.exists():
            raise ConfigError(f"input snapshot {p} does not exist")
        meta = io.read_sidecar(p)
        t = meta["config"].get("t")
        if t is None:
            raise ConfigError(f"{p}: sidecar does not record the snapshot time")
        snaps.append(io.read_size_csv(p, time=float(t)))
    return snaps


def cmd_fit_kappa(args) -> int:
    sec = "fit-kappa"
    if not args.inputs:
        raise ConfigError("fit-kappa requires input snapshot CSVs")
    out = _output_dir(args, sec)
    _ensure_dir(out)
    start = time.perf_counter()
    snaps = _load_snapshots(args.inputs)
    fit = seft.fit_kappa(snaps)
    path = out / "kappa_fit.json"
    doc = {
        "kappa": fit.kappa,
        "kappa_stderr": fit.kappa_stderr,
        "log_intercept": fit.log_intercept,
        "r_squared": fit.r_squared,
        "t0_points": [list(p) for p in fit.t0_points],
        "degenerate": fit.degenerate,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    io.write_sidecar(
        path, sec,
        {"inputs": [str(p) for p in args.inputs], "output_dir": str(out), "seed": 0},
        time.perf_counter() - start,
    )
    _log(f"wrote {path} (kappa = {fit.kappa:.4f})")
    return EXIT_OK


def cmd_predict(args) -> int:
    sec = "predict"
    if not args.inputs:
        raise ConfigError("predict requires input snapshot CSVs")
    method = _resolve(args, sec, "method", str, "change_of_variables")
    sigma = _resolve(args, sec, "sigma", float, 1e-2)
    window = _resolve(args, sec, "window", str, "0.03,0.05")
    grid_size = _resolve(args, sec, "grid-size", int, None)
    try:
        lo, hi = (float(x) for x in window.split(","))
    except ValueError:
        raise ConfigError(f"bad t0 selection window {window!r}")
    out = _output_dir(args, sec)
    _ensure_dir(out)
    start = time.perf_counter()
    snaps = _load_snapshots(args.inputs)
    cfg = seft.PredictionConfig(method=method, sigma=sigma)
    report = seft.run_protocol(snaps, t0_selection=(lo, hi), cfg=cfg,
                               grid_size=grid_size)
    N = snaps[0].N
    config_json = {
        "inputs": [str(p) for p in args.inputs], "method": method,
        "sigma": sigma, "window": [lo, hi], "grid_size": grid_size,
        "output_dir": str(out), "seed": 0,
    }
    band_files = {}
    for entry in report.per_time:
        t = entry["t"]
        kt = KAPPA * t
        path = out / _kt_name("band", N, kt)
        io.write_band_csv(
            path, report.band_grid,
            report.band_lo[t], report.band_hi[t], report.band_center[t],
        )
        io.write_sidecar(path, sec, {**config_json, "t": t},
                         time.perf_counter() - start)
        band_files[f"kt{kt:g}"] = path.name
        _log(f"wrote {path} (containment = {entry['band_containment']:.3f})")
    rpath = out / "protocol_report.json"
    report_json = report.to_json()
    report_json["band"] = band_files
    with open(rpath, "w") as fh:
        json.dump(report_json, fh, indent=2, sort_keys=True)
        fh.write("\n")
    io.write_sidecar(rpath, sec, config_json, time.perf_counter() - start)
    _log(f"wrote {rpath} (kappa = {report.fit.kappa:.4f})")
    return EXIT_OK


def cmd_mqc(args) -> int:
    sec = "mqc"
    N = _resolve(args, sec, "N", int, None)
    t = _resolve(args, sec, "t", float, None)
    if N is None or t is None:
        raise ConfigError("mqc requires --N and --t")
    pauli = _resolve(args, sec, "pauli", str, "z")
    realizations = _resolve(args, sec, "realizations", int, 200)
    seed = _resolve(args, sec, "seed", int, 0)
    dt = _resolve(args, sec, "dt", float, 0.01)
    phi_points = _resolve(args, sec, "phi-points", int, None)
    if pauli not in _PAULI_CODES:
        raise ConfigError(f"pauli must be one of x, y, z, got {pauli!r}")
    M = phi_points if phi_points is not None else 4 * N + 1
    if M < 2 * N + 1:
        raise ConfigError(f"phi-points must be >= {2 * N + 1} for N = {N}")
    out = _output_dir(args, sec)
    cfg = RunConfig(
        command=sec, output_dir=out, seed=seed,
        params={"N": N, "t": t, "pauli": pauli, "realizations": realizations,
                "dt": dt, "phi_points": M},
    )
    _ensure_dir(out)
    start = time.perf_counter()
    phi = 2.0 * math.pi * np.arange(M) / M
    code = _PAULI_CODES[pauli]
    if t == 0.0:
        op = exact.PauliCoefficients.from_matrix(
            exact._site_operator(code, 0, N), N
        )
        F = np.array([exact.mqc_F_exact(N, op, float(ph)) for ph in phi])
    else:
        F, _ = exact.trotter_mqc_F(N, t, dt, realizations, seed, phi,
                                   initial_code=code)
    spectrum = mqc.mqc_spectrum_from_F(N, F, time=t)
    kt = KAPPA * t
    spath = out / _kt_name("mqc", N, kt)
    io.write_spectrum_csv(spath, spectrum)
    io.write_sidecar(spath, sec, cfg.as_json(), time.perf_counter() - start)
    _log(f"wrote {spath} (kt = {kt:g})")

    # companion continuum prediction from analytic early data, for overlay
    t0 = math.log(max(0.03 * N, 1.5)) / KAPPA
    if t >= t0 and pauli == "z":
        early, _ = brownian.analytic_early(N, t0)
        u = np.linspace(-4.0, 4.0, 401)
        Iu = mqc.predict_Iz_from_early(early, KAPPA, t, u)
        cpath = out / _kt_name("mqc_seft", N, kt)
        io.write_mqc_continuum_csv(cpath, u, Iu)
        io.write_sidecar(cpath, sec, {**cfg.as_json(), "t0": t0},
                         time.perf_counter() - start)
        _log(f"wrote {cpath} (t0 = {t0:g})")
    return EXIT_OK


def _load_continuum(path: Path):
    """Continuum CSV directly, or a size CSV through to_continuum."""
    with open(path, newline="") as fh:
        header = fh.readline().strip()
    if header.startswith("s,"):
        return io.read_continuum_csv(path)
    return to_continuum(io.read_size_csv(path))


def cmd_compare(args) -> int:
    sec = "compare"
    a = Path(args.file_a)
    if not a.exists():
        raise ConfigError(f"input {a} does not exist")
    da = _load_continuum(a)
    if args.analytic_late:
        meta = io.read_sidecar(a)
        t = meta["config"].get("t")
        N_doc = meta["config"].get("N")
        if t is None or N_doc is None:
            raise ConfigError(f"{a}: sidecar lacks N or t for the analytic reference")
        db = brownian.analytic_late(int(N_doc), float(t), grid_size=da.s_grid.size)
        label = "analytic_late"
    else:
        if args.file_b is None:
            raise ConfigError("compare needs a second file or --analytic-late")
        b = Path(args.file_b)
        if not b.exists():
            raise ConfigError(f"input {b} does not exist")
        db = _load_continuum(b)
        label = str(b)
    l1, sup, ks = seft.distribution_distance(da, db)
    doc = {"a": str(a), "b": label, "l1": l1, "sup": sup, "ks": ks}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scramblon", description=__doc__)
    ap.add_argument("--config", help="INI config file; flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-master", help="birth-death master equation")
    p.add_argument("--N", type=int)
    p.add_argument("--kt", help="comma-separated kappa*t snapshot times")
    p.add_argument("--dt", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate_master)

    p = sub.add_parser("simulate-exact", help="small-N oracles")
    p.add_argument("--N", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--mode", choices=["trotter", "chain"])
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--pauli", choices=["x", "y", "z"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate_exact)

    p = sub.add_parser("fit-kappa", help="Lyapunov exponent fit")
    p.add_argument("inputs", nargs="*", help="early-time snapshot CSVs")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_kappa)

    p = sub.add_parser("predict", help="consistency-relation protocol")
    p.add_argument("inputs", nargs="*", help="snapshot CSVs, early and late")
    p.add_argument("--method", choices=["change_of_variables", "gaussian_delta"])
    p.add_argument("--sigma", type=float)
    p.add_argument("--window", help="t0 selection window for s0/s_sc, e.g. 0.03,0.05")
    p.add_argument("--grid-size", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("mqc", help="multiple-quantum coherence spectra")
    p.add_argument("--N", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--pauli", choices=["x", "y", "z"])
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--phi-points", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mqc)

    p = sub.add_parser("compare", help="distances between two distributions")
    p.add_argument("file_a")
    p.add_argument("file_b", nargs="?")
    p.add_argument("--analytic-late", action="store_true",
                   help="compare against the closed-form late-time density")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ProtocolError, ExactSizeError, InvalidDistributionError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityError as e:
        print(f"numerical guard: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"numerical guard: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
