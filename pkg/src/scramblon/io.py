"""CSV and JSON artifact formats.

Every data file is a small CSV with a one-line header; numbers are written
with 17 significant digits so that round-tripping is exact for doubles.
Each file gets a JSON sidecar (same path plus ``.json``) recording the
command, the fully resolved configuration, and the wall time.  Sidecars
validate against ``schemas/sidecar.schema.json``.
"""
from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .core import ContinuumDistribution, SizeDistribution
from .mqc import MqcSpectrum

_FMT = "%.17g"


def _fmt(x: float) -> str:
    return _FMT % x


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_size_csv(path, dist: SizeDistribution) -> None:
    path = Path(path)
    if dist.stderr is not None:
        rows = (
            (str(n), _fmt(p), _fmt(e))
            for n, p, e in zip(dist.sizes, dist.p, dist.stderr)
        )
        _write_rows(path, ["n", "p", "stderr"], rows)
    else:
        rows = ((str(n), _fmt(p)) for n, p in zip(dist.sizes, dist.p))
        _write_rows(path, ["n", "p"], rows)


def read_size_csv(path, time: float = 0.0) -> SizeDistribution:
    path = Path(path)
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header[:2] != ["n", "p"]:
            raise ValueError(f"{path}: expected header n,p[,stderr]")
        has_err = len(header) > 2 and header[2] == "stderr"
        ns, ps, es = [], [], []
        for row in r:
            ns.append(int(row[0]))
            ps.append(float(row[1]))
            if has_err:
                es.append(float(row[2]))
    N = max(ns)
    if sorted(ns) != list(range(1, N + 1)):
        raise ValueError(f"{path}: size column must enumerate 1..N")
    p = np.empty(N)
    p[np.array(ns) - 1] = ps
    err = None
    if has_err:
        err = np.empty(N)
        err[np.array(ns) - 1] = es
    return SizeDistribution(N=N, p=p, time=time, stderr=err)


def write_continuum_csv(path, dist: ContinuumDistribution) -> None:
    rows = ((_fmt(s), _fmt(d)) for s, d in zip(dist.s_grid, dist.density))
    _write_rows(Path(path), ["s", "density"], rows)


def read_continuum_csv(path, time: float = 0.0) -> ContinuumDistribution:
    s, d = _read_two_columns(path, ["s", "density"])
    return ContinuumDistribution.from_samples(s, d, time=time)


def write_band_csv(path, s_grid, lo, hi, center) -> None:
    rows = (
        (_fmt(s), _fmt(a), _fmt(b), _fmt(c))
        for s, a, b, c in zip(s_grid, lo, hi, center)
    )
    _write_rows(Path(path), ["s", "lo", "hi", "center"], rows)


def write_spectrum_csv(path, spectrum: MqcSpectrum) -> None:
    rows = (
        (str(m), _fmt(w)) for m, w in zip(spectrum.orders, spectrum.weights)
    )
    _write_rows(Path(path), ["m", "I"], rows)


def read_spectrum_csv(path, time: float = 0.0) -> MqcSpectrum:
    m, I = _read_two_columns(path, ["m", "I"])
    N = int(np.max(np.abs(m)))
    N = max(N, 1)
    return MqcSpectrum(
        N=N, I={int(mi): float(wi) for mi, wi in zip(m, I)}, time=time
    )


def write_mqc_continuum_csv(path, u: np.ndarray, I: np.ndarray) -> None:
    rows = ((_fmt(a), _fmt(b)) for a, b in zip(u, I))
    _write_rows(Path(path), ["u", "I_continuum"], rows)


def _read_two_columns(path, expected_header):
    path = Path(path)
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != expected_header:
            raise ValueError(f"{path}: expected header {','.join(expected_header)}")
        a, b = [], []
        for row in r:
            a.append(float(row[0]))
            b.append(float(row[1]))
    return np.array(a), np.array(b)


def sidecar_schema() -> dict:
    text = resources.files("scramblon").joinpath("schemas/sidecar.schema.json").read_text()
    return json.loads(text)


def write_sidecar(data_path, command: str, config: dict, wall_time_s: float) -> None:
    data_path = Path(data_path)
    doc = {
        "command": command,
        "config": config,
        "wall_time_s": float(wall_time_s),
        "data_file": data_path.name,
    }
    jsonschema.validate(doc, sidecar_schema())
    with open(data_path.with_suffix(data_path.suffix + ".json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_sidecar(data_path) -> dict:
    data_path = Path(data_path)
    with open(data_path.with_suffix(data_path.suffix + ".json")) as fh:
        doc = json.load(fh)
    jsonschema.validate(doc, sidecar_schema())
    return doc
