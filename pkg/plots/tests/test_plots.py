import math

import numpy as np
import pytest

from plot_fig3 import FigureSpec, plot_fig3
from plot_mqc import plot_mqc


def write_master(run_dir, N=100, kt=8.0):
    n = np.arange(1, N + 1)
    p = np.exp(-((n / N - 0.7) ** 2) / 0.01)
    p /= p.sum()
    path = run_dir / f"master_N{N}_kt{kt:g}.csv"
    lines = ["n,p"] + [f"{ni},{pi:.17g}" for ni, pi in zip(n, p)]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_analytic(run_dir, N=100, kt=8.0):
    s = np.linspace(0.0, 1.0, 201)
    d = np.exp(-((s - 0.7) ** 2) / 0.01)
    d /= np.trapezoid(d, s)
    path = run_dir / f"analytic_N{N}_kt{kt:g}.csv"
    lines = ["s,density"] + [f"{a:.17g},{b:.17g}" for a, b in zip(s, d)]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_band(run_dir, N=100, kt=8.0):
    s = np.linspace(0.0, 1.0, 201)
    c = np.exp(-((s - 0.7) ** 2) / 0.01)
    path = run_dir / f"band_N{N}_kt{kt:g}.csv"
    lines = ["s,lo,hi,center"] + [
        f"{a:.17g},{0.9 * b:.17g},{1.1 * b:.17g},{b:.17g}"
        for a, b in zip(s, c)
    ]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_spectrum(run_dir, N=4, kt=0.0, weights=None):
    weights = weights if weights is not None else {1: 0.5, -1: 0.5}
    path = run_dir / f"mqc_N{N}_kt{kt:g}.csv"
    lines = ["m,I"] + [
        f"{m},{weights.get(m, 0.0):.17g}" for m in range(-N, N + 1)
    ]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_seft_curve(run_dir, N=4, kt=3.0):
    u = np.linspace(-3.0, 3.0, 121)
    I = np.exp(-u * u) / math.sqrt(math.pi)
    path = run_dir / f"mqc_seft_N{N}_kt{kt:g}.csv"
    lines = ["u,I_continuum"] + [f"{a:.17g},{b:.17g}" for a, b in zip(u, I)]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestPlotFig3:
    def test_full_overlay(self, tmp_path):
        write_master(tmp_path)
        write_analytic(tmp_path)
        write_band(tmp_path)
        out = plot_fig3(tmp_path)
        assert out.exists()
        assert out.stat().st_size > 0

    def test_inputs_unchanged(self, tmp_path):
        m = write_master(tmp_path)
        a = write_analytic(tmp_path)
        b = write_band(tmp_path)
        before = {p: p.read_bytes() for p in (m, a, b)}
        plot_fig3(tmp_path)
        for p, data in before.items():
            assert p.read_bytes() == data

    def test_empty_dir_lists_globs(self, tmp_path):
        with pytest.raises(FileNotFoundError) as e:
            plot_fig3(tmp_path)
        msg = str(e.value)
        assert "master_N*_kt*.csv" in msg
        assert "band_N*_kt*.csv" in msg

    def test_missing_band_warns(self, tmp_path):
        write_master(tmp_path)
        write_analytic(tmp_path)
        with pytest.warns(UserWarning, match="band"):
            out = plot_fig3(tmp_path)
        assert out.exists()

    def test_band_only_warns(self, tmp_path):
        write_band(tmp_path)
        with pytest.warns(UserWarning):
            out = plot_fig3(tmp_path)
        assert out.exists()

    def test_spec_rejects_missing_explicit_file(self, tmp_path):
        write_master(tmp_path)
        spec = FigureSpec(explicit_files=("analytic_N100_kt8.csv",))
        with pytest.raises(FileNotFoundError):
            plot_fig3(tmp_path, spec=spec)

    def test_custom_output_path(self, tmp_path):
        write_master(tmp_path)
        write_analytic(tmp_path)
        write_band(tmp_path)
        out = plot_fig3(tmp_path, out=tmp_path / "custom.png")
        assert out.name == "custom.png"
        assert out.exists()


class TestPlotMqc:
    def test_two_bar_spectrum(self, tmp_path):
        write_spectrum(tmp_path)
        with pytest.warns(UserWarning, match="bars only"):
            out = plot_mqc(tmp_path)
        assert out.exists()

    def test_with_continuum_overlay(self, tmp_path):
        write_spectrum(tmp_path, kt=3.0, weights={0: 0.4, 1: 0.3, -1: 0.3})
        write_seft_curve(tmp_path, kt=3.0)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            out = plot_mqc(tmp_path)
        assert out.exists()

    def test_empty_dir(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            plot_mqc(tmp_path)

    def test_inputs_unchanged(self, tmp_path):
        s = write_spectrum(tmp_path)
        before = s.read_bytes()
        with pytest.warns(UserWarning):
            plot_mqc(tmp_path)
        assert s.read_bytes() == before
