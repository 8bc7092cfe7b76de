"""Multiple-quantum coherence: measured spectra and effective-theory closed forms.

F(phi) is the autocorrelator of an operator conjugated by a global z rotation.
Its Fourier coefficients I(m) over integer coherence orders m form the MQC
spectrum.  In the thermodynamic limit the spectrum concentrates on
u = m / sqrt(N) and admits closed forms driven by a source density h(y) and
the transform f_z of the z-operator source.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ContinuumDistribution, SourceFunction, S_SCRAMBLED
from .seft import _laplace_on_grid

#: 1 - f_z below this is treated as an exact delta in u (see seft_I).
DELTA_TOL = 1e-14


class SingularSpectrumError(ValueError):
    """The requested spectrum is a delta function, not a density."""


@dataclass(frozen=True)
class MqcSpectrum:
    """Coherence weights I(m) for integer orders m in [-N, N]."""

    N: int
    I: dict[int, float]
    time: float = 0.0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        weights = dict(self.I)
        for m, w in weights.items():
            if abs(m) > self.N:
                raise ValueError(f"coherence order {m} exceeds N = {self.N}")
            if w < -1e-10:
                raise ValueError(f"I({m}) = {w:g} below -1e-10")
        total = sum(weights.values())
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"spectrum sums to {total!r}, not 1")
        for m in range(1, self.N + 1):
            if abs(weights.get(m, 0.0) - weights.get(-m, 0.0)) > 1e-10:
                raise ValueError(f"I({m}) != I({-m}) beyond 1e-10")
        object.__setattr__(self, "I", weights)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.I.get(int(m), 0.0) for m in self.orders])

    def width(self) -> float:
        """Standard deviation of the coherence order."""
        w = self.weights
        m = self.orders.astype(float)
        return float(math.sqrt(np.dot(w, m**2) - np.dot(w, m) ** 2))


def mqc_spectrum_from_F(N: int, F_samples: np.ndarray, time: float = 0.0) -> MqcSpectrum:
    """Discrete Fourier transform of F sampled on a uniform grid over [0, 2pi).

    The grid must hold at least 2N + 1 points so coherence orders up to N
    are alias-free.
    """
    F = np.asarray(F_samples, dtype=float)
    if F.ndim != 1 or F.size < 2 * N + 1:
        raise ValueError(f"need at least {2 * N + 1} samples of F, got {F.size}")
    M = F.size
    phi = 2.0 * math.pi * np.arange(M) / M
    weights = {}
    for m in range(-N, N + 1):
        c = np.mean(F * np.exp(-1j * m * phi))
        weights[m] = float(c.real)
    return MqcSpectrum(N=N, I=weights, time=time)


def _transform_values(f_z, x: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f_z(x), dtype=float)
        if vals.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.asarray([float(f_z(float(xi))) for xi in x])
    if np.any(vals > 1.0 + 1e-4) or np.any(vals < -1e-4):
        raise ValueError("f_z must take values in [0, 1]")
    return np.clip(vals, 0.0, 1.0)


def seft_F(h: SourceFunction, f_z, lam: float, xi: float) -> float:
    """F(xi) = integral of h(y) exp(-(xi^2 / 4)(1 - f_z(lam y))) dy."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    w = 1.0 - _transform_values(f_z, lam * h.y_grid)
    return float(np.trapezoid(h.h * np.exp(-0.25 * xi * xi * w), h.y_grid))


def _I_via_F(h: SourceFunction, f_z, lam: float) -> float:
    """I(0) as (1/2pi) times the xi-integral of F, for the singular column."""
    w = 1.0 - _transform_values(f_z, lam * h.y_grid)
    w_floor = float(np.min(w[w > 0])) if np.any(w > 0) else DELTA_TOL
    xi_max = 8.0 / math.sqrt(max(w_floor, DELTA_TOL))
    xi = np.linspace(-xi_max, xi_max, 8193)
    F_vals = np.trapezoid(
        h.h[None, :] * np.exp(-0.25 * xi[:, None] ** 2 * w[None, :]),
        h.y_grid,
        axis=1,
    )
    return float(np.trapezoid(F_vals, xi) / (2.0 * math.pi))


def seft_I(h: SourceFunction, f_z, lam: float, u: float) -> float:
    """Continuum MQC density I(u) from the source h and transform f_z.

    Contributions with 1 - f_z below DELTA_TOL are a nascent delta at u = 0:
    they evaluate to zero for u != 0, and the u = 0 column falls back to
    integrating F over xi.
    """
    return float(seft_I_grid(h, f_z, lam, np.array([u]))[0])


def seft_I_grid(h: SourceFunction, f_z, lam: float, u: np.ndarray) -> np.ndarray:
    """seft_I over a whole u grid, evaluating the y-transform once."""
    if lam == 0.0:
        raise SingularSpectrumError("lam = 0 gives I(u) = delta(u)")
    u = np.asarray(u, dtype=float)
    w = 1.0 - _transform_values(f_z, lam * h.y_grid)
    singular = w < DELTA_TOL
    ok = ~singular
    kern = np.zeros((u.size, w.size))
    kern[:, ok] = (np.pi * w[ok]) ** -0.5 * np.exp(-u[:, None] ** 2 / w[None, ok])
    out = np.trapezoid(h.h[None, :] * kern, h.y_grid, axis=1)
    if np.any(singular):
        at_zero = u == 0.0
        if np.any(at_zero):
            out[at_zero] = _I_via_F(h, f_z, lam)
    return out


def predict_Iz_from_early(
    early_z: ContinuumDistribution, kappa: float, t: float, u
) -> np.ndarray:
    """Predict the late-time MQC density of a z Pauli from early size data.

    I_z(u, t) = integral over s1 of P(s1, t0) [pi (1 - S(eta s1))]^{-1/2}
    exp(-u^2 / (1 - S(eta s1))), with S the generating function of the early
    density and eta = exp(kappa (t - t0)) / (s_sc sbar0).
    """
    s0 = early_z.mean()
    ratio = s0 / S_SCRAMBLED
    if ratio > 0.1:
        warnings.warn(
            "early data outside the early-time regime (sbar0/s_sc > 0.1)",
            RuntimeWarning,
        )
    if t < early_z.time:
        raise ValueError("prediction time must not precede the early snapshot")
    eta = math.exp(kappa * (t - early_z.time)) / (S_SCRAMBLED * s0)
    s_max = float(early_z.s_grid[-1])
    s1 = np.unique(np.concatenate([[0.0], np.geomspace(s_max * 1e-9, s_max, 4097)]))
    p1 = np.interp(s1, early_z.s_grid, early_z.density)
    # geometric nodes resolve the exp(-eta s1 s2) kernel far below the
    # uniform grid spacing
    S_vals = _laplace_on_grid(early_z, eta * s1)
    w = 1.0 - S_vals
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    ok = w >= 1e-12
    kern = np.zeros((u_arr.size, s1.size))
    kern[:, ok] = (np.pi * w[ok]) ** -0.5 * np.exp(
        -u_arr[:, None] ** 2 / w[None, ok]
    )
    result = np.trapezoid(p1[None, :] * kern, s1, axis=1)
    return result if np.ndim(u) else float(result[0])
