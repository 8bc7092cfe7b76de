"""Large-N birth-death master equation for the all-to-all Brownian spin circuit.

Operator size n performs a classical birth-death process on 1..N.  The rates
follow from counting anticommuting two-site couplings: each of the couplings
transfers weight at rate 4 J^2 = 1/(2N).  A pair with one site inside the
support and one outside contributes 6 size-raising couplings, a pair with both
sites inside contributes 4 size-lowering ones, giving

    up(n)   = 3 n (N - n) / N
    down(n) = n (n - 1) / N

The chain's growth exponent is 3 (the model's Lyapunov exponent) and its
stationary state is the scrambled ensemble P(n) ~ 3^n C(N, n).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import gammaln, logsumexp

from .core import ContinuumDistribution, SizeDistribution, S_SCRAMBLED

#: Growth exponent fixed by the coupling normalization J = (8N)^(-1/2).
KAPPA = 3.0

#: Explicit RK4 stability guard: dt times the largest transition rate.
STABILITY_LIMIT = 0.1

_EULER_GAMMA = 0.5772156649015328606


class StabilityError(RuntimeError):
    """Integration step too large for the fastest transition rate."""

    def __init__(self, dt: float, required_dt: float):
        self.dt = dt
        self.required_dt = required_dt
        super().__init__(
            f"dt = {dt:g} violates the stability guard; need dt <= {required_dt:g}"
        )


@dataclass(frozen=True)
class BirthDeathRates:
    """Rate vectors up(n), down(n) for n = 1..N (stored at index n-1)."""

    N: int
    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("birth-death chain needs N >= 2")
        for name in ("up", "down"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (self.N,):
                raise ValueError(f"{name} must have length N")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if self.up[-1] != 0.0 or self.down[0] != 0.0:
            raise ValueError("chain must be confined to 1..N")

    @property
    def max_rate(self) -> float:
        return float(np.max(self.up + self.down))


def build_rates(N: int) -> BirthDeathRates:
    if N < 2:
        raise ValueError("invalid model: N must be >= 2")
    n = np.arange(1, N + 1, dtype=float)
    up = 3.0 * n * (N - n) / N
    down = n * (n - 1.0) / N
    return BirthDeathRates(N=N, up=up, down=down)


def stable_dt(N: int, safety: float = 0.9) -> float:
    """Largest dt passing the stability guard, with a safety margin."""
    return safety * STABILITY_LIMIT / build_rates(N).max_rate


@dataclass(frozen=True)
class BrownianParams:
    N: int
    dt: float
    t_max: float
    record_times: tuple[float, ...]
    kappa: float = KAPPA

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("invalid model: N must be >= 2")
        if self.kappa != KAPPA:
            raise ValueError("kappa is fixed to 3 by the coupling normalization")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        times = tuple(sorted(float(t) for t in self.record_times))
        if times and (times[0] < 0 or times[-1] > self.t_max + 1e-12):
            raise ValueError("record_times must lie in [0, t_max]")
        object.__setattr__(self, "record_times", times)

    @classmethod
    def for_snapshots(cls, N: int, record_times, dt: float | None = None) -> "BrownianParams":
        times = tuple(sorted(float(t) for t in record_times))
        if dt is None:
            dt = stable_dt(N)
        return cls(N=N, dt=dt, t_max=times[-1] if times else 0.0, record_times=times)


@njit(cache=True, fastmath=True)
def _rk4_run(p, up, dn, h, nsteps):  # pragma: no cover - compiled
    # p, up, dn are padded to length N + 2 with zero ghost cells.
    n = p.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    k1[0] = k1[n - 1] = k2[0] = k2[n - 1] = 0.0
    k3[0] = k3[n - 1] = k4[0] = k4[n - 1] = 0.0
    tmp[0] = tmp[n - 1] = 0.0
    for _ in range(nsteps):
        for i in range(1, n - 1):
            k1[i] = up[i - 1] * p[i - 1] + dn[i + 1] * p[i + 1] - (up[i] + dn[i]) * p[i]
        for i in range(1, n - 1):
            tmp[i] = p[i] + 0.5 * h * k1[i]
        for i in range(1, n - 1):
            k2[i] = up[i - 1] * tmp[i - 1] + dn[i + 1] * tmp[i + 1] - (up[i] + dn[i]) * tmp[i]
        for i in range(1, n - 1):
            tmp[i] = p[i] + 0.5 * h * k2[i]
        for i in range(1, n - 1):
            k3[i] = up[i - 1] * tmp[i - 1] + dn[i + 1] * tmp[i + 1] - (up[i] + dn[i]) * tmp[i]
        for i in range(1, n - 1):
            tmp[i] = p[i] + h * k3[i]
        for i in range(1, n - 1):
            k4[i] = up[i - 1] * tmp[i - 1] + dn[i + 1] * tmp[i + 1] - (up[i] + dn[i]) * tmp[i]
        for i in range(1, n - 1):
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def master_rhs(rates: BirthDeathRates, p: np.ndarray) -> np.ndarray:
    """Right-hand side of the master equation for a probability vector."""
    up, dn = rates.up, rates.down
    out = -(up + dn) * p
    out[1:] += up[:-1] * p[:-1]
    out[:-1] += dn[1:] * p[1:]
    return out


def integrate_master(params: BrownianParams, initial: SizeDistribution | None = None) -> list[SizeDistribution]:
    """Evolve P(n, t) by explicit RK4 and return snapshots at record_times."""
    rates = build_rates(params.N)
    required = STABILITY_LIMIT / rates.max_rate
    if params.dt > required:
        raise StabilityError(params.dt, required)
    if initial is None:
        p0 = np.zeros(params.N)
        p0[0] = 1.0
        initial = SizeDistribution(N=params.N, p=p0, time=0.0)
    if initial.N != params.N:
        raise ValueError("initial distribution has the wrong N")

    pad = np.zeros(params.N + 2)
    pad[1:-1] = initial.p
    up = np.zeros(params.N + 2)
    dn = np.zeros(params.N + 2)
    up[1:-1] = rates.up
    dn[1:-1] = rates.down

    snapshots = []
    t = 0.0
    for t_rec in params.record_times:
        seg = t_rec - t
        if seg > 1e-15:
            nsteps = int(math.ceil(seg / params.dt))
            _rk4_run(pad, up, dn, seg / nsteps, nsteps)
            t = t_rec
        snapshots.append(SizeDistribution(N=params.N, p=pad[1:-1].copy(), time=t_rec))
    return snapshots


def stationary_distribution(N: int) -> SizeDistribution:
    """Scrambled ensemble P(n) = 3^n C(N, n) / (4^N - 1), built in log space."""
    if N < 1:
        raise ValueError("N must be positive")
    n = np.arange(1, N + 1, dtype=float)
    logw = n * math.log(3.0) + gammaln(N + 1) - gammaln(n + 1) - gammaln(N - n + 1)
    logp = logw - logsumexp(logw)
    return SizeDistribution(N=N, p=np.exp(logp))


def _adaptive_grid_size(scale: float, floor: int = 512, cap: int = 20001) -> int:
    """Enough points to put ~20 of them per decay length 1/scale."""
    return int(min(cap, max(floor, 20 * scale + 1)))


def analytic_early(N: int, t0: float, grid_size: int | None = None) -> tuple[ContinuumDistribution, float]:
    """Early-time continuum density N e^{-kt0} exp(-s N e^{-kt0}) and its mean."""
    if math.exp(KAPPA * t0) > 0.2 * N:
        warnings.warn(
            "early-time form used outside its regime (e^(kappa t0) > 0.2 N)",
            RuntimeWarning,
        )
    mu = N * math.exp(-KAPPA * t0)
    if grid_size is None:
        grid_size = _adaptive_grid_size(mu)
    s = np.linspace(0.0, 1.0, grid_size)
    density = mu * np.exp(-s * mu)
    dist = ContinuumDistribution.from_samples(s, density, time=t0)
    return dist, 1.0 / mu


def analytic_late(N: int, t: float, grid_size: int | None = None) -> ContinuumDistribution:
    """Closed-form late-time continuum density; zero at and beyond s = 3/4."""
    mu = N * math.exp(-KAPPA * t)
    if grid_size is None:
        grid_size = _adaptive_grid_size(mu)
    s = np.linspace(0.0, 1.0, grid_size)
    density = np.zeros_like(s)
    inside = s < S_SCRAMBLED
    shrink = 1.0 - s[inside] / S_SCRAMBLED
    density[inside] = mu / shrink**2 * np.exp(-s[inside] * mu / shrink)
    return ContinuumDistribution.from_samples(s, density, time=t)


def moment_formula(N: int, t: float) -> float:
    """Mean size ratio sbar/s_sc = 1 + a e^a Ei(-a) with a = s_sc N e^{-kappa t}."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    a = S_SCRAMBLED * N * math.exp(-KAPPA * t)
    if a == 0.0:
        return 1.0
    if a <= 5.0:
        return 1.0 + a * math.exp(a) * exp_integral(-a)
    # a e^a Ei(-a) = -a e^a E1(a); use the scaled continued fraction to
    # dodge exp overflow.
    return 1.0 - a * _e1_scaled_cf(a)


def exp_integral(x: float) -> float:
    """Exponential integral Ei(x) for x < 0, relative error <= 1e-12.

    Power series around 0 up to |x| = 5; beyond that the alternating series
    cancels catastrophically in doubles, so a continued fraction for
    E1(-x) = -Ei(x) takes over.
    """
    if x >= 0:
        raise ValueError("exp_integral is defined here for x < 0 only")
    ax = -x
    if ax <= 5.0:
        total = _EULER_GAMMA + math.log(ax)
        term = 1.0
        k = 0
        while True:
            k += 1
            term *= x / k
            contrib = term / k
            total += contrib
            if abs(contrib) < 1e-17 * (abs(total) + 1e-300):
                return total
            if k > 200:  # series converges long before this
                return total
    return -math.exp(-ax) * _e1_scaled_cf(ax)


def _e1_scaled_cf(x: float) -> float:
    """e^x E1(x) by the modified Lentz continued fraction, x > 0."""
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 300):
        a = -float(i) * float(i)
        b += 2.0
        d = a * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h
