"""Domain types for operator-size distributions and the transforms between them.

The discrete distribution P(n), n = 1..N, is the central observable.  Its
thermodynamic-limit view is a sampled density on a grid of s = n/N in [0, 1].
All quadrature is the trapezoidal rule on explicit grids: grids are data,
not assumptions.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

# Mean size fraction of a maximally scrambled operator in a spin-1/2 system:
# 3 of the 4 single-site Pauli options are non-identity.
S_SCRAMBLED = 0.75

#: Default number of points for continuum s-grids.  512 resolves a 1e-2
#: Gaussian smoothing width with >= 5 points per standard deviation.
DEFAULT_GRID_SIZE = 512

#: Probabilities below this are logic bugs; in [-CLAMP_TOL, 0) they are
#: integrator noise and get clamped to zero.
CLAMP_TOL = 1e-12


class InvalidDistributionError(ValueError):
    """A probability vector or density violates its construction contract."""


def _clamp_probabilities(p: np.ndarray) -> np.ndarray:
    if np.any(p < -CLAMP_TOL):
        worst = float(p.min())
        raise InvalidDistributionError(
            f"probability entry {worst:g} below -{CLAMP_TOL:g}: not integrator noise"
        )
    return np.where(p < 0.0, 0.0, p)


@dataclass(frozen=True)
class SizeDistribution:
    """Discrete operator-size distribution P(n) over n = 1..N at a given time."""

    N: int
    p: np.ndarray
    time: float = 0.0
    stderr: np.ndarray | None = None

    def __post_init__(self):
        if self.N < 1:
            raise InvalidDistributionError("N must be a positive integer")
        p = np.asarray(self.p, dtype=float)
        if p.shape != (self.N,):
            raise InvalidDistributionError(
                f"expected {self.N} probabilities, got shape {p.shape}"
            )
        p = _clamp_probabilities(p)
        total = p.sum()
        if abs(total - 1.0) > 1e-9:
            raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        if self.stderr is not None:
            e = np.asarray(self.stderr, dtype=float)
            if e.shape != (self.N,):
                raise InvalidDistributionError("stderr shape mismatch")
            e.setflags(write=False)
            object.__setattr__(self, "stderr", e)

    @property
    def sizes(self) -> np.ndarray:
        return np.arange(1, self.N + 1)


@dataclass(frozen=True)
class ContinuumDistribution:
    """Sampled density on an ascending grid of s in [0, 1]."""

    s_grid: np.ndarray
    density: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.s_grid, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if s.ndim != 1 or s.shape != d.shape or s.size < 2:
            raise InvalidDistributionError("grid/density shape mismatch")
        if np.any(np.diff(s) <= 0):
            raise InvalidDistributionError("s_grid must be strictly ascending")
        if s[0] < -1e-12 or s[-1] > 1.0 + 1e-12:
            raise InvalidDistributionError("s_grid must lie in [0, 1]")
        d = _clamp_probabilities(d)
        integral = np.trapezoid(d, s)
        if abs(integral - 1.0) > 1e-6:
            raise InvalidDistributionError(
                f"density integrates to {integral!r}, not 1"
            )
        s.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "s_grid", s)
        object.__setattr__(self, "density", d)

    @classmethod
    def from_samples(cls, s_grid, density, time=0.0) -> "ContinuumDistribution":
        """Build from raw samples, renormalizing the trapezoidal integral to 1."""
        s = np.asarray(s_grid, dtype=float)
        d = _clamp_probabilities(np.asarray(density, dtype=float))
        integral = np.trapezoid(d, s)
        if integral <= 0:
            raise InvalidDistributionError("density integrates to a non-positive value")
        return cls(s_grid=s, density=d / integral, time=time)

    def mean(self) -> float:
        return float(np.trapezoid(self.s_grid * self.density, self.s_grid))

    def generating(self, nu: float) -> float:
        """Continuum generating function: integral of density * exp(-nu s)."""
        return float(
            np.trapezoid(self.density * np.exp(-nu * self.s_grid), self.s_grid)
        )


@dataclass(frozen=True)
class ScramblonParams:
    """Propagator parameters: lambda(t) = exp(kappa t) / C."""

    kappa: float
    C: float
    s_sc: float = S_SCRAMBLED

    def __post_init__(self):
        if self.kappa <= 0 or self.C <= 0:
            raise ValueError("kappa and C must be positive")
        if self.s_sc != S_SCRAMBLED:
            raise ValueError("scrambled size fraction is fixed at 3/4 for spin models")

    def propagator(self, t: float) -> float:
        return float(np.exp(self.kappa * t) / self.C)


@dataclass(frozen=True)
class SourceFunction:
    """Sampled vertex source density h(y) on an ascending y-grid, y >= 0."""

    y_grid: np.ndarray
    h: np.ndarray
    weight_norm: float = 1.0

    def __post_init__(self):
        y = np.asarray(self.y_grid, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if y.ndim != 1 or y.shape != h.shape or y.size < 2:
            raise InvalidDistributionError("grid/value shape mismatch")
        if np.any(np.diff(y) <= 0) or y[0] < 0:
            raise InvalidDistributionError("y_grid must be ascending and nonnegative")
        if np.any(h < 0):
            raise InvalidDistributionError("h(y) must be nonnegative on the grid")
        integral = np.trapezoid(h, y)
        if abs(integral - self.weight_norm) > 1e-6:
            raise InvalidDistributionError(
                f"h integrates to {integral!r}, expected {self.weight_norm}"
            )
        y.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "y_grid", y)
        object.__setattr__(self, "h", h)


def uniform_s_grid(grid_size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    return np.linspace(0.0, 1.0, grid_size)


def to_continuum(d: SizeDistribution, grid_size: int = DEFAULT_GRID_SIZE) -> ContinuumDistribution:
    """Thermodynamic-limit view: density(s) = N * P(round(s N)), renormalized.

    P(0) is taken as zero (the identity carries no weight for a normalized
    traceless observable).
    """
    s = uniform_s_grid(grid_size)
    # nearest valid size; s = 0 reads P(1), the identity carries no weight
    n = np.clip(np.rint(s * d.N).astype(int), 1, d.N)
    density = d.N * d.p[n - 1]
    if not np.any(density > 0):
        # rounding skipped every populated n: grid too coarse to resolve
        warnings.warn(
            "distribution under-resolved by the continuum grid; rendering a grid peak",
            RuntimeWarning,
        )
        s_peak = (int(np.argmax(d.p)) + 1) / d.N
        density = np.zeros_like(s)
        density[np.argmin(np.abs(s - s_peak))] = 1.0
    return ContinuumDistribution.from_samples(s, density, time=d.time)


def mean_size(d: SizeDistribution) -> float:
    """Average size fraction sum_n (n/N) P(n), in [1/N, 1]."""
    return float(np.dot(d.sizes, d.p) / d.N)


def generating_function(d: SizeDistribution, nu: float) -> float:
    """sum_n P(n) exp(-nu n / N); equals 1 at nu = 0."""
    return float(np.dot(d.p, np.exp(-nu * d.sizes / d.N)))


def laplace_of_source(h: SourceFunction, x: float) -> float:
    """f(x) = integral of h(y) exp(-x y) dy by trapezoid on the y-grid."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    kernel = np.exp(-x * h.y_grid)
    if np.all(kernel == 0.0):
        warnings.warn("Laplace kernel underflows on the whole grid", RuntimeWarning)
        return 0.0
    return float(np.trapezoid(h.h * kernel, h.y_grid))
