"""Brute-force oracles at small N.

Three independent routes to the operator size distribution:

* the disorder-averaged 4^N Pauli-string Markov chain,
* Trotterized unitary evolution of explicit Brownian realizations,
* triplet counting on the doubled EPR system.

Pauli site codes use the symplectic encoding I=0, X=1, Z=2, Y=3 (bit 0 is
the X component, bit 1 the Z component), so products of strings are bitwise
XOR of their codes.  A string index packs site j into bits [2j, 2j+1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core import SizeDistribution

MAX_CHAIN_SPINS = 8     # 65536 string weights
MAX_STATE_SPINS = 6     # doubled system of 12 qubits

_CODE_NAMES = "IXZY"

# single-site Pauli matrices in symplectic code order
_PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[1, 0], [0, -1]],
        [[0, -1j], [1j, 0]],
    ],
    dtype=complex,
)

# anticommutation table of single-site codes
_AC = np.zeros((4, 4), dtype=np.int64)
for _a in range(4):
    for _b in range(4):
        ax, az = _a & 1, _a >> 1
        bx, bz = _b & 1, _b >> 1
        _AC[_a, _b] = (ax * bz + az * bx) % 2


class ExactSizeError(ValueError):
    """System size beyond the exact-evolution caps."""


def string_sizes(N: int) -> np.ndarray:
    """Number of non-identity sites for every string index 0..4^N-1."""
    idx = np.arange(4**N, dtype=np.int64)
    sizes = np.zeros(4**N, dtype=np.int64)
    for j in range(N):
        sizes += ((idx >> (2 * j)) & 3) != 0
    return sizes


@dataclass(frozen=True)
class PauliString:
    """A single basis string as per-site codes."""

    code: tuple[int, ...]

    def __post_init__(self):
        if any(c not in (0, 1, 2, 3) for c in self.code):
            raise ValueError("site codes must be in 0..3")

    @property
    def size(self) -> int:
        return sum(1 for c in self.code if c != 0)

    @property
    def index(self) -> int:
        return sum(c << (2 * j) for j, c in enumerate(self.code))

    def __str__(self) -> str:
        return "".join(_CODE_NAMES[c] for c in self.code)


@dataclass(frozen=True)
class PauliCoefficients:
    """Real amplitudes of a normalized Hermitian operator in the string basis."""

    N: int
    c: np.ndarray

    def __post_init__(self):
        if not 1 <= self.N <= 12:
            raise ExactSizeError("PauliCoefficients supports 1 <= N <= 12")
        c = np.asarray(self.c, dtype=float)
        if c.shape != (4**self.N,):
            raise ValueError("coefficient vector must have length 4^N")
        norm = float(np.dot(c, c))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"squared coefficients sum to {norm!r}, not 1")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_matrix(cls, op: np.ndarray, N: int) -> "PauliCoefficients":
        c = pauli_decompose(op, N)
        if np.max(np.abs(c.imag)) > 1e-9:
            raise ValueError("operator is not Hermitian: complex string amplitudes")
        return cls(N=N, c=c.real)

    def to_matrix(self) -> np.ndarray:
        return pauli_compose(self.c.astype(complex), self.N)

    def size_histogram(self) -> SizeDistribution:
        """P(n) from squared string amplitudes; identity weight must vanish."""
        w = self.c**2
        hist = np.bincount(string_sizes(self.N), weights=w, minlength=self.N + 1)
        if hist[0] > 1e-12:
            raise ValueError("operator has identity weight; size distribution undefined")
        p = hist[1:] / hist[1:].sum()
        return SizeDistribution(N=self.N, p=p)


@dataclass(frozen=True)
class PauliWeights:
    """Disorder-averaged squared string weights (a probability vector on strings)."""

    N: int
    w: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if not 1 <= self.N <= MAX_CHAIN_SPINS:
            raise ExactSizeError(f"string chain capped at N = {MAX_CHAIN_SPINS}")
        w = np.asarray(self.w, dtype=float)
        if w.shape != (4**self.N,):
            raise ValueError("weight vector must have length 4^N")
        if np.any(w < -1e-12):
            raise ValueError("negative string weight beyond tolerance")
        w = np.where(w < 0, 0.0, w)
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("string weights must sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def size_marginal(self) -> SizeDistribution:
        hist = np.bincount(string_sizes(self.N), weights=self.w, minlength=self.N + 1)
        return SizeDistribution(N=self.N, p=hist[1:] / hist[1:].sum(), time=self.time)


def _chain_couplings(N: int):
    """Effective couplings (code_bits, rate) after merging identical products.

    A two-site coupling with one identity factor acts as the same string for
    every partner site, so its N-1 copies merge into one move at rate
    (N-1)/(2N); genuine two-site couplings keep the per-coupling rate 1/(2N).
    """
    rate = 1.0 / (2.0 * N)
    out = []
    for i in range(N):
        for mu in (1, 2, 3):
            out.append(((i, mu, None, None), (N - 1) * rate))
    for i in range(N):
        for j in range(i + 1, N):
            for mu in (1, 2, 3):
                for nu in (1, 2, 3):
                    out.append(((i, mu, j, nu), rate))
    return out


def _chain_generator(N: int):
    """Sparse generator of the string master equation."""
    from scipy.sparse import coo_matrix

    dim = 4**N
    idx = np.arange(dim, dtype=np.int64)
    site_codes = [(idx >> (2 * j)) & 3 for j in range(N)]
    rows, cols, vals = [], [], []
    diag = np.zeros(dim)
    for (i, mu, j, nu), rate in _chain_couplings(N):
        anti = _AC[site_codes[i], mu]
        gbits = mu << (2 * i)
        if j is not None:
            anti = anti ^ _AC[site_codes[j], nu]
            gbits |= nu << (2 * j)
        mask = anti == 1
        src = idx[mask]
        rows.append(src ^ gbits)
        cols.append(src)
        vals.append(np.full(src.size, rate))
        diag[src] -= rate
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    L = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    return L


def string_chain_evolve(N: int, t: float, dt: float | None = None,
                        initial_site: int = 0, initial_code: int = 2) -> PauliWeights:
    """Evolve the disorder-averaged string weights by RK4 on the full chain.

    The default initial string is Z on the first site.
    """
    if N > MAX_CHAIN_SPINS:
        raise ExactSizeError(f"string chain capped at N = {MAX_CHAIN_SPINS}")
    if N < 2:
        raise ExactSizeError("need at least two spins")
    L = _chain_generator(N)
    max_rate = float(np.max(-L.diagonal()))
    if dt is None:
        dt = 0.09 / max_rate
    if dt * max_rate > 0.1:
        raise ValueError(f"dt too large for stability; need dt <= {0.1 / max_rate:g}")
    w = np.zeros(4**N)
    w[initial_code << (2 * initial_site)] = 1.0
    if t > 0:
        nsteps = int(math.ceil(t / dt))
        h = t / nsteps
        for _ in range(nsteps):
            k1 = L @ w
            k2 = L @ (w + 0.5 * h * k1)
            k3 = L @ (w + 0.5 * h * k2)
            k4 = L @ (w + h * k3)
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return PauliWeights(N=N, w=w, time=t)


def _site_operator(code: int, site: int, N: int) -> np.ndarray:
    """Embed a single-site Pauli; site 0 occupies the least significant qubit."""
    op = _PAULI[code]
    return np.kron(np.kron(np.eye(2 ** (N - 1 - site)), op), np.eye(2**site))


def _pair_basis(N: int):
    """All distinct Brownian coupling operators sigma^i_mu sigma^j_nu, i < j."""
    singles = [[_site_operator(c, i, N) for c in range(4)] for i in range(N)]
    mats = []
    for i in range(N):
        for j in range(i + 1, N):
            for mu in range(4):
                for nu in range(4):
                    if mu == 0 and nu == 0:
                        continue  # global phase only
                    mats.append(singles[i][mu] @ singles[j][nu])
    return np.array(mats)


def pauli_decompose(op: np.ndarray, N: int) -> np.ndarray:
    """String amplitudes c[idx] = tr(P_idx op) / 2^N via sitewise transforms."""
    dim = 2**N
    if op.shape != (dim, dim):
        raise ValueError("operator shape does not match N")
    # M[alpha, 2r+c] maps a single-site 2x2 block to Pauli amplitudes
    M = 0.5 * np.array(
        [[1, 0, 0, 1], [0, 1, 1, 0], [1, 0, 0, -1], [0, 1j, -1j, 0]], dtype=complex
    )
    # axes: (r_{N-1} .. r_0, c_{N-1} .. c_0) -> interleave each site's (r, c)
    T = op.reshape((2,) * (2 * N))
    perm = []
    for j in range(N):  # site N-1-j at position j
        perm.extend([j, N + j])
    T = T.transpose(perm).reshape((4,) * N)
    for axis in range(N):
        T = np.moveaxis(np.tensordot(M, np.moveaxis(T, axis, 0), axes=([1], [0])), 0, axis)
    # axis 0 is site N-1; flatten so that site 0 is least significant
    return T.reshape(-1)


def pauli_compose(c: np.ndarray, N: int) -> np.ndarray:
    """Inverse of pauli_decompose."""
    Minv = np.array(
        [[1, 0, 1, 0], [0, 1, 0, -1j], [0, 1, 0, 1j], [1, 0, -1, 0]], dtype=complex
    )
    T = np.asarray(c, dtype=complex).reshape((4,) * N)
    for axis in range(N):
        T = np.moveaxis(np.tensordot(Minv, np.moveaxis(T, axis, 0), axes=([1], [0])), 0, axis)
    T = T.reshape((2, 2) * N)
    perm = [2 * j for j in range(N)] + [2 * j + 1 for j in range(N)]
    return T.transpose(perm).reshape(2**N, 2**N)


def _trotter_operators(N: int, t: float, dt: float, realizations: int, seed: int,
                       initial_site: int, initial_code: int):
    """Yield the Heisenberg operator of each Brownian realization at time t.

    Each realization conjugates the initial Pauli by step unitaries
    exp(-i J sum G dB) with independent Gaussian increments of variance dt,
    J = (8N)^(-1/2).
    """
    if N > MAX_STATE_SPINS:
        raise ExactSizeError(f"state-vector work capped at N = {MAX_STATE_SPINS}")
    if dt > 0.05:
        raise ValueError("Trotter guard: dt must be <= 0.05")
    if realizations < 2:
        raise ValueError("need >= 2 realizations to estimate error bars")
    J = 1.0 / math.sqrt(8.0 * N)
    basis = _pair_basis(N)
    O0 = _site_operator(initial_code, initial_site, N)
    # negative t runs the backward evolution (statistically equivalent by
    # time-reversal symmetry of the ensemble)
    nsteps = max(1, int(round(abs(t) / dt))) if t != 0 else 0
    h = abs(t) / nsteps if nsteps else 0.0
    streams = np.random.SeedSequence(seed).spawn(realizations)
    for ss in streams:
        rng = np.random.default_rng(ss)
        O = O0.astype(complex)
        for _ in range(nsteps):
            dB = rng.normal(0.0, math.sqrt(h), size=basis.shape[0])
            U = expm(-1j * J * np.tensordot(dB, basis, axes=1))
            O = U.conj().T @ O @ U
        yield O


def trotter_brownian(N: int, t: float, dt: float, realizations: int, seed: int,
                     initial_site: int = 0, initial_code: int = 2) -> SizeDistribution:
    """Disorder-averaged size distribution from explicit Brownian unitaries.

    Squared string weights are averaged over realizations; the reported
    stderr is the standard error of that average per bin.
    """
    sizes = string_sizes(N)
    per_real = []
    for O in _trotter_operators(N, t, dt, realizations, seed, initial_site, initial_code):
        w = np.abs(pauli_decompose(O, N)) ** 2
        total = w.sum()
        if abs(total - 1.0) > 1e-9:
            raise RuntimeError(f"unitarity violated: weights sum to {total!r}")
        hist = np.bincount(sizes, weights=w, minlength=N + 1)
        per_real.append(hist[1:] / hist[1:].sum())
    per_real = np.array(per_real)
    p = per_real.mean(axis=0)
    stderr = per_real.std(axis=0, ddof=1) / math.sqrt(realizations)
    return SizeDistribution(N=N, p=p / p.sum(), time=t, stderr=stderr)


def _F_of_matrix(N: int, O: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """F(phi) = tr(R O R^dag O) / 2^N for a diagonal z rotation R."""
    bits = np.arange(2**N)
    pop = np.zeros(2**N, dtype=np.int64)
    for j in range(N):
        pop += (bits >> j) & 1
    half_sz = (N - 2 * pop) / 2.0
    out = np.empty(phi.size)
    OO = O * O.T  # element-wise O_ab O_ba
    for k, ph in enumerate(phi):
        z = np.exp(1j * ph * half_sz)
        out[k] = float(np.einsum("a,ab,b->", z, OO, z.conj()).real)
    return out / 2**N


def trotter_mqc_F(N: int, t: float, dt: float, realizations: int, seed: int,
                  phi: np.ndarray, initial_site: int = 0, initial_code: int = 2):
    """Disorder-averaged F(phi) over Brownian realizations, with stderr."""
    phi = np.asarray(phi, dtype=float)
    per_real = np.array([
        _F_of_matrix(N, O, phi)
        for O in _trotter_operators(N, t, dt, realizations, seed, initial_site, initial_code)
    ])
    mean = per_real.mean(axis=0)
    stderr = per_real.std(axis=0, ddof=1) / math.sqrt(realizations)
    return mean, stderr


# ---------------------------------------------------------------------------
# doubled EPR system

# per-site change of basis: rows are (singlet, Tx, Ty, Tz) in the
# computational (sigma tau) order (uu, ud, du, dd)
_SQ2 = 1.0 / math.sqrt(2.0)
_ST_BASIS = np.array(
    [
        [0, _SQ2, -_SQ2, 0],
        [-_SQ2, 0, 0, _SQ2],
        [1j * _SQ2, 0, 0, 1j * _SQ2],
        [0, _SQ2, _SQ2, 0],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class DoubledState:
    """State of the doubled system; index packs per-site pair codes base 4."""

    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.N <= 10:
            raise ExactSizeError("doubled states capped at N = 10")
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (4**self.N,):
            raise ValueError("amplitude vector must have length 4^N")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state norm {norm!r} is not 1")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)


def epr_amplitudes(N: int) -> np.ndarray:
    """Product of per-site singlets, unnormalized check state."""
    site = np.array([0, _SQ2, -_SQ2, 0], dtype=complex)
    amp = site
    for _ in range(N - 1):
        amp = np.kron(amp, site)
    return amp  # index: site 0 most significant after kron; reversed below


def operator_state(op: np.ndarray, N: int) -> DoubledState:
    """|O> = (O x 1) |EPR> with per-site pair index q = 2*sigma_bit + tau_bit."""
    dim = 2**N
    if op.shape != (dim, dim):
        raise ValueError("operator shape does not match N")
    e = np.array([[0.0, _SQ2], [-_SQ2, 0.0]])  # e[sigma_bit, tau_bit] of a singlet
    T = op.reshape((2,) * (2 * N))
    # contract each column axis (axis N..2N-1) with the singlet matrix,
    # turning it into the corresponding tau axis
    for j in range(N):
        T = np.moveaxis(np.tensordot(T, e, axes=([N], [0])), -1, 2 * N - 1)
    # axes now (a_{N-1}..a_0, t_{N-1}..t_0); interleave into pair codes
    perm = []
    for j in range(N):
        perm.extend([j, N + j])
    amp = T.transpose(perm).reshape(-1)
    return DoubledState(N=N, amplitudes=amp)


def _triplet_probabilities(state: DoubledState) -> np.ndarray:
    """Probability vector over per-site (singlet=0, Tx, Ty, Tz) codes."""
    N = state.N
    T = state.amplitudes.reshape((4,) * N)
    for axis in range(N):
        T = np.moveaxis(
            np.tensordot(_ST_BASIS.conj(), np.moveaxis(T, axis, 0), axes=([1], [0])),
            0, axis,
        )
    return (np.abs(T) ** 2).reshape(-1)


def size_from_doubled_state(state: DoubledState, operator: PauliCoefficients) -> SizeDistribution:
    """Bin the state by the number of per-site triplet excitations.

    The result must coincide with the Pauli-weight histogram of the same
    operator; the two are independent routes to the same distribution.
    """
    if state.N != operator.N:
        raise ValueError("state and operator sizes differ")
    ref = operator_state(operator.to_matrix(), state.N)
    overlap = abs(np.vdot(ref.amplitudes, state.amplitudes))
    if abs(overlap - 1.0) > 1e-8:
        raise ValueError("state does not match the operator acting on EPR")
    probs = _triplet_probabilities(state)
    # triplet count per index: reuse string_sizes (code 0 = singlet)
    hist = np.bincount(string_sizes(state.N), weights=probs, minlength=state.N + 1)
    if hist[0] > 1e-12:
        raise ValueError("state has singlet-only weight; operator not traceless")
    return SizeDistribution(N=state.N, p=hist[1:] / hist[1:].sum())


def generating_from_doubled_state(state: DoubledState, nu: float) -> float:
    """Apply the per-site spin-pair exponential and take the overlap.

    Equals the generating function of the measured size distribution.
    """
    N = state.N
    # exp(-(nu/4N) sigma.tau) is diagonal in the singlet/triplet basis
    diag = np.array(
        [math.exp(3.0 * nu / (4.0 * N))] + [math.exp(-nu / (4.0 * N))] * 3
    )
    W = _ST_BASIS.conj().T @ np.diag(diag).astype(complex) @ _ST_BASIS
    T = state.amplitudes.reshape((4,) * N)
    for axis in range(N):
        T = np.moveaxis(np.tensordot(W, np.moveaxis(T, axis, 0), axes=([1], [0])), 0, axis)
    val = np.vdot(state.amplitudes, T.reshape(-1)) * math.exp(-3.0 * nu / 4.0)
    return float(val.real)


def mqc_F_exact(N: int, operator: PauliCoefficients, phi: float) -> float:
    """Rotated autocorrelator F(phi) = <R O R^dag O> by direct trace."""
    if N > MAX_STATE_SPINS:
        raise ExactSizeError(f"state-vector work capped at N = {MAX_STATE_SPINS}")
    O = operator.to_matrix()
    bits = np.arange(2**N)
    pop = np.zeros(2**N, dtype=np.int64)
    for j in range(N):
        pop += (bits >> j) & 1
    # e^{i phi sum_j s_z^j}: diagonal phase (N - 2 popcount) * phi / 2
    phases = np.exp(1j * phi * (N - 2 * pop) / 2.0)
    rotated = (phases[:, None] * O) * phases.conj()[None, :]
    return float((np.trace(rotated @ O) / 2**N).real)
