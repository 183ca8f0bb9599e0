"""Symmetric-subspace (Dicke ladder) solution for swap-invariant baths.

For a bath prepared in a permutation-invariant state (``|G_0>`` or
``|G_1>``) and no bath self-interaction, ``sum_i sx_i`` only couples the
Dicke state with ``n`` ones to its neighbours ``n +- 1``. The dynamics then
lives in an (N+1)-dimensional space with the tridiagonal generator

    <n - 1| H_eff |n> = sqrt(n (N - n + 1)),   n = 1..N

and fragment states follow from splitting Dicke states across a cut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .core import DensityMatrix, PureState, RegisterLayout, entropy_from_eigenvalues
from .xxmodel import sector_indices

REAL_TOL = 1e-12


@dataclass(frozen=True)
class MagnonState:
    N: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if c.shape != (self.N + 1,):
            raise ValueError(f"expected {self.N + 1} Dicke amplitudes, got shape {c.shape}")
        if abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise ValueError("Dicke amplitudes are not normalized")
        c.flags.writeable = False
        object.__setattr__(self, "c", c)

    @classmethod
    def dicke(cls, N: int, n: int) -> "MagnonState":
        c = np.zeros(N + 1, dtype=complex)
        c[n] = 1.0
        return cls(N, c)

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.c.imag) <= REAL_TOL))

    def conj(self) -> "MagnonState":
        return MagnonState(self.N, self.c.conj())


@dataclass(frozen=True)
class EffectiveHamiltonian:
    N: int
    offdiag: np.ndarray  # offdiag[n - 1] = A_n^- for n = 1..N

    def dense(self) -> np.ndarray:
        return np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def lowering(self, n: int) -> float:
        """A_n^-, the coupling between |n> and |n - 1>."""
        return float(self.offdiag[n - 1]) if 1 <= n <= self.N else 0.0

    def raising(self, n: int) -> float:
        """A_n^+ = A_{n+1}^-."""
        return self.lowering(n + 1)


def build_heff(N: int) -> EffectiveHamiltonian:
    if N < 1:
        raise ValueError("N must be at least 1")
    n = np.arange(1, N + 1, dtype=float)
    return EffectiveHamiltonian(N, np.sqrt(n * (N - n + 1)))


@lru_cache(maxsize=64)
def heff_eigensystem(N: int):
    """Eigenvalues and eigenvectors of H_eff, computed once per N."""
    off = build_heff(N).offdiag
    w, v = eigh_tridiagonal(np.zeros(N + 1), off)
    w.flags.writeable = False
    v.flags.writeable = False
    return w, v


def evolve_magnon_grid(c0: MagnonState, times) -> np.ndarray:
    """Rows ``c(t) = exp(-i H_eff t) c0`` for every t in ``times``."""
    w, v = heff_eigensystem(c0.N)
    proj = v.T @ c0.c
    phases = np.exp(-1j * np.outer(np.atleast_1d(times), w))
    return (phases * proj) @ v.T


def evolve_magnon(c0: MagnonState, t: float) -> MagnonState:
    c = evolve_magnon_grid(c0, [t])[0]
    return MagnonState(c0.N, c / np.linalg.norm(c))


def branch_pair(c0: MagnonState, t: float, d: float = 1.0) -> tuple[MagnonState, MagnonState]:
    """``(c(d t), c(-d t))``: the up and down branches of the coupled evolution.

    The down branch is taken as the conjugate of the up branch, which is
    exact because H_eff is real; ``c0`` must therefore be real.
    """
    if not c0.is_real:
        raise ValueError("conjugation shortcut needs a real initial Dicke vector")
    up = evolve_magnon(c0, d * t)
    return up, up.conj()


def loschmidt_amplitude(c_plus: MagnonState, c_minus: MagnonState) -> complex:
    """``nu = sum_n conj(c_n(-t)) c_n(t)``.

    Reduces to ``sum_n c_n(t)^2`` when the initial vector is real.
    """
    if c_plus.N != c_minus.N:
        raise ValueError("Dicke vectors of different length")
    return complex(np.vdot(c_minus.c, c_plus.c))


def coherence_grid(c0: MagnonState, times, d: float = 1.0) -> np.ndarray:
    """``nu(t)`` on a grid, via ``sum_k |<k|c0>|^2 exp(-2 i d w_k t)``."""
    w, v = heff_eigensystem(c0.N)
    weights = np.abs(v.T @ c0.c) ** 2
    return np.exp(-2j * d * np.outer(np.atleast_1d(times), w)) @ weights


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def log_binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return -math.inf
    return float(_log_binom(n, k))


def split_range(N: int, n: int, k: int) -> tuple[int, int]:
    """``(i_min, i_max)`` for the number of ones landing in the first k spins."""
    return max(0, k + n - N), min(k, n)


def dicke_split_coeff(N: int, n: int, i: int, k: int) -> float:
    """Amplitude of ``|i>_k |n - i>_{N-k}`` in the Dicke state ``|n>_N``.

    ``sqrt(C(N-k, n-i) C(k, i) / C(N, n))``, evaluated in log space.
    """
    lo, hi = split_range(N, n, k)
    if not lo <= i <= hi:
        raise ValueError(f"i={i} outside [{lo}, {hi}] for N={N}, n={n}, k={k}")
    return math.exp(0.5 * (log_binom(N - k, n - i) + log_binom(k, i) - log_binom(N, n)))


@lru_cache(maxsize=256)
def _split_table(N: int, k: int) -> np.ndarray:
    """``F[i, j] = f_{N, i+j, i, k}`` for i in 0..k, j in 0..N-k."""
    i = np.arange(k + 1)[:, None]
    j = np.arange(N - k + 1)[None, :]
    F = np.exp(0.5 * (_log_binom(N - k, j) + _log_binom(k, i) - _log_binom(N, i + j)))
    F.flags.writeable = False
    return F


def fragment_state_closed_form(
    c_plus: MagnonState, c_minus: MagnonState, keep_k: int, with_system: bool = True
) -> DensityMatrix:
    """Reduced state of the first ``keep_k`` bath spins (and the system).

    The result is written in the fragment's Dicke basis; with the system the
    row index is ``2 * i + s`` (s = 0 for up). Permutation-symmetric global
    states leave no weight outside this basis, so the spectrum is complete.
    """
    N = c_plus.N
    if c_minus.N != N:
        raise ValueError("Dicke vectors of different length")
    if not 0 <= keep_k <= N:
        raise ValueError(f"fragment size {keep_k} outside 0..{N}")
    F = _split_table(N, keep_k)
    k = keep_k
    # V[i, s, j] = c^s_{i+j} f_{N,i+j,i,k} / sqrt(2); tracing the rest sums over j
    ij = np.add.outer(np.arange(k + 1), np.arange(N - k + 1))
    V = np.stack([c_plus.c[ij] * F, c_minus.c[ij] * F], axis=1) / np.sqrt(2)
    if with_system:
        M = V.reshape(2 * (k + 1), N - k + 1)
        rho = M @ M.conj().T
        labels = ("system", f"dicke[{k}]")
    else:
        rho = np.einsum("isj,ksj->ik", V, V.conj())
        labels = (f"dicke[{k}]",)
    return DensityMatrix(labels, 0.5 * (rho + rho.conj().T), basis="dicke")


def system_state_closed_form(c_plus: MagnonState, c_minus: MagnonState) -> np.ndarray:
    nu = loschmidt_amplitude(c_plus, c_minus)
    return 0.5 * np.array([[1.0, nu], [np.conj(nu), 1.0]])


def mi_profile_closed_form(c_plus: MagnonState, c_minus: MagnonState) -> tuple[np.ndarray, float]:
    """Mutual information I(S:F_k) for k = 0..N and the system entropy."""
    N = c_plus.N
    h_s = entropy_from_eigenvalues(np.linalg.eigvalsh(system_state_closed_form(c_plus, c_minus)))
    out = np.zeros(N + 1)
    for k in range(1, N + 1):
        h_f = entropy_from_eigenvalues(np.linalg.eigvalsh(fragment_state_closed_form(c_plus, c_minus, k, False).matrix))
        h_sf = entropy_from_eigenvalues(np.linalg.eigvalsh(fragment_state_closed_form(c_plus, c_minus, k, True).matrix))
        out[k] = h_s + h_f - h_sf
    return out, h_s


def dicke_vector(N: int, n: int) -> np.ndarray:
    """Normalized Dicke state with n ones on N qubits, as a 2^N vector."""
    amps = np.zeros(1 << N, dtype=complex)
    idx = sector_indices(N, n)
    amps[idx] = 1.0 / math.sqrt(idx.size)
    return amps


def lift(state: MagnonState) -> PureState:
    """Embed Dicke amplitudes into the full bath register."""
    N = state.N
    amps = np.zeros(1 << N, dtype=complex)
    for n in range(N + 1):
        if state.c[n] != 0:
            amps += state.c[n] * dicke_vector(N, n)
    return PureState(RegisterLayout(N, has_system=False), amps)
