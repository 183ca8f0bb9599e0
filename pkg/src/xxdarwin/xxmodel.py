"""XX ring in a transverse field: Hamiltonians and magnetization-sector ground states."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from .core import PureState, RegisterLayout
from .hamiltonian import SpinHamiltonian

DEGENERACY_TOL = 1e-10
TIE_TOL = 1e-10
# larger sector blocks go to sparse Lanczos for their lowest two levels
DENSE_SECTOR_MAX = 400


class DegenerateSectorWarning(UserWarning):
    pass


def _check_ring(N: int):
    if N < 3:
        raise ValueError(f"the XX ring needs N >= 3 spins, got {N}")


def build_xx_bath(N: int, h: float, layout: RegisterLayout | None = None) -> SpinHamiltonian:
    """Bath Hamiltonian ``-sum (s+_i s-_{i+1} + h.c.) - h sum sz_i`` on a ring.

    The hopping term is written as ``-(XX + YY)/2`` per bond. By default the
    operator acts on a bath-only register; pass a layout with a system
    qubit to embed it there.
    """
    _check_ring(N)
    layout = layout or RegisterLayout(N, has_system=False)
    if layout.n_bath != N:
        raise ValueError("layout bath size does not match N")
    q = layout.bath_qubit
    terms = []
    for i in range(N):
        a, b = q(i), q((i + 1) % N)
        terms.append((-0.5, {a: "x", b: "x"}))
        terms.append((-0.5, {a: "y", b: "y"}))
    if h != 0:
        terms.extend((-float(h), {q(i): "z"}) for i in range(N))
    return SpinHamiltonian(layout, tuple(terms))


def build_interaction(N: int, d: float, layout: RegisterLayout | None = None) -> SpinHamiltonian:
    """System-bath coupling ``d sz_S (x) sum_i sx_i``."""
    layout = layout or RegisterLayout(N, has_system=True)
    if not layout.has_system:
        raise ValueError("the interaction needs a register with a system qubit")
    if layout.n_bath != N:
        raise ValueError("layout bath size does not match N")
    s = layout.system
    return SpinHamiltonian(layout, tuple((float(d), {s: "z", layout.bath_qubit(i): "x"}) for i in range(N)))


def total_sx(N: int, layout: RegisterLayout | None = None) -> SpinHamiltonian:
    layout = layout or RegisterLayout(N, has_system=False)
    return SpinHamiltonian(layout, tuple((1.0, {layout.bath_qubit(i): "x"}) for i in range(N)))


@lru_cache(maxsize=None)
def sector_indices(N: int, n: int) -> np.ndarray:
    """Basis indices of N bits with exactly n ones, ascending."""
    idx = np.arange(1 << N, dtype=np.int64)
    pop = np.zeros_like(idx)
    for b in range(N):
        pop += (idx >> b) & 1
    out = idx[pop == n]
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SectorGroundState:
    N: int
    n: int
    h: float
    energy: float
    vector: PureState
    degenerate: bool
    gap: float


@lru_cache(maxsize=None)
def _sector_spectrum(N: int, n: int):
    """Lowest two levels and ground vector of the hopping part in sector n.

    The field term is constant (``-(N - 2n) h``) inside a sector, so the
    eigenvectors do not depend on h and are cached per (N, n).
    """
    idx = sector_indices(N, n)
    hop = build_xx_bath(N, 0.0).sparse
    block = hop[idx][:, idx].real
    if idx.size > DENSE_SECTOR_MAX:
        v0 = np.ones(idx.size) + np.arange(idx.size) / idx.size
        w, v = eigsh(block.tocsr(), k=2, which="SA", v0=v0, tol=0.0)
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    else:
        top = min(1, idx.size - 1)
        w, v = eigh(block.toarray(), subset_by_index=[0, top], driver="evr")
    gap = float(w[1] - w[0]) if w.size > 1 else float("inf")
    vec = v[:, 0]
    # fix the overall sign so the largest-magnitude amplitude is positive
    k = int(np.argmax(np.abs(vec)))
    vec = vec * np.sign(vec[k])
    vec.flags.writeable = False
    return float(w[0]), vec, gap


def sector_energy_at_zero(N: int, n: int) -> float:
    _check_ring(N)
    return _sector_spectrum(N, n)[0]


def sector_ground(N: int, h: float, n: int) -> SectorGroundState:
    """Ground state of the bath Hamiltonian restricted to n excitations (1-bits)."""
    _check_ring(N)
    if not 0 <= n <= N:
        raise ValueError(f"sector n={n} outside 0..{N}")
    e0, vec, gap = _sector_spectrum(N, n)
    degenerate = gap < DEGENERACY_TOL
    if degenerate:
        warnings.warn(
            f"sector ground level of N={N}, n={n} is degenerate (gap {gap:.2e}); "
            "using the first eigenvector returned by the solver",
            DegenerateSectorWarning,
            stacklevel=2,
        )
    amps = np.zeros(1 << N, dtype=complex)
    amps[sector_indices(N, n)] = vec
    state = PureState(RegisterLayout(N, has_system=False), amps)
    energy = e0 - (N - 2 * n) * h
    return SectorGroundState(N, n, float(h), float(energy), state, degenerate, gap)


def sector_energies(N: int, h: float) -> np.ndarray:
    """E_n(h) for n = 0..N."""
    _check_ring(N)
    return np.array([_sector_spectrum(N, n)[0] - (N - 2 * n) * h for n in range(N + 1)])


def ground_sector(N: int, h: float) -> int:
    e = sector_energies(N, h)
    # ties go to the smaller excitation number
    return int(np.flatnonzero(e <= e.min() + TIE_TOL)[0])


def global_ground(N: int, h: float) -> SectorGroundState:
    return sector_ground(N, h, ground_sector(N, h))


def sector_boundaries(N: int) -> list[tuple[float, int, int]]:
    """Level crossings of the global ground state for h > 0, in decreasing h.

    Each entry is ``(h_threshold, n_below, n_above)``: the ground sector is
    ``n_above`` at the threshold and just above it, ``n_below`` just below.
    The sector energies are the lines ``E_n(0) - (N - 2n) h``, so every
    crossing is an exact line intersection.
    """
    _check_ring(N)
    a = np.array([sector_energy_at_zero(N, n) for n in range(N + 1)])
    b = np.array([N - 2 * n for n in range(N + 1)], dtype=float)
    # above h = N every excitation costs energy
    h_cur = float(N) + 1.0
    cur = ground_sector(N, h_cur)
    out = []
    while True:
        best_h, best_m = -np.inf, None
        for m in range(N + 1):
            if b[m] >= b[cur]:
                continue
            hx = (a[m] - a[cur]) / (b[m] - b[cur])
            if hx >= h_cur - 1e-12:
                continue
            # several lines can meet at one point; the smallest slope wins below it
            if hx > best_h + 1e-12 or (abs(hx - best_h) <= 1e-12 and b[m] < b[best_m]):
                best_h, best_m = hx, m
        if best_m is None or best_h <= 0:
            break
        out.append((float(best_h), best_m, cur))
        h_cur, cur = best_h, best_m
    return out


def sector_field_ranges(N: int) -> list[tuple[int, float, float]]:
    """``(n, h_low, h_high)`` for every ground sector met for h >= 0.

    ``h_high`` is ``inf`` for the fully polarized sector.
    """
    bounds = sector_boundaries(N)
    ranges = []
    hi = np.inf
    for h_t, n_below, n_above in bounds:
        ranges.append((n_above, h_t, hi))
        hi = h_t
    last = bounds[-1][1] if bounds else ground_sector(N, 0.0)
    ranges.append((last, 0.0, hi))
    return ranges


def representative_fields(N: int, h_top: float = 1.5) -> list[tuple[float, int]]:
    """One field value inside each ground sector, from high to low field."""
    out = []
    for n, lo, hi in sector_field_ranges(N):
        h = h_top if np.isinf(hi) else 0.5 * (lo + hi)
        if lo == 0.0 and not np.isinf(hi):
            h = 0.0
        out.append((float(h), n))
    return out


def sector_dimension(N: int, n: int) -> int:
    return comb(N, n)
