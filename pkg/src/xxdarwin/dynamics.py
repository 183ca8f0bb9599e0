"""Branch dynamics of the central qubit coupled to the bath.

With the system starting in ``|+>`` and ``H = d sz_S (x) sum sx_i + lam H_B``
the global state stays ``(|up>|G_up(t)> + |down>|G_down(t)>) / sqrt(2)``
where each branch evolves under ``+-d sum sx + lam H_B`` on the bath alone.
The up branch (sz_S = +1) carries ``+d``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .core import PureState, RegisterLayout
from .hamiltonian import SpinHamiltonian
from .krylov import expm_krylov
from .xxmodel import build_interaction, build_xx_bath, total_sx

KRYLOV_DIM = 30
KRYLOV_TOL = 1e-12


@dataclass(frozen=True)
class EvolutionSpec:
    N: int
    d: float = 1.0
    lam: float = 0.0
    h: float = 1.0
    time_grid: tuple = (0.0,)

    def __post_init__(self):
        grid = tuple(float(t) for t in self.time_grid)
        if not grid or grid[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("time grid must be strictly increasing")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.N < 1:
            raise ValueError("N must be positive")
        object.__setattr__(self, "time_grid", grid)

    @property
    def fast_path(self) -> bool:
        return self.lam == 0.0


@dataclass(frozen=True)
class BranchPair:
    up: PureState
    down: PureState
    time: float

    def __post_init__(self):
        if self.up.layout != self.down.layout:
            raise ValueError("branches live on different registers")
        if self.up.layout.has_system:
            raise ValueError("branch states are bath-only")


def rotate_all_x(amps: np.ndarray, N: int, theta: float) -> np.ndarray:
    """Apply ``prod_i exp(-i theta sx_i)`` to a bath vector.

    Each site gets ``cos(theta) 1 - i sin(theta) sx``; a flip of one bit is
    a reversal of the matching tensor axis.
    """
    c, s = np.cos(theta), np.sin(theta)
    psi = np.asarray(amps, dtype=complex).reshape((2,) * N)
    for ax in range(N):
        psi = c * psi - 1j * s * np.flip(psi, axis=ax)
    return psi.reshape(-1)


def branch_hamiltonians(spec: EvolutionSpec) -> tuple[SpinHamiltonian, SpinHamiltonian]:
    """``(+d Sx + lam H_B, -d Sx + lam H_B)`` on the bath register."""
    sx = total_sx(spec.N)
    terms = build_xx_bath(spec.N, spec.h).scaled(spec.lam).terms if spec.lam else ()
    layout = RegisterLayout(spec.N, has_system=False)
    return (
        SpinHamiltonian(layout, sx.scaled(spec.d).terms + terms),
        SpinHamiltonian(layout, sx.scaled(-spec.d).terms + terms),
    )


@lru_cache(maxsize=32)
def _branch_generators(N: int, d: float, lam: float, h: float):
    h_up, h_down = branch_hamiltonians(EvolutionSpec(N, d, lam, h))
    return h_up.sparse, h_down.sparse


def _check_initial(G: PureState, N: int):
    if G.layout.has_system or G.layout.n_bath != N:
        raise ValueError(f"initial bath state must be a bath-only register of {N} spins")
    if abs(np.linalg.norm(G.amplitudes) - 1) > 1e-12:
        raise ValueError("initial bath state is not normalized")


def _propagate(mat, v: np.ndarray, t: float) -> np.ndarray:
    nrm = abs(mat).sum(axis=0).max()
    out, _ = expm_krylov(mat.dot, v, t, m=KRYLOV_DIM, tol=KRYLOV_TOL, norm_hint=nrm)
    return out


def evolve_branches(G: PureState, spec: EvolutionSpec, t: float, method: str = "auto") -> BranchPair:
    """Both bath branches at time ``t`` starting from ``G``.

    ``method`` is ``"auto"`` (product rotations when lambda is 0, Krylov
    otherwise), ``"rotation"`` or ``"krylov"``.
    """
    _check_initial(G, spec.N)
    layout = G.layout
    if method == "auto":
        method = "rotation" if spec.fast_path else "krylov"
    if method == "rotation":
        if not spec.fast_path:
            raise ValueError("product rotations are exact only for lambda = 0")
        up = rotate_all_x(G.amplitudes, spec.N, spec.d * t)
        down = rotate_all_x(G.amplitudes, spec.N, -spec.d * t)
    elif method == "krylov":
        h_up, h_down = _branch_generators(spec.N, spec.d, spec.lam, spec.h)
        up = _propagate(h_up, G.amplitudes, t)
        down = _propagate(h_down, G.amplitudes, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BranchPair(PureState.normalized(layout, up), PureState.normalized(layout, down), float(t))


def branch_trajectory(G: PureState, spec: EvolutionSpec, method: str = "auto") -> Iterator[BranchPair]:
    """Branch pairs on ``spec.time_grid``, stepping from one grid point to the next."""
    _check_initial(G, spec.N)
    if method == "auto":
        method = "rotation" if spec.fast_path else "krylov"
    if method == "rotation":
        for t in spec.time_grid:
            yield evolve_branches(G, spec, t, method="rotation")
        return
    h_up, h_down = _branch_generators(spec.N, spec.d, spec.lam, spec.h)
    up = np.array(G.amplitudes)
    down = np.array(G.amplitudes)
    t_prev = 0.0
    for t in spec.time_grid:
        if t > t_prev:
            up = _propagate(h_up, up, t - t_prev)
            down = _propagate(h_down, down, t - t_prev)
            up /= np.linalg.norm(up)
            down /= np.linalg.norm(down)
        t_prev = t
        yield BranchPair(PureState(G.layout, up), PureState(G.layout, down), t)


def coherence(pair: BranchPair) -> complex:
    """Off-diagonal factor ``nu = <G_down|G_up>`` of the system state."""
    return pair.down.overlap(pair.up)


def global_state(pair: BranchPair) -> PureState:
    """``(|up> (x) G_up + |down> (x) G_down) / sqrt(2)`` with the system as qubit 0."""
    N = pair.up.layout.n_bath
    amps = np.empty((1 << N, 2), dtype=complex)
    amps[:, 0] = pair.up.amplitudes
    amps[:, 1] = pair.down.amplitudes
    return PureState(RegisterLayout(N, has_system=True), amps.reshape(-1) / np.sqrt(2))


def system_state(pair: BranchPair) -> np.ndarray:
    """``rho_S = 1/2 [[1, nu], [nu*, 1]]`` assembled from the branch overlap."""
    nu = coherence(pair)
    return 0.5 * np.array([[1.0, nu], [np.conj(nu), 1.0]])


def product_initial(G: PureState) -> PureState:
    """``|+> (x) G`` on the register with a system qubit."""
    return global_state(BranchPair(G, G, 0.0))


def full_hamiltonian(spec: EvolutionSpec) -> SpinHamiltonian:
    """``H_SE + lam H_B`` on the system+bath register (H_S is dropped)."""
    layout = RegisterLayout(spec.N, has_system=True)
    h = build_interaction(spec.N, spec.d, layout)
    if spec.lam:
        h = h + build_xx_bath(spec.N, spec.h, layout).scaled(spec.lam)
    return h


def spin_flip(G: PureState) -> PureState:
    """``U_X = prod_i sx_i`` on a bath-only state."""
    # flipping every bit maps index b to 2^N - 1 - b
    return PureState(G.layout, G.amplitudes[::-1].copy())


def coherence_grid(pairs: Sequence[BranchPair]) -> np.ndarray:
    return np.array([coherence(p) for p in pairs])
