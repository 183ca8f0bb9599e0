"""Trace-distance trajectories and the BLP non-Markovianity measure.

For pure dephasing of a qubit the pair of states maximizing the information
backflow is fixed (antipodal points on the equator), and their trace
distance is ``|nu(t)|``. The measure is therefore the total positive
variation of ``|nu|`` over the integration window.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import magnon
from .dynamics import EvolutionSpec, branch_trajectory, coherence
from .xxmodel import ground_sector, sector_ground

DEFAULT_POINTS = 4096
CONVERGENCE_TOL = 1e-4
MAX_POINTS = 1 << 20
WINDOW = (0.0, np.pi / 4)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class DistanceTrajectory:
    times: np.ndarray
    D: np.ndarray
    provenance: str


@dataclass(frozen=True)
class BLPResult:
    value: float
    intervals: int
    convergence: float


def walsh_weights(amps: np.ndarray, N: int) -> np.ndarray:
    """Weight of the bath state on each eigenvalue ``N - 2m`` of ``sum sx``.

    The state is rotated to the sigma^x basis by a Hadamard on every site;
    index bits then count the spins anti-aligned with x.
    """
    psi = np.asarray(amps, dtype=complex).reshape((2,) * N)
    for ax in range(N):
        a = np.take(psi, 0, axis=ax)
        b = np.take(psi, 1, axis=ax)
        psi = np.stack([a + b, a - b], axis=ax) / np.sqrt(2)
    prob = np.abs(psi.reshape(-1)) ** 2
    pop = np.zeros(prob.size, dtype=np.int64)
    idx = np.arange(prob.size)
    for bit in range(N):
        pop += (idx >> bit) & 1
    return np.bincount(pop, weights=prob, minlength=N + 1)


def coherence_full_space(G, times, d: float = 1.0) -> np.ndarray:
    """``nu(t) = <G| exp(-2 i d t sum sx) |G>`` from the full bath vector."""
    N = G.layout.n_bath
    w = walsh_weights(G.amplitudes, N)
    eig = N - 2 * np.arange(N + 1)
    return np.exp(-2j * d * np.outer(np.atleast_1d(times), eig)) @ w


def uniform_grid(window=WINDOW, intervals: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(window[0], window[1], intervals + 1)


def distance_trajectory(spec: EvolutionSpec, sector: int, grid=None, path: str = "auto") -> DistanceTrajectory:
    """``D(t) = |nu(t)|`` for a bath starting in the ground state of ``sector``.

    ``path``: ``"magnon"`` (lambda = 0, sectors 0 and 1), ``"full"``
    (lambda = 0, any sector, exact spectral formula on the 2^N vector),
    ``"branches"`` (explicit branch propagation; required for lambda > 0).
    ``"auto"`` picks the cheapest valid one.
    """
    times = np.asarray(spec.time_grid if grid is None else grid, dtype=float)
    if path == "auto":
        if spec.lam == 0.0:
            path = "magnon" if sector in (0, 1) else "full"
        else:
            path = "branches"
    if path == "magnon":
        if spec.lam != 0.0 or sector not in (0, 1):
            raise ValueError("the Dicke-ladder path needs lambda = 0 and sector 0 or 1")
        nu = magnon.coherence_grid(magnon.MagnonState.dicke(spec.N, sector), times, spec.d)
    elif path == "full":
        if spec.lam != 0.0:
            raise ValueError("the spectral full-space path needs lambda = 0")
        nu = coherence_full_space(sector_ground(spec.N, spec.h, sector).vector, times, spec.d)
    elif path == "branches":
        G = sector_ground(spec.N, spec.h, sector).vector
        run = EvolutionSpec(spec.N, spec.d, spec.lam, spec.h, tuple(times))
        nu = np.array([coherence(p) for p in branch_trajectory(G, run)])
    else:
        raise ValueError(f"unknown path {path!r}")
    return DistanceTrajectory(times, np.clip(np.abs(nu), 0.0, 1.0), path)


def positive_variation(D: np.ndarray) -> float:
    return float(np.sum(np.clip(np.diff(D), 0.0, None)))


def blp_measure(traj: DistanceTrajectory, tol: float = CONVERGENCE_TOL) -> BLPResult:
    """Sum of the increases of D along the grid.

    The convergence estimate compares against every other grid point;
    above ``tol`` a :class:`ConvergenceError` is raised.
    """
    D = np.asarray(traj.D)
    value = positive_variation(D)
    coarse = D[::2] if D.size % 2 == 1 else np.append(D[:-1:2], D[-1])
    conv = abs(value - positive_variation(coarse))
    if conv > tol:
        raise ConvergenceError(
            f"BLP sum changed by {conv:.2e} on grid halving; try at least {2 * (D.size - 1)} intervals"
        )
    return BLPResult(value, D.size - 1, conv)


def blp_converged(spec: EvolutionSpec, sector: int, window=WINDOW, intervals: int = DEFAULT_POINTS, path: str = "auto") -> BLPResult:
    """BLP measure on a uniform grid over ``window``, doubled until converged."""
    while True:
        traj = distance_trajectory(spec, sector, uniform_grid(window, intervals), path)
        try:
            return blp_measure(traj)
        except ConvergenceError:
            if 2 * intervals > MAX_POINTS:
                raise
            intervals *= 2


def blp_vs_field(N: int, fields, window=WINDOW, d: float = 1.0) -> list[tuple[float, int, float]]:
    """``(h, ground sector, N_blp)`` for each field; one evaluation per sector."""
    cache: dict[int, float] = {}
    out = []
    for h in fields:
        n = ground_sector(N, float(h))
        if n not in cache:
            cache[n] = blp_converged(EvolutionSpec(N, d, 0.0, float(h)), n, window).value
        out.append((float(h), n, cache[n]))
    return out


def blp_at_critical(Ns, window=WINDOW, path: str = "magnon") -> list[tuple[int, float]]:
    """BLP measure just below the critical field, where the bath is ``|G_1>``."""
    return [(int(N), blp_converged(EvolutionSpec(int(N), 1.0, 0.0, 1.0), 1, window, path=path).value) for N in Ns]
