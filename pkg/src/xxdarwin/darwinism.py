"""Mutual information between the system and bath fragments, plateau diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from . import magnon
from .core import PureState, subsystem_entropy
from .dynamics import EvolutionSpec, branch_trajectory, global_state
from .xxmodel import sector_ground

PLATEAU_BAND = 0.1
MIN_SYSTEM_ENTROPY = 1e-6
MAX_AVERAGE_N = 12


@dataclass(frozen=True)
class MIProfile:
    """I(S:F) in bits for fragment sizes 0..N at one time."""

    N: int
    time: float
    entries: np.ndarray
    H_S: float
    fragment_strategy: str = "contiguous"
    spread: np.ndarray | None = field(default=None, compare=False)

    @property
    def ratio(self) -> np.ndarray:
        """I / H_S; NaN when the system entropy vanishes."""
        if self.H_S <= MIN_SYSTEM_ENTROPY:
            return np.full(self.entries.shape, np.nan)
        return self.entries / self.H_S


@dataclass(frozen=True)
class PlateauReport:
    delta: float
    plateau_width: int
    defined: bool = True


def _fragment_labels(state: PureState, fragment: Iterable[int]) -> tuple[int, ...]:
    frag = state.layout.check_labels(fragment)
    if state.layout.system in frag:
        raise ValueError("fragment must not contain the system qubit")
    return frag


def mutual_information(state: PureState, fragment: Iterable[int]) -> float:
    """``H_S + H_F - H_SF`` in bits for a set of bath qubit labels."""
    frag = _fragment_labels(state, fragment)
    if not frag:
        return 0.0
    s = state.layout.system
    return (
        subsystem_entropy(state, (s,))
        + subsystem_entropy(state, frag)
        - subsystem_entropy(state, (s,) + frag)
    )


def mi_profile(state: PureState, strategy: str = "contiguous", time: float = 0.0) -> MIProfile:
    """I(S:F) for every fragment size.

    ``"contiguous"`` uses the first k bath spins. On the ring any block of k
    neighbours gives the same value for a translation-invariant state, and
    for permutation-invariant states every k-subset does. ``"average"``
    averages over all k-subsets (N <= 12) and stores the max-min spread.
    """
    layout = state.layout
    N = layout.n_bath
    bath = layout.bath_qubits
    s = layout.system
    h_s = subsystem_entropy(state, (s,))
    out = np.zeros(N + 1)
    if strategy == "contiguous":
        for k in range(1, N + 1):
            out[k] = mutual_information(state, bath[:k])
        return MIProfile(N, float(time), out, h_s, strategy)
    if strategy == "average":
        if N > MAX_AVERAGE_N:
            raise ValueError(f"subset averaging is limited to N <= {MAX_AVERAGE_N}")
        spread = np.zeros(N + 1)
        for k in range(1, N + 1):
            vals = [mutual_information(state, f) for f in combinations(bath, k)]
            out[k] = float(np.mean(vals))
            spread[k] = max(vals) - min(vals)
        return MIProfile(N, float(time), out, h_s, strategy, spread)
    raise ValueError(f"unknown fragment strategy {strategy!r}")


def mi_profile_magnon(c_plus: magnon.MagnonState, c_minus: magnon.MagnonState, time: float = 0.0) -> MIProfile:
    entries, h_s = magnon.mi_profile_closed_form(c_plus, c_minus)
    return MIProfile(c_plus.N, float(time), entries, h_s, "dicke")


def plateau_report(profile: MIProfile) -> PlateauReport:
    """Flatness of I(S:F)/H_S over the proper fragments 1..N-1.

    ``delta`` is the largest deviation of the ratio from 1. The width counts
    the fragment sizes in the widest interval centred on N/2 whose ratio stays
    within ``PLATEAU_BAND`` of 1.
    """
    N = profile.N
    if profile.H_S <= MIN_SYSTEM_ENTROPY:
        return PlateauReport(float("nan"), 0, defined=False)
    if N < 2:
        return PlateauReport(0.0, 0)
    dev = np.abs(profile.entries[1:N] / profile.H_S - 1.0)
    ok = dev <= PLATEAU_BAND
    width = 0
    # sizes a..N-a form an interval centred on N/2
    for a in range((N + 1) // 2, 0, -1):
        if ok[a - 1 : N - a].all():
            width = N - 2 * a + 1
        else:
            break
    return PlateauReport(float(dev.max()), width)


def mi_surface(spec: EvolutionSpec, sector: int, strategy: str = "contiguous") -> list[MIProfile]:
    """MI profiles on the time grid of ``spec`` for a bath starting in sector ground ``sector``."""
    G = sector_ground(spec.N, spec.h, sector).vector
    return [
        mi_profile(global_state(pair), strategy, time=pair.time)
        for pair in branch_trajectory(G, spec)
    ]
