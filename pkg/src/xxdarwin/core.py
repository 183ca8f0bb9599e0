"""Qubit register conventions, states, partial traces and entropies.

Conventions shared by every module:

* A register holds an optional system qubit followed by ``n_bath`` bath spins.
  The system qubit, when present, is qubit 0 and bath site ``i`` (0-based)
  is qubit ``i + 1``. Without a system qubit bath site ``i`` is qubit ``i``.
* Bit ``q`` of a basis index is the state of qubit ``q``: 0 is spin up
  (the +1 eigenstate of sigma^z), 1 is spin down.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-12
EIG_CLIP = 1e-12


@dataclass(frozen=True)
class RegisterLayout:
    n_bath: int
    has_system: bool = True

    def __post_init__(self):
        if self.n_bath < 1:
            raise ValueError(f"n_bath must be positive, got {self.n_bath}")

    @property
    def n_qubits(self) -> int:
        return self.n_bath + int(self.has_system)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def system(self) -> int:
        if not self.has_system:
            raise ValueError("layout has no system qubit")
        return 0

    def bath_qubit(self, site: int) -> int:
        """Register label of bath site ``site`` (0-based)."""
        if not 0 <= site < self.n_bath:
            raise ValueError(f"bath site {site} outside 0..{self.n_bath - 1}")
        return site + int(self.has_system)

    @property
    def bath_qubits(self) -> tuple[int, ...]:
        off = int(self.has_system)
        return tuple(range(off, off + self.n_bath))

    def check_labels(self, labels: Iterable[int]) -> tuple[int, ...]:
        out = tuple(sorted(set(int(q) for q in labels)))
        for q in out:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit label {q} outside register of {self.n_qubits}")
        return out


@dataclass(frozen=True)
class PureState:
    layout: RegisterLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.layout.dim,):
            raise ValueError(f"expected {self.layout.dim} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL * max(1.0, np.sqrt(amps.size)):
            raise ValueError(f"state is not normalized (norm = {norm!r})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, layout: RegisterLayout, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(layout, amps / np.linalg.norm(amps))

    @classmethod
    def basis(cls, layout: RegisterLayout, index: int = 0) -> "PureState":
        amps = np.zeros(layout.dim, dtype=complex)
        amps[index] = 1.0
        return cls(layout, amps)

    def overlap(self, other: "PureState") -> complex:
        """<self|other>."""
        if self.layout != other.layout:
            raise ValueError("states live on different registers")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "PureState") -> float:
        return abs(self.overlap(other)) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """A density operator on ``labels`` (bit j of the row index is ``labels[j]``).

    ``basis="dicke"`` marks matrices written in a symmetric-subspace basis
    instead of the computational one; ``labels`` then only documents what
    was kept.
    """

    labels: tuple
    matrix: np.ndarray
    basis: str = "computational"
    _checked: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if self.basis == "computational" and m.shape[0] != 1 << len(self.labels):
            raise ValueError("matrix dimension does not match the retained qubits")
        if self._checked:
            if not np.allclose(m, m.conj().T, atol=HERMITIAN_TOL, rtol=0):
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(m).real
            if abs(tr - 1.0) > HERMITIAN_TOL:
                raise ValueError(f"density matrix has trace {tr!r}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _split_matrix(state: PureState, keep: tuple[int, ...]) -> np.ndarray:
    """Reshape the amplitudes into a (2^|keep|, 2^rest) matrix.

    Row index bit j is ``keep[j]``; the tensor reshape is a view and the one
    transpose is the only copy.
    """
    n = state.layout.n_qubits
    rest = tuple(q for q in range(n) if q not in keep)
    # reshape axis a carries bit n-1-a; the most significant row bit comes first
    axes = [n - 1 - q for q in reversed(keep)] + [n - 1 - q for q in reversed(rest)]
    psi = state.amplitudes.reshape((2,) * n).transpose(axes)
    return psi.reshape(1 << len(keep), 1 << len(rest))


def reduced_density(state: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace of ``|state><state|`` over every qubit not in ``keep``."""
    keep = state.layout.check_labels(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    m = _split_matrix(state, keep)
    rho = m @ m.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(keep, rho)


def entropy_from_eigenvalues(p: np.ndarray) -> float:
    p = np.clip(np.real(p), 0.0, 1.0)
    p = p[p > EIG_CLIP]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    """Entropy in bits, ``-sum p log2 p`` over the spectrum of ``rho``."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if not np.allclose(m, m.conj().T, atol=HERMITIAN_TOL, rtol=0):
        raise ValueError("entropy requested for a non-Hermitian matrix")
    return entropy_from_eigenvalues(np.linalg.eigvalsh(m))


def subsystem_entropy(state: PureState, keep: Iterable[int]) -> float:
    """Entropy of the reduced state on ``keep``, taken from the smaller side.

    For a pure global state both sides of a cut share their nonzero
    spectrum, so the Gram matrix of the smaller factor suffices.
    """
    keep = state.layout.check_labels(keep)
    n = state.layout.n_qubits
    if len(keep) in (0, n):
        return 0.0
    m = _split_matrix(state, keep)
    if m.shape[0] <= m.shape[1]:
        g = m @ m.conj().T
    else:
        g = m.T @ m.conj()
    return entropy_from_eigenvalues(np.linalg.eigvalsh(0.5 * (g + g.conj().T)))


_PAULI = {"x", "y", "z"}


def _pauli_action(n_qubits: int, string: Mapping[int, str]):
    """Flip mask and per-basis-state phase of a Pauli string.

    ``P|b> = phase[b] |b ^ mask>``.
    """
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    mask = 0
    phase = np.ones(idx.size, dtype=complex)
    for q, p in string.items():
        p = p.lower()
        if p not in _PAULI:
            raise ValueError(f"unknown Pauli {p!r}")
        if not 0 <= q < n_qubits:
            raise ValueError(f"site {q} out of range for {n_qubits} qubits")
        bit = (idx >> q) & 1
        if p == "x":
            mask |= 1 << q
        elif p == "z":
            phase *= 1 - 2 * bit
        else:
            # sigma^y|0> = i|1>, sigma^y|1> = -i|0>
            mask |= 1 << q
            phase *= 1j * (1 - 2 * bit)
    return idx, mask, phase


def apply_pauli_string(state: PureState, string: Mapping[int, str], scalar: complex = 1.0) -> PureState:
    """Apply ``scalar * prod_q P_q`` to ``state``.

    Only unit-modulus scalars are accepted since the result must stay a
    normalized state; use :func:`apply_pauli_vector` for raw vectors.
    """
    if abs(abs(scalar) - 1.0) > NORM_TOL:
        raise ValueError("scalar must have unit modulus to give a state")
    idx, mask, phase = _pauli_action(state.layout.n_qubits, string)
    out = np.empty_like(state.amplitudes)
    out[idx ^ mask] = scalar * phase * state.amplitudes
    return PureState(state.layout, out)


def apply_pauli_vector(vec: np.ndarray, n_qubits: int, string: Mapping[int, str], scalar: complex = 1.0) -> np.ndarray:
    """Same action as :func:`apply_pauli_string` on a raw amplitude vector."""
    idx, mask, phase = _pauli_action(n_qubits, string)
    out = np.empty(vec.shape, dtype=complex)
    out[idx ^ mask] = scalar * phase * vec
    return out


def random_state(layout: RegisterLayout, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return PureState.normalized(layout, v)
