"""Pauli-sum Hamiltonians compiled to sparse matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .core import RegisterLayout, _pauli_action


@dataclass(frozen=True)
class SpinHamiltonian:
    """Sum of ``coefficient * PauliString`` terms on a register.

    Coefficients are real and every string is Hermitian, so the operator is
    Hermitian by construction.
    """

    layout: RegisterLayout
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        clean = []
        for coef, string in self.terms:
            if np.iscomplexobj(coef) and np.imag(coef) != 0:
                raise ValueError("coefficients must be real")
            clean.append((float(np.real(coef)), dict(string)))
        object.__setattr__(self, "terms", tuple(clean))

    def __add__(self, other: "SpinHamiltonian") -> "SpinHamiltonian":
        if self.layout != other.layout:
            raise ValueError("cannot add Hamiltonians on different registers")
        return SpinHamiltonian(self.layout, self.terms + other.terms)

    def scaled(self, factor: float) -> "SpinHamiltonian":
        return SpinHamiltonian(self.layout, tuple((factor * c, s) for c, s in self.terms))

    @cached_property
    def sparse(self) -> sp.csr_matrix:
        n = self.layout.n_qubits
        dim = self.layout.dim
        rows, cols, data = [], [], []
        for coef, string in self.terms:
            if coef == 0.0:
                continue
            idx, mask, phase = _pauli_action(n, string)
            rows.append(idx ^ mask)
            cols.append(idx)
            data.append(coef * phase)
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        mat = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        ).tocsr()
        mat.sum_duplicates()
        mat.eliminate_zeros()
        return mat

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.sparse @ v

    def dense(self) -> np.ndarray:
        return self.sparse.toarray()

    @property
    def is_real(self) -> bool:
        return not np.any(self.sparse.data.imag)

