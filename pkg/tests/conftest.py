"""Shared fixtures and brute-force oracles.

The oracles here build everything from explicit Kronecker products and
index loops so they stay independent of the library's reshaping tricks.
"""
import itertools

import numpy as np
import pytest

from xxdarwin.core import PureState, RegisterLayout

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def dense_op(n_qubits, string):
    """Kronecker product with qubit 0 as the least significant bit."""
    out = np.ones((1, 1), dtype=complex)
    for q in reversed(range(n_qubits)):
        out = np.kron(out, PAULI[string.get(q, "i")])
    return out


def brute_partial_trace(amps, n_qubits, keep):
    keep = sorted(keep)
    rest = [q for q in range(n_qubits) if q not in keep]
    dk = 1 << len(keep)
    rho = np.zeros((dk, dk), dtype=complex)

    def index(a, r):
        idx = 0
        for j, q in enumerate(keep):
            idx |= ((a >> j) & 1) << q
        for j, q in enumerate(rest):
            idx |= ((r >> j) & 1) << q
        return idx

    for r in range(1 << len(rest)):
        col = np.array([amps[index(a, r)] for a in range(dk)])
        rho += np.outer(col, col.conj())
    return rho


def brute_entropy(rho):
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-14]
    return float(-np.sum(p * np.log2(p)))


def brute_mi(amps, n_qubits, fragment):
    s = brute_entropy(brute_partial_trace(amps, n_qubits, [0]))
    f = brute_entropy(brute_partial_trace(amps, n_qubits, fragment))
    sf = brute_entropy(brute_partial_trace(amps, n_qubits, [0, *fragment]))
    return s + f - sf


def dense_xx_bath(N, h):
    """Bath Hamiltonian from explicit raising/lowering matrices."""
    sp_ = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|, raises towards spin up
    sm_ = sp_.T.copy()

    def ops(placed):
        out = np.ones((1, 1), dtype=complex)
        for q in reversed(range(N)):
            out = np.kron(out, placed.get(q, np.eye(2)))
        return out

    H = np.zeros((1 << N, 1 << N), dtype=complex)
    for i in range(N):
        j = (i + 1) % N
        H -= ops({i: sp_, j: sm_}) + ops({i: sm_, j: sp_})
        H -= h * ops({i: PAULI["z"]})
    return H


def popcount(x):
    return bin(x).count("1")


def ghz_state(N, alpha, beta):
    """alpha|0>|0...0> + beta|1>|1...1> on system + N bath qubits."""
    layout = RegisterLayout(N, has_system=True)
    amps = np.zeros(layout.dim, dtype=complex)
    amps[0] = alpha
    amps[-1] = beta
    return PureState.normalized(layout, amps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def all_subsets(items, k):
    return list(itertools.combinations(items, k))
