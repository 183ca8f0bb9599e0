import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from xxdarwin.core import PureState, RegisterLayout, reduced_density
from xxdarwin.dynamics import (
    BranchPair,
    EvolutionSpec,
    branch_trajectory,
    coherence,
    evolve_branches,
    full_hamiltonian,
    global_state,
    product_initial,
    spin_flip,
    system_state,
)
from xxdarwin.krylov import expm_krylov
from xxdarwin.xxmodel import sector_ground

PI = math.pi


def polarized(N):
    return PureState.basis(RegisterLayout(N, has_system=False), 0)


def kron_all(v, N):
    out = np.ones(1, dtype=complex)
    for _ in range(N):
        out = np.kron(out, v)
    return out


def test_spec_validation():
    with pytest.raises(ValueError):
        EvolutionSpec(4, time_grid=(0.1, 0.2))
    with pytest.raises(ValueError):
        EvolutionSpec(4, time_grid=(0.0, 0.2, 0.2))
    with pytest.raises(ValueError):
        EvolutionSpec(4, lam=-0.1)


def test_quarter_period_product_branches():
    N = 5
    pair = evolve_branches(polarized(N), EvolutionSpec(N), PI / 4)
    # exp(-i pi/4 sx)|0> = (|0> - i|1>)/sqrt(2) for the up branch
    up = kron_all(np.array([1, -1j]) / np.sqrt(2), N)
    down = kron_all(np.array([1, 1j]) / np.sqrt(2), N)
    np.testing.assert_allclose(pair.up.amplitudes, up, atol=1e-13)
    np.testing.assert_allclose(pair.down.amplitudes, down, atol=1e-13)
    assert abs(coherence(pair)) < 1e-14


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_half_period_is_global_flip(n):
    N = 8
    G = sector_ground(N, 0.5, n).vector
    pair = evolve_branches(G, EvolutionSpec(N), PI / 2)
    assert pair.up.fidelity(spin_flip(G)) >= 1 - 1e-12
    assert pair.down.fidelity(spin_flip(G)) >= 1 - 1e-12


def test_finite_lambda_matches_dense_expm():
    N, t = 6, 0.7
    G = sector_ground(N, 0.4, 2).vector
    spec = EvolutionSpec(N, 1.0, 1.0, 0.4)
    pair = evolve_branches(G, spec, t)
    H = full_hamiltonian(spec).dense()
    ref = sla.expm(-1j * t * H) @ product_initial(G).amplitudes
    ref = ref.reshape(-1, 2) * np.sqrt(2)
    up_ref = PureState(G.layout, ref[:, 0])
    down_ref = PureState(G.layout, ref[:, 1])
    assert pair.up.fidelity(up_ref) >= 1 - 1e-9
    assert pair.down.fidelity(down_ref) >= 1 - 1e-9


def test_global_state_matches_dense_expm():
    N, t = 6, 1.1
    G = sector_ground(N, 1.0, 0).vector
    spec = EvolutionSpec(N, 1.0, 0.5, 1.0)
    state = global_state(evolve_branches(G, spec, t))
    ref = sla.expm(-1j * t * full_hamiltonian(spec).dense()) @ product_initial(G).amplitudes
    assert abs(np.vdot(ref, state.amplitudes)) ** 2 >= 1 - 1e-9


def test_coherence_at_zero():
    G = sector_ground(6, 0.3, 3).vector
    assert coherence(evolve_branches(G, EvolutionSpec(6), 0.0)) == pytest.approx(1.0)


@pytest.mark.parametrize("t", [0.0, 0.2, 0.5, 0.77, 1.3])
def test_coherence_of_polarized_bath(t):
    N = 7
    nu = coherence(evolve_branches(polarized(N), EvolutionSpec(N), t))
    assert nu == pytest.approx(math.cos(2 * t) ** N, abs=1e-13)


def test_coherence_recovers_at_half_period():
    N = 10
    for n in range(N + 1):
        G = sector_ground(N, 0.2, n).vector
        assert abs(coherence(evolve_branches(G, EvolutionSpec(N), PI / 2))) == pytest.approx(1.0, abs=1e-12)


def test_global_state_at_zero_is_product():
    G = sector_ground(5, 0.6, 2).vector
    state = global_state(evolve_branches(G, EvolutionSpec(5), 0.0))
    expect = np.kron(G.amplitudes, np.array([1, 1]) / np.sqrt(2))
    np.testing.assert_allclose(state.amplitudes, expect, atol=1e-14)
    rho = reduced_density(state, {0}).matrix
    np.testing.assert_allclose(rho, 0.5 * np.ones((2, 2)), atol=1e-14)


def test_orthogonal_branches_give_mixed_system():
    N = 4
    pair = evolve_branches(polarized(N), EvolutionSpec(N), PI / 4)
    rho = reduced_density(global_state(pair), {0}).matrix
    np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-14)


def test_branch_pair_rejects_mixed_registers():
    a = PureState.basis(RegisterLayout(3, False))
    b = PureState.basis(RegisterLayout(4, False))
    with pytest.raises(ValueError):
        BranchPair(a, b, 0.0)


def test_rotation_refuses_finite_lambda():
    with pytest.raises(ValueError):
        evolve_branches(polarized(4), EvolutionSpec(4, lam=0.5), 0.3, method="rotation")


def test_initial_state_must_be_bath_only():
    with pytest.raises(ValueError):
        evolve_branches(PureState.basis(RegisterLayout(4, True)), EvolutionSpec(4), 0.1)


def test_krylov_against_dense_on_random_hermitian(rng):
    n = 200
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = (A + A.conj().T) / 2
    v = rng.normal(size=n) + 0j
    v /= np.linalg.norm(v)
    for t in (0.05, 0.8, -0.4):
        out, _ = expm_krylov(lambda x: H @ x, v, t, m=30, tol=1e-12)
        np.testing.assert_allclose(out, sla.expm(-1j * t * H) @ v, atol=1e-10)


def test_trajectory_stepping_matches_single_shots():
    N = 6
    G = sector_ground(N, 1.0, 0).vector
    spec = EvolutionSpec(N, 1.0, 0.5, 1.0, tuple(np.linspace(0, 1.5, 7)))
    for pair in branch_trajectory(G, spec):
        single = evolve_branches(G, spec, pair.time)
        assert pair.up.fidelity(single.up) >= 1 - 1e-10
        assert pair.down.fidelity(single.down) >= 1 - 1e-10


@settings(max_examples=25, deadline=None)
@given(N=st.integers(3, 10), n=st.integers(0, 10), h=st.floats(0, 1.5), t=st.floats(0, 3.0))
def test_fast_path_agrees_with_krylov(N, n, h, t):
    n = min(n, N)
    G = sector_ground(N, h, n).vector
    spec = EvolutionSpec(N, 1.0, 0.0, h)
    fast = evolve_branches(G, spec, t, method="rotation")
    slow = evolve_branches(G, spec, t, method="krylov")
    assert fast.up.fidelity(slow.up) >= 1 - 1e-10
    assert fast.down.fidelity(slow.down) >= 1 - 1e-10


@settings(max_examples=25, deadline=None)
@given(N=st.integers(3, 8), n=st.integers(0, 8), lam=st.floats(0, 1.5), t=st.floats(0, 3.0))
def test_propagators_preserve_norm_and_system_form(N, n, lam, t):
    n = min(n, N)
    G = sector_ground(N, 0.7, n).vector
    pair = evolve_branches(G, EvolutionSpec(N, 1.0, lam, 0.7), t)
    assert np.linalg.norm(pair.up.amplitudes) == pytest.approx(1, abs=1e-10)
    assert np.linalg.norm(pair.down.amplitudes) == pytest.approx(1, abs=1e-10)
    rho = reduced_density(global_state(pair), {0}).matrix
    np.testing.assert_allclose(rho, system_state(pair), atol=1e-10)
    assert rho[0, 0].real == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("N", [4, 6, 8, 12])
def test_recurrence_is_flip_of_initial_state(N):
    # branch phases (-i)^N and (+i)^N agree for even N, so the system is untouched
    for n in range(N // 2 + 1):
        G = sector_ground(N, 0.3, n).vector
        state = global_state(evolve_branches(G, EvolutionSpec(N), PI / 2))
        target = product_initial(spin_flip(G))
        assert state.fidelity(target) >= 1 - 1e-9


def test_odd_ring_recurrence_carries_system_phase():
    N = 5
    G = sector_ground(N, 0.3, 1).vector
    state = global_state(evolve_branches(G, EvolutionSpec(N), PI / 2))
    flipped = spin_flip(G)
    minus = global_state(BranchPair(flipped, PureState(flipped.layout, -flipped.amplitudes), 0.0))
    assert state.fidelity(minus) >= 1 - 1e-9
