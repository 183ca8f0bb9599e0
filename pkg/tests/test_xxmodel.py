import warnings

import numpy as np
import pytest

from conftest import dense_xx_bath, dense_op, popcount
from xxdarwin.core import RegisterLayout, random_state
from xxdarwin.xxmodel import (
    DegenerateSectorWarning,
    build_interaction,
    build_xx_bath,
    global_ground,
    ground_sector,
    sector_boundaries,
    sector_energies,
    sector_ground,
)


def bits(*b):
    """Basis index from per-site bits listed in site order."""
    return sum(v << i for i, v in enumerate(b))


def free_fermion_energy(N, n):
    """Sector ground energy at h = 0 from filled Jordan-Wigner modes.

    With n fermions the ring boundary term picks up (-1)^(n-1): periodic
    momenta for odd n, antiperiodic for even n; dispersion -2 cos k.
    """
    shift = 0.0 if n % 2 else 0.5
    eps = np.sort(-2 * np.cos(2 * np.pi * (np.arange(N) + shift) / N))
    return eps[:n].sum()


def test_hopping_matrix_element():
    H = build_xx_bath(3, 0.0).dense()
    assert H[bits(1, 0, 0), bits(0, 1, 0)] == pytest.approx(-1)


def test_matches_explicit_raising_lowering():
    for N, h in [(3, 0.0), (5, 0.7), (6, -0.3)]:
        np.testing.assert_allclose(build_xx_bath(N, h).dense(), dense_xx_bath(N, h), atol=1e-13)


@pytest.mark.parametrize("N", [3, 5, 8])
def test_field_on_polarized_state(N):
    H = build_xx_bath(N, 0.37).dense()
    assert H[0, 0] == pytest.approx(-N * 0.37)


def test_conserves_excitation_number():
    N = 7
    H = build_xx_bath(N, 0.4).sparse.tocoo()
    rows, cols = H.row, H.col
    assert all(popcount(int(r)) == popcount(int(c)) for r, c in zip(rows, cols))


def test_ring_rejects_short_chains():
    with pytest.raises(ValueError):
        build_xx_bath(2, 1.0)


def test_interaction_elements():
    N, d = 4, 0.8
    H = build_interaction(N, d).dense()
    # system is qubit 0, bath site 0 is qubit 1
    up_flip, up_vac = 0b10, 0b0
    dn_flip, dn_vac = 0b11, 0b1
    assert H[up_flip, up_vac] == pytest.approx(d)
    assert H[dn_flip, dn_vac] == pytest.approx(-d)


def test_interaction_commutes_with_system_z(rng):
    N = 5
    H = build_interaction(N, 1.3)
    Z = dense_op(N + 1, {0: "z"})
    for _ in range(5):
        v = random_state(RegisterLayout(N, True), rng).amplitudes
        np.testing.assert_allclose(H.matvec(Z @ v), Z @ H.matvec(v), atol=1e-12)


def test_interaction_needs_system():
    with pytest.raises(ValueError):
        build_interaction(4, 1.0, RegisterLayout(4, has_system=False))


def test_sector_zero():
    g = sector_ground(6, 0.8, 0)
    assert g.energy == pytest.approx(-6 * 0.8)
    assert abs(g.vector.amplitudes[0]) == pytest.approx(1)


@pytest.mark.parametrize("N", [3, 5, 8, 11])
def test_single_magnon_sector(N):
    h = 0.63
    g = sector_ground(N, h, 1)
    assert g.energy == pytest.approx(-2 - (N - 2) * h, abs=1e-12)
    expect = np.zeros(1 << N)
    expect[[1 << i for i in range(N)]] = 1 / np.sqrt(N)
    assert abs(np.vdot(expect, g.vector.amplitudes)) == pytest.approx(1, abs=1e-12)


def test_three_site_single_magnon_by_hand():
    # 3x3 block: zero diagonal hopping, all off-diagonals -1 on a triangle
    block = -(np.ones((3, 3)) - np.eye(3))
    assert np.linalg.eigvalsh(block)[0] == pytest.approx(-2)


def test_sector_two_matches_dense_full_space():
    N = 6
    w, v = np.linalg.eigh(dense_xx_bath(N, 0.0))
    number = np.array([popcount(i) for i in range(1 << N)])
    n_of_state = np.round(np.abs(v) ** 2 @ number).astype(int)
    assert sector_ground(N, 0.0, 2).energy == pytest.approx(w[n_of_state == 2].min(), abs=1e-10)


def test_sector_vector_support_and_residual():
    N, h = 8, 0.45
    H = build_xx_bath(N, h)
    for n in range(N + 1):
        g = sector_ground(N, h, n)
        amps = g.vector.amplitudes
        off = [i for i in range(1 << N) if popcount(i) != n]
        assert np.abs(amps[off]).max() <= 1e-12
        assert np.linalg.norm(H.matvec(amps) - g.energy * amps) <= 1e-8


@pytest.mark.parametrize("N", [6, 8, 10, 12])
def test_free_fermion_cross_check(N):
    for n in range(N + 1):
        assert sector_energies(N, 0.0)[n] == pytest.approx(free_fermion_energy(N, n), abs=1e-9)


@pytest.mark.parametrize("N", [4, 6, 8, 10])
def test_global_ground_matches_dense(N):
    for h in (0.0, 0.3, 0.77, 1.2):
        dense_min = np.linalg.eigvalsh(dense_xx_bath(N, h))[0]
        assert global_ground(N, h).energy == pytest.approx(dense_min, abs=1e-9)


def test_global_ground_examples():
    assert global_ground(12, 1.5).n == 0
    assert global_ground(12, 0.99).n == 1
    assert global_ground(12, 0.0).n == 6
    assert ground_sector(12, 1.0) == 0


def test_sector_out_of_range():
    with pytest.raises(ValueError):
        sector_ground(5, 0.1, 6)


@pytest.mark.parametrize("N", [4, 6, 8, 10, 12, 14])
def test_top_threshold_and_sector_count(N):
    b = sector_boundaries(N)
    assert b[0][0] == pytest.approx(1.0, abs=1e-12)
    assert b[0][1:] == (1, 0)
    assert len(b) + 1 == N // 2 + 1


def test_odd_ring_sector_count():
    assert len(sector_boundaries(9)) + 1 == (9 + 1) // 2


def test_thresholds_match_grid_scan():
    N = 12
    grid = np.arange(0.0, 1.5 + 1e-9, 1e-3)
    sectors = np.array([ground_sector(N, h) for h in grid])
    changes = np.flatnonzero(np.diff(sectors))
    scanned = sorted((grid[i] + grid[i + 1]) / 2 for i in changes)
    exact = sorted(t for t, _, _ in sector_boundaries(N))
    np.testing.assert_allclose(scanned, exact, atol=1e-3)


def test_ground_energy_continuous_and_sector_monotone():
    N = 10
    grid = np.linspace(0, 1.6, 801)
    e = [global_ground(N, h).energy for h in grid]
    n = [ground_sector(N, h) for h in grid]
    assert np.max(np.abs(np.diff(e))) < 2 * N * (grid[1] - grid[0]) + 1e-12
    assert all(a >= b for a, b in zip(n, n[1:]))


def test_degenerate_sector_is_flagged(monkeypatch):
    # no XX-ring sector is degenerate, so widen the tolerance to exercise the flag
    import xxdarwin.xxmodel as xx

    monkeypatch.setattr(xx, "DEGENERACY_TOL", 10.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        g = sector_ground(5, 0.0, 2)
    assert g.degenerate
    assert any(issubclass(w.category, DegenerateSectorWarning) for w in caught)


def test_even_ring_sectors_are_not_degenerate():
    with warnings.catch_warnings():
        warnings.simplefilter("error", DegenerateSectorWarning)
        for n in range(7):
            assert not sector_ground(12, 0.0, n).degenerate


def test_large_sector_residual():
    N = 14
    H = build_xx_bath(N, 0.2)
    for n in (6, 7):
        g = sector_ground(N, 0.2, n)
        amps = g.vector.amplitudes
        assert np.linalg.norm(H.matvec(amps) - g.energy * amps) <= 1e-8
    assert sector_energies(N, 0.0)[7] == pytest.approx(free_fermion_energy(N, 7), abs=1e-9)
