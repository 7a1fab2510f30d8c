import numpy as np
import pytest

from loopgas import ed
from loopgas.ed import (EdError, LanczosNotConverged, dense_spectrum, ground_state,
                        ground_state_dense, ground_state_lanczos, matvec, star_sectors)
from loopgas.lattice import build_lattice
from loopgas.operators import hamiltonian_tcm

from conftest import dense_pauli_sum


def test_matvec_examples(lat3x3, lat2x2, backend):
    ed._operator.cache_clear()
    e0 = np.zeros(1 << 12)
    e0[0] = 1.0
    np.testing.assert_array_equal(matvec(lat3x3, 1.0, e0), -12.0 * e0)
    v = np.zeros(16)
    v[0] = 1.0
    expected = -4.0 * v
    expected[lat2x2.plaquette_masks[0]] = -1.0
    np.testing.assert_array_equal(matvec(lat2x2, 0.0, v), expected)
    ed._operator.cache_clear()


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0])
def test_quadratic_form_matches_dense_oracle(x, backend):
    ed._operator.cache_clear()
    geom = build_lattice(3, 2)
    dense = dense_pauli_sum(hamiltonian_tcm(geom, x))
    rng = np.random.default_rng(2)
    for cplx in (False, True):
        v = rng.standard_normal(1 << geom.n_qubits)
        if cplx:
            v = v + 1j * rng.standard_normal(v.shape)
        np.testing.assert_allclose(matvec(geom, x, v), dense @ v, atol=1e-12)
        assert np.vdot(v, matvec(geom, x, v)) == pytest.approx(np.vdot(v, dense @ v), abs=1e-10)
    ed._operator.cache_clear()


def test_hermiticity(lat3x3):
    rng = np.random.default_rng(3)
    u = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
    v = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
    lhs = np.vdot(u, matvec(lat3x3, 0.37, v))
    rhs = np.conj(np.vdot(v, matvec(lat3x3, 0.37, u)))
    assert abs(lhs - rhs) < 1e-10


def test_matvec_shape_error(lat2x2):
    with pytest.raises(EdError):
        matvec(lat2x2, 0.5, np.zeros(8))


@pytest.mark.parametrize("shape, x, energy", [((3, 3), 0.0, -13.0), ((3, 3), 1.0, -12.0),
                                              ((2, 2), 0.0, -5.0), ((4, 3), 0.0, -18.0)])
def test_known_ground_energies(shape, x, energy):
    res = ground_state_lanczos(build_lattice(*shape), x)
    assert res.energy == pytest.approx(energy, abs=1e-9)
    assert res.residual_norm <= 1e-9


def test_x1_ground_vector_is_vacuum(lat3x3):
    res = ground_state_lanczos(lat3x3, 1.0)
    assert abs(res.ground_vector.amplitudes[0]) == pytest.approx(1.0, abs=1e-9)
    dense = ground_state_dense(build_lattice(3, 2), 1.0)
    assert dense.energy == pytest.approx(-7.0, abs=1e-12)
    assert abs(dense.ground_vector.amplitudes[0]) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("shape, x", [((3, 2), 0.0), ((3, 2), 1.0), ((2, 4), 0.45), ((3, 3), 0.0),
                                      ((3, 3), 0.3), ((3, 3), 1.0), ((5, 2), 0.25)])
def test_lanczos_matches_dense(shape, x):
    geom = build_lattice(*shape)
    dense = ground_state_dense(geom, x)
    lanczos = ground_state_lanczos(geom, x)
    assert abs(dense.energy - lanczos.energy) < 1e-9
    overlap = abs(np.vdot(dense.ground_vector.amplitudes, lanczos.ground_vector.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("shape, x", [((2, 2), 0.3), ((3, 2), 0.0), ((3, 2), 0.55), ((2, 4), 1.0)])
def test_sector_spectrum_matches_full_matrix(shape, x):
    geom = build_lattice(*shape)
    full = np.linalg.eigvalsh(dense_pauli_sum(hamiltonian_tcm(geom, x)))
    np.testing.assert_allclose(dense_spectrum(geom, x), full, atol=1e-12)


def test_star_sectors_partition_the_basis(lat3x3):
    sectors = star_sectors(lat3x3)
    assert sectors.shape == (2 ** 8, 2 ** 4)
    assert np.array_equal(np.sort(sectors.reshape(-1)), np.arange(4096))
    for row in sectors[:5]:
        for mask in lat3x3.star_masks:
            parities = {bin(int(i) & int(mask)).count("1") % 2 for i in row}
            assert len(parities) == 1


def test_block_and_full_dense_agree(lat3x3):
    blocks = ground_state_dense(lat3x3, 0.35)
    full = ground_state_dense(lat3x3, 0.35, blocks=False)
    assert abs(blocks.energy - full.energy) < 1e-10
    overlap = abs(np.vdot(blocks.ground_vector.amplitudes, full.ground_vector.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("x", [0.1, 0.25, 0.6])
def test_low_memory_mode_agrees(lat3x3, x):
    full = ground_state_lanczos(lat3x3, x, low_memory=False)
    lean = ground_state_lanczos(lat3x3, x, low_memory=True)
    assert abs(full.energy - lean.energy) < 1e-9
    assert lean.residual_norm <= 1e-9


def test_near_degenerate_point_meets_residual(lat3x3):
    res = ground_state_lanczos(lat3x3, 0.25)
    assert res.residual_norm <= 1e-9
    assert res.ground_vector.norm() == pytest.approx(1.0, abs=1e-12)


def test_non_convergence_raises(lat3x3):
    with pytest.raises(LanczosNotConverged) as info:
        ground_state_lanczos(lat3x3, 0.3, tol=1e-14, max_iter=3)
    assert info.value.best_residual > 1e-14


def test_guards():
    with pytest.raises(EdError):
        ground_state_dense(build_lattice(4, 3), 0.5)
    with pytest.raises(EdError):
        dense_spectrum(build_lattice(4, 3), 0.5)
    with pytest.raises(EdError):
        ground_state_lanczos(build_lattice(5, 4), 0.5)
    with pytest.raises(ValueError):
        ground_state_lanczos(build_lattice(2, 2), 0.5, tol=0.0)


def test_dispatch_small_uses_dense(lat2x2):
    res = ground_state(lat2x2, 0.4)
    assert res.iterations == 0
    assert res.energy == pytest.approx(ground_state_lanczos(lat2x2, 0.4).energy, abs=1e-10)


def test_energy_decreases_with_size_at_x0():
    energies = [ground_state_lanczos(build_lattice(*s), 0.0).energy for s in ((2, 2), (3, 3), (4, 3))]
    assert energies[0] > energies[1] > energies[2]
