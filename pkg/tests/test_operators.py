import itertools

import numpy as np
import pytest
from scipy.sparse.linalg import eigsh

from loopgas.lattice import build_lattice
from loopgas.operators import (OperatorError, PauliString, PauliTermSum, hamiltonian_tc,
                               hamiltonian_tcm, plaquette_term, star_term)

from conftest import dense_pauli_sum


def test_tc_term_counts(lat2x2, lat3x3):
    h = hamiltonian_tc(lat3x3)
    assert len(h) == 13
    assert all(c == -1.0 for c, _ in h.terms)
    assert len(hamiltonian_tc(lat2x2)) == 5


def test_tc_term_content(lat3x3):
    h = hamiltonian_tc(lat3x3).as_dict()
    for s in range(lat3x3.n_vertices):
        assert h[star_term(lat3x3, s)] == -1.0
    for p in range(lat3x3.n_plaquettes):
        pauli = plaquette_term(lat3x3, p)
        assert pauli.z_mask == 0
        assert h[pauli] == -1.0


def test_tc_ground_energy_3x3(lat3x3):
    evals = eigsh(dense_pauli_sum(hamiltonian_tc(lat3x3)), k=1, which="SA")[0]
    assert evals[0] == pytest.approx(-13.0, abs=1e-10)


def test_tcm_endpoints(lat3x3):
    assert hamiltonian_tcm(lat3x3, 0.0).as_dict() == hamiltonian_tc(lat3x3).as_dict()
    h1 = hamiltonian_tcm(lat3x3, 1.0)
    assert len(h1) == 12
    assert all(c == -1.0 and p.x_mask == 0 and bin(p.z_mask).count("1") == 1 for c, p in h1.terms)
    diag = h1.diagonal
    assert diag[0] == -12.0
    assert np.argmin(diag) == 0 and np.sum(diag == diag.min()) == 1


def test_tcm_midpoint_2x2(lat2x2):
    h = hamiltonian_tcm(lat2x2, 0.5)
    coeffs = sorted(c for c, _ in h.terms)
    # 4 stars, 1 plaquette and 4 field terms, all at weight 1/2
    assert len(h) == 9
    assert coeffs == [-0.5] * 9
    n_field = sum(1 for _, p in h.terms if bin(p.z_mask).count("1") == 1)
    assert n_field == 4


@pytest.mark.parametrize("x", [0.1, 0.37, 0.9])
def test_tcm_term_count(lat4x3, x):
    assert len(hamiltonian_tcm(lat4x3, x)) == lat4x3.n_vertices + lat4x3.n_plaquettes + lat4x3.n_qubits


@pytest.mark.parametrize("x", [-0.1, 1.2, float("nan")])
def test_tcm_rejects_bad_x(lat2x2, x):
    with pytest.raises(OperatorError):
        hamiltonian_tcm(lat2x2, x)


@pytest.mark.parametrize("shape", [(2, 2), (3, 3), (4, 3), (4, 4)])
def test_stars_and_plaquettes_commute(shape):
    geom = build_lattice(*shape)
    for s, p in itertools.product(geom.star_members, geom.plaquette_members):
        assert len(set(s) & set(p)) % 2 == 0
    terms = [p for _, p in hamiltonian_tc(geom).terms]
    assert all(a.commutes_with(b) for a, b in itertools.combinations(terms, 2))


def test_pauli_string_rejects_y():
    with pytest.raises(OperatorError):
        PauliString(z_mask=0b11, x_mask=0b10)


def test_term_sum_merges_duplicates():
    z = PauliString(z_mask=1)
    h = PauliTermSum(2, ((1.0, z), (2.5, z), (1.0, PauliString(x_mask=2))))
    assert len(h) == 2
    assert h.as_dict()[z] == 3.5


def test_term_sum_validation():
    with pytest.raises(OperatorError):
        PauliTermSum(2, ((float("inf"), PauliString(z_mask=1)),))
    with pytest.raises(OperatorError):
        PauliTermSum(2, ((1.0, PauliString(z_mask=4)),))


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0])
def test_to_dense_matches_kron_oracle(lat2x2, x):
    h = hamiltonian_tcm(lat2x2, x)
    np.testing.assert_allclose(h.to_dense(), dense_pauli_sum(h), atol=1e-14)


def test_diagonal_matches_kron_oracle(backend):
    h = hamiltonian_tcm(build_lattice(3, 2), 0.4)
    h.__dict__.pop("diagonal", None)
    np.testing.assert_allclose(h.diagonal, np.diag(dense_pauli_sum(h)), atol=1e-12)
