from __future__ import annotations

import os
from functools import reduce

import numpy as np
import pytest

from loopgas import _backend, ed, statevector, vqe
from loopgas.lattice import build_lattice

BACKENDS = ["python"] + (["cython"] if _backend.compiled is not None else [])
FULL_4X4 = bool(os.environ.get("LOOPGAS_FULL_4X4"))

I2 = np.eye(2)
PX = np.array([[0.0, 1.0], [1.0, 0.0]])
PZ = np.diag([1.0, -1.0])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    k = _backend.get_kernels(request.param)
    for mod in (_backend, statevector, vqe, ed):
        monkeypatch.setattr(mod, "kernels", k)
    return request.param


@pytest.fixture(scope="session")
def lat2x2():
    return build_lattice(2, 2)


@pytest.fixture(scope="session")
def lat3x3():
    return build_lattice(3, 3)


@pytest.fixture(scope="session")
def lat4x3():
    return build_lattice(4, 3)


# --- independent oracles ---------------------------------------------------

def kron_operator(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Dense operator from single-qubit factors; qubit 0 is the last kron factor."""
    return reduce(np.kron, [ops.get(q, I2) for q in reversed(range(n))])


def dense_pauli_sum(ham) -> np.ndarray:
    n = ham.n_qubits
    out = np.zeros((1 << n, 1 << n))
    for coeff, p in ham.terms:
        ops = {}
        for q in range(n):
            if p.z_mask >> q & 1:
                ops[q] = PZ
            if p.x_mask >> q & 1:
                ops[q] = PX
        out += coeff * kron_operator(n, ops)
    return out


def gf2_rank(m: np.ndarray) -> int:
    m = (m.copy() % 2).astype(np.uint8)
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivots = [i for i in range(rank, rows) if m[i, c]]
        if not pivots:
            continue
        m[[rank, pivots[0]]] = m[[pivots[0], rank]]
        for i in range(rows):
            if i != rank and m[i, c]:
                m[i] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def stabilizer_entropy(geom, region) -> float:
    """Entropy of ``region`` in the toric-code ground state, via GF(2) ranks.

    For a stabilizer state S = (|X| - dim G_X) ln 2 where G_X is the subgroup
    supported inside X.
    """
    region = set(region)
    rest = [q for q in range(geom.n_qubits) if q not in region]
    inside = 0
    for gens in (geom.star_members, geom.plaquette_members):
        m = np.zeros((len(gens), geom.n_qubits), dtype=np.uint8)
        for i, g in enumerate(gens):
            m[i, list(g)] = 1
        inside += gf2_rank(m) - (gf2_rank(m[:, rest]) if rest else 0)
    return (len(region) - inside) * np.log(2)


# --- acceptance summary ----------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
