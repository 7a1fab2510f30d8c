"""Magnetization, star expectations and topological entanglement entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeGeometry, RDM_MAX_QUBITS, Tripartition
from .operators import PauliTermSum
from .statevector import (SimulationError, Statevector, entanglement_entropy, expectation,
                          pauli_z_expectation)

# sign of each region's entropy in S_A + S_B + S_C - S_AB - S_BC - S_AC + S_ABC
TEE_SIGNS = {"A": 1, "B": 1, "C": 1, "AB": -1, "BC": -1, "AC": -1, "ABC": 1}


def _check_size(state: Statevector, geom: LatticeGeometry) -> None:
    if state.n_qubits != geom.n_qubits:
        raise SimulationError(
            f"{state.n_qubits}-qubit state does not fit a {geom.n_qubits}-qubit lattice")


def magnetization(state: Statevector, geom: LatticeGeometry) -> float:
    """Mean of ``<Z_i>`` over all bonds."""
    _check_size(state, geom)
    total = sum(pauli_z_expectation(state, 1 << q) for q in range(geom.n_qubits))
    return total / geom.n_qubits


def star_expectations(state: Statevector, geom: LatticeGeometry) -> np.ndarray:
    """``<A_s>`` for every vertex, in vertex order."""
    _check_size(state, geom)
    return np.array([pauli_z_expectation(state, m) for m in geom.star_masks])


def region_entropies(state: Statevector, tri: Tripartition) -> dict[str, float]:
    out = {}
    for name, region in tri.regions().items():
        if len(region) > RDM_MAX_QUBITS:
            raise SimulationError(f"region {name} has {len(region)} qubits, cap is {RDM_MAX_QUBITS}")
        out[name] = entanglement_entropy(state, region)
    return out


def tee(state: Statevector, tri: Tripartition) -> float:
    """Kitaev-Preskill combination of von Neumann entropies, in nats."""
    if max(tri.union) >= state.n_qubits:
        raise SimulationError("tripartition refers to qubits the state does not have")
    ent = region_entropies(state, tri)
    return float(sum(TEE_SIGNS[k] * v for k, v in ent.items()))


@dataclass
class ObservableReport:
    energy: float
    m_z: float
    s_topo: float
    star_expectations: np.ndarray
    per_region_entropies: dict[str, float]


def observable_report(state: Statevector, geom: LatticeGeometry, ham: PauliTermSum,
                      tri: Tripartition) -> ObservableReport:
    ent = region_entropies(state, tri)
    return ObservableReport(
        energy=expectation(state, ham),
        m_z=magnetization(state, geom),
        s_topo=float(sum(TEE_SIGNS[k] * v for k, v in ent.items())),
        star_expectations=star_expectations(state, geom),
        per_region_entropies=ent,
    )
