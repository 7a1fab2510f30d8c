"""Parametrized loop-gas circuit (PLGC) construction and execution.

Each plaquette ``p`` contributes the factor ``cos(t/2) I + sin(t/2) B_p``.
It is realized by ``Ry(t)`` on a representative bond still in ``|0>``,
followed by CNOTs from that bond onto the plaquette's other three bonds.
The representative is the plaquette's bottom bond and plaquettes are taken
row by row from the top: the bottom bond of row ``r`` is next touched only
by row ``r + 1``, which comes later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .lattice import LatticeGeometry
from .statevector import CNOT, Gate, H, Ry, Statevector, apply_gate, zero_state

TWO_PI = 2.0 * math.pi
DIRECT_STATE_MAX_QUBITS = 20


class CircuitError(ValueError):
    pass


def as_params(thetas, n_plaquettes: int) -> np.ndarray:
    """Validate a parameter vector and reduce it into ``[0, 2*pi)``."""
    arr = np.array(thetas, dtype=np.float64).reshape(-1)
    if arr.shape[0] != n_plaquettes:
        raise CircuitError(f"expected {n_plaquettes} parameters, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise CircuitError("parameters must be finite")
    arr = np.mod(arr, TWO_PI)
    arr[arr >= TWO_PI] = 0.0
    return arr


@dataclass(frozen=True)
class GateCircuit:
    n_qubits: int
    layers: tuple[tuple[Gate, ...], ...]
    param_slots: dict[int, tuple[int, int]]

    def __post_init__(self):
        for k, layer in enumerate(self.layers):
            seen: set[int] = set()
            for g in layer:
                if seen.intersection(g.qubits):
                    raise CircuitError(f"layer {k} has gates sharing a qubit")
                seen.update(g.qubits)
        for slot, (k, j) in self.param_slots.items():
            g = self.layers[k][j]
            if g.name != "ry" or g.slot != slot:
                raise CircuitError(f"parameter slot {slot} does not point at its Ry gate")

    @property
    def n_params(self) -> int:
        return len(self.param_slots)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self) -> Iterable[Gate]:
        for layer in self.layers:
            yield from layer

    def count(self, name: str) -> int:
        return sum(g.name == name for g in self.gates())

    def bound(self, thetas) -> "GateCircuit":
        """Copy with new values in the parameter slots."""
        thetas = as_params(thetas, self.n_params)
        layers = [list(layer) for layer in self.layers]
        for slot, (k, j) in self.param_slots.items():
            layers[k][j] = layers[k][j]._replace(theta=float(thetas[slot]))
        return GateCircuit(self.n_qubits, tuple(tuple(l) for l in layers), dict(self.param_slots))

    def parameters(self) -> np.ndarray:
        out = np.zeros(self.n_params)
        for slot, (k, j) in self.param_slots.items():
            out[slot] = self.layers[k][j].theta
        return out


def schedule(n_qubits: int, gates: Sequence[Gate]) -> GateCircuit:
    """Pack gates into layers, each at the earliest layer after its qubits free up.

    Gate order on every qubit is preserved, so the layered circuit is
    equivalent to ``gates`` applied in sequence.  Within a layer gates are
    sorted by their lowest qubit id.
    """
    free_at = [0] * n_qubits
    layers: list[list[Gate]] = []
    for g in gates:
        k = max(free_at[q] for q in g.qubits)
        if k == len(layers):
            layers.append([])
        layers[k].append(g)
        for q in g.qubits:
            free_at[q] = k + 1
    layers = [sorted(layer, key=lambda g: min(g.qubits)) for layer in layers]
    slots = {}
    for k, layer in enumerate(layers):
        for j, g in enumerate(layer):
            if g.slot is not None:
                slots[g.slot] = (k, j)
    return GateCircuit(n_qubits, tuple(tuple(l) for l in layers), slots)


def plaquette_order(geom: LatticeGeometry) -> list[int]:
    """Row by row from the top; within a row, even columns before odd ones.

    Neighbouring plaquettes in a row share a vertical bond, so alternating
    columns keeps the CNOT chain along a row from growing with ``lx``.
    """
    order = []
    for r in range(geom.ly - 1):
        cols = list(range(0, geom.lx - 1, 2)) + list(range(1, geom.lx - 1, 2))
        order.extend(geom.plaquette_id(r, c) for c in cols)
    return order


def loopgas_gates(geom: LatticeGeometry, thetas=None, hadamard: bool = False) -> list[Gate]:
    """Flat gate sequence of the loop-gas circuit, before layering."""
    if thetas is None:
        thetas = np.full(geom.n_plaquettes, math.pi / 2)
    thetas = as_params(thetas, geom.n_plaquettes)
    gates = []
    for p in plaquette_order(geom):
        top, left, right, bottom = geom.plaquette_members[p]
        gates.append(H(bottom) if hadamard else Ry(thetas[p], bottom, slot=p))
        gates.extend(CNOT(bottom, t) for t in (top, left, right))
    return gates


def build_plgc(geom: LatticeGeometry, thetas) -> GateCircuit:
    """Layered PLGC with ``thetas`` bound into its Ry slots."""
    return schedule(geom.n_qubits, loopgas_gates(geom, thetas))


def build_toric_ground(geom: LatticeGeometry) -> GateCircuit:
    """Same layout as :func:`build_plgc` with Hadamards instead of rotations."""
    return schedule(geom.n_qubits, loopgas_gates(geom, hadamard=True))


def circuit_depth(circuit: GateCircuit) -> int:
    return circuit.depth


def run_circuit(circuit: GateCircuit, thetas=None, dtype=np.complex128) -> Statevector:
    """Execute on ``|0...0>``; ``thetas`` (if given) replace the bound parameters."""
    if thetas is not None:
        thetas = as_params(thetas, circuit.n_params)
    state = zero_state(circuit.n_qubits, dtype=dtype)
    for g in circuit.gates():
        if thetas is not None and g.slot is not None:
            g = g._replace(theta=float(thetas[g.slot]))
        apply_gate(state, g)
    return state


def direct_loopgas_state(geom: LatticeGeometry, thetas, order: Sequence[int] | None = None,
                         dtype=np.complex128) -> Statevector:
    """Operator-product oracle: ``prod_p (cos(t_p/2) + sin(t_p/2) B_p) |0...0>``.

    Each factor is applied as ``c * psi + s * psi[i ^ mask]``; no gates are
    involved.
    """
    if geom.n_qubits > DIRECT_STATE_MAX_QUBITS:
        raise CircuitError(
            f"direct construction is limited to {DIRECT_STATE_MAX_QUBITS} qubits")
    thetas = as_params(thetas, geom.n_plaquettes)
    order = range(geom.n_plaquettes) if order is None else order
    psi = zero_state(geom.n_qubits, dtype=dtype).amplitudes
    idx = np.arange(psi.shape[0])
    for p in order:
        mask = geom.plaquette_masks[p]
        psi = math.cos(thetas[p] / 2) * psi + math.sin(thetas[p] / 2) * psi[idx ^ mask]
    return Statevector(psi)


def to_qasm(circuit: GateCircuit) -> str:
    """OpenQASM 2.0 listing in layer order."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n_qubits}];"]
    for g in circuit.gates():
        if g.name == "ry":
            lines.append(f"ry({g.theta!r}) q[{g.qubits[0]}];")
        elif g.name == "cx":
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        else:
            lines.append(f"{g.name} q[{g.qubits[0]}];")
    return "\n".join(lines) + "\n"
