"""Dense statevector simulation: gates, Pauli-sum expectations, entropies.

Qubit ``q`` is bit ``q`` (least significant first) of the amplitude index.
All supported gates are real, so a state may be held as ``float64`` to halve
memory and time; ``complex128`` is the default.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from ._backend import kernels
from .lattice import RDM_MAX_QUBITS
from .operators import PauliTermSum

MAX_QUBITS = 26
EIGENVALUE_CLIP = 1e-12


class SimulationError(ValueError):
    pass


class Gate(NamedTuple):
    """One gate.  ``theta`` is set for ``ry`` only; ``slot`` names its parameter."""

    name: str
    qubits: tuple[int, ...]
    theta: float | None = None
    slot: int | None = None

    def __str__(self) -> str:
        args = f"({self.theta:.6g})" if self.theta is not None else ""
        return f"{self.name}{args} " + ",".join(f"q[{q}]" for q in self.qubits)


def Ry(theta: float, q: int, slot: int | None = None) -> Gate:
    return Gate("ry", (q,), float(theta), slot)


def H(q: int) -> Gate:
    return Gate("h", (q,))


def X(q: int) -> Gate:
    return Gate("x", (q,))


def CNOT(control: int, target: int) -> Gate:
    return Gate("cx", (control, target))


class Statevector:
    """``2**n`` amplitudes of an ``n``-qubit pure state."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes: np.ndarray, n_qubits: int | None = None):
        amplitudes = np.ascontiguousarray(amplitudes)
        if amplitudes.dtype not in (np.float64, np.complex128):
            amplitudes = amplitudes.astype(np.complex128)
        n = int(amplitudes.shape[0]).bit_length() - 1
        if amplitudes.ndim != 1 or amplitudes.shape[0] != 1 << n:
            raise SimulationError("amplitude array length must be a power of two")
        if n_qubits is not None and n_qubits != n:
            raise SimulationError(f"{amplitudes.shape[0]} amplitudes do not describe {n_qubits} qubits")
        self.n_qubits = n
        self.amplitudes = amplitudes

    def __len__(self) -> int:
        return self.amplitudes.shape[0]

    def __repr__(self) -> str:
        return f"Statevector(n_qubits={self.n_qubits}, dtype={self.amplitudes.dtype})"

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def as_complex(self) -> "Statevector":
        return Statevector(self.amplitudes.astype(np.complex128))

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a * a if a.dtype.kind == "f" else np.abs(a) ** 2


def _check_qubit_count(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise SimulationError(f"qubit count {n} outside the supported range [1, {MAX_QUBITS}]")


def zero_state(n: int, dtype=np.complex128) -> Statevector:
    """``|00...0>`` on ``n`` qubits."""
    _check_qubit_count(n)
    amps = np.zeros(1 << n, dtype=dtype)
    amps[0] = 1.0
    return Statevector(amps)


def basis_state(n: int, index: int, dtype=np.complex128) -> Statevector:
    _check_qubit_count(n)
    amps = np.zeros(1 << n, dtype=dtype)
    amps[index] = 1.0
    return Statevector(amps)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply ``gate`` in place and return ``state``."""
    n = state.n_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise SimulationError(f"qubit {q} out of range for {n} qubits")
    psi = state.amplitudes
    name = gate.name
    if name == "ry":
        half = 0.5 * gate.theta
        kernels.apply_ry(psi, gate.qubits[0], math.cos(half), math.sin(half))
    elif name == "cx":
        control, target = gate.qubits
        if control == target:
            raise SimulationError("CNOT control and target must differ")
        kernels.apply_cnot(psi, control, target)
    elif name == "h":
        kernels.apply_h(psi, gate.qubits[0])
    elif name == "x":
        kernels.apply_x(psi, gate.qubits[0])
    else:
        raise SimulationError(f"unsupported gate {name!r}")
    return state


def apply_gates(state: Statevector, gates: Sequence[Gate]) -> Statevector:
    for g in gates:
        apply_gate(state, g)
    return state


def expectation(state: Statevector, ham: PauliTermSum) -> float:
    """Exact ``<psi|H|psi>`` for a normalized state."""
    if ham.n_qubits != state.n_qubits:
        raise SimulationError(
            f"operator on {ham.n_qubits} qubits applied to a {state.n_qubits}-qubit state")
    psi = state.amplitudes
    value = complex(kernels.diag_expectation(psi, ham.diagonal)) if ham.diagonal_terms[0].size else 0j
    for coeff, mask in ham.flip_terms:
        value += coeff * kernels.flip_overlap(psi, mask)
    if abs(value.imag) > 1e-10:
        raise SimulationError(f"expectation has imaginary residue {value.imag:.3e}")
    return value.real


def pauli_z_expectation(state: Statevector, mask: int) -> float:
    """``<psi| prod_{q in mask} Z_q |psi>``."""
    return float(kernels.parity_expectation(state.amplitudes, mask))


def fidelity(a: Statevector, b: Statevector) -> float:
    """``|<a|b>|**2``."""
    if a.n_qubits != b.n_qubits:
        raise SimulationError("fidelity of states with different qubit counts")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


# ---------------------------------------------------------------------------
# Partial traces and entropies
# ---------------------------------------------------------------------------

def _split_matrix(state: Statevector, keep: Sequence[int]) -> np.ndarray:
    """Reshape amplitudes into a ``(2**|keep|, 2**rest)`` matrix.

    Row index bit ``j`` is qubit ``keep[j]`` (with ``keep`` sorted ascending).
    """
    n = state.n_qubits
    keep = sorted(keep)
    rest = [q for q in range(n) if q not in set(keep)]
    # tensor axis n-1-q holds qubit q
    axes = [n - 1 - q for q in reversed(keep)] + [n - 1 - q for q in reversed(rest)]
    tensor = state.amplitudes.reshape((2,) * n)
    return np.transpose(tensor, axes).reshape(1 << len(keep), 1 << len(rest))


def _check_region(state: Statevector, keep) -> list[int]:
    keep = sorted(set(int(q) for q in keep))
    if any(not 0 <= q < state.n_qubits for q in keep):
        raise SimulationError(f"region {keep} has qubits outside [0, {state.n_qubits})")
    return keep


def reduced_density_matrix(state: Statevector, keep) -> np.ndarray:
    """Partial trace onto ``keep``; index bit ``j`` is the ``j``-th smallest kept qubit."""
    keep = _check_region(state, keep)
    if len(keep) > RDM_MAX_QUBITS:
        raise SimulationError(f"reduced density matrix on {len(keep)} qubits exceeds the cap "
                              f"of {RDM_MAX_QUBITS}")
    m = _split_matrix(state, keep)
    return m @ m.conj().T


def check_density_matrix(rho: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Validate hermiticity and trace; return the eigenvalues."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise SimulationError("density matrix must be square")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise SimulationError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise SimulationError(f"density matrix trace is {tr}, expected 1")
    evals = np.linalg.eigvalsh(rho)
    if evals[0] < -atol:
        raise SimulationError(f"density matrix has negative eigenvalue {evals[0]:.3e}")
    return evals


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-tr(rho ln rho)`` in nats; eigenvalues at or below 1e-12 count as zero."""
    evals = check_density_matrix(np.asarray(rho))
    return _entropy_from_spectrum(evals)


def _entropy_from_spectrum(evals: np.ndarray) -> float:
    lam = evals[evals > EIGENVALUE_CLIP]
    return float(-np.sum(lam * np.log(lam)))


def entanglement_entropy(state: Statevector, region) -> float:
    """Von Neumann entropy of ``region`` for a pure state.

    Works on whichever side of the cut is smaller, so a region may exceed
    the density-matrix cap as long as its complement does not.
    """
    region = _check_region(state, region)
    if not region or len(region) == state.n_qubits:
        return 0.0
    if 2 * len(region) > state.n_qubits:
        region = [q for q in range(state.n_qubits) if q not in set(region)]
    if len(region) > RDM_MAX_QUBITS:
        raise SimulationError(f"both sides of the cut exceed {RDM_MAX_QUBITS} qubits")
    m = _split_matrix(state, region)
    gram = m @ m.conj().T
    return _entropy_from_spectrum(np.linalg.eigvalsh(gram))
