"""Toric-code and field Hamiltonians as weighted sums of Pauli strings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lattice import LatticeGeometry


class OperatorError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PauliString:
    """Product of Z on ``z_mask`` and X on ``x_mask``.

    Y never appears in these models, so the masks must not overlap.
    """

    z_mask: int = 0
    x_mask: int = 0

    def __post_init__(self):
        if self.z_mask < 0 or self.x_mask < 0:
            raise OperatorError("masks must be non-negative")
        if self.z_mask & self.x_mask:
            raise OperatorError("overlapping Z and X masks (a Y factor) are not supported")

    @property
    def is_diagonal(self) -> bool:
        return self.x_mask == 0

    def max_qubit(self) -> int:
        return (self.z_mask | self.x_mask).bit_length() - 1

    def commutes_with(self, other: "PauliString") -> bool:
        anti = bin(self.z_mask & other.x_mask).count("1") + bin(self.x_mask & other.z_mask).count("1")
        return anti % 2 == 0


@dataclass(frozen=True)
class PauliTermSum:
    """``sum_k coeff_k P_k`` on ``n_qubits`` qubits, duplicate strings merged."""

    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        merged: dict[PauliString, float] = {}
        for coeff, pauli in self.terms:
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise OperatorError(f"non-finite coefficient {coeff} on {pauli}")
            if pauli.max_qubit() >= self.n_qubits:
                raise OperatorError(f"{pauli} acts outside {self.n_qubits} qubits")
            merged[pauli] = merged.get(pauli, 0.0) + coeff
        object.__setattr__(self, "terms", tuple((c, p) for p, c in merged.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliTermSum") -> "PauliTermSum":
        if self.n_qubits != other.n_qubits:
            raise OperatorError("cannot add operators on different qubit counts")
        return PauliTermSum(self.n_qubits, self.terms + other.terms)

    def scaled(self, factor: float) -> "PauliTermSum":
        return PauliTermSum(self.n_qubits, tuple((factor * c, p) for c, p in self.terms))

    def as_dict(self) -> dict[PauliString, float]:
        return {p: c for c, p in self.terms}

    @cached_property
    def diagonal_terms(self) -> tuple[np.ndarray, np.ndarray]:
        """``(z_masks, coeffs)`` of the terms with no X factor."""
        diag = [(p.z_mask, c) for c, p in self.terms if p.is_diagonal]
        masks = np.array([m for m, _ in diag], dtype=np.uint64)
        coeffs = np.array([c for _, c in diag], dtype=np.float64)
        return masks, coeffs

    @cached_property
    def flip_terms(self) -> tuple[tuple[float, int], ...]:
        """``(coeff, x_mask)`` for the pure-X terms."""
        out = []
        for c, p in self.terms:
            if p.is_diagonal:
                continue
            if p.z_mask:
                raise OperatorError(f"mixed Z/X string {p} is outside the supported term set")
            out.append((c, p.x_mask))
        return tuple(out)

    @cached_property
    def diagonal(self) -> np.ndarray:
        """Sum of all diagonal terms evaluated on every basis state."""
        from ._backend import kernels

        masks, coeffs = self.diagonal_terms
        diag = kernels.build_diagonal(self.n_qubits, masks, coeffs)
        diag.flags.writeable = False
        return diag

    def to_dense(self) -> np.ndarray:
        """Dense real matrix; only sensible for small qubit counts."""
        dim = 1 << self.n_qubits
        mat = np.diag(self.diagonal).copy()
        rows = np.arange(dim)
        for c, m in self.flip_terms:
            mat[rows, rows ^ m] += c
        return mat


def _mask(qubits) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def star_term(geom: LatticeGeometry, vertex: int) -> PauliString:
    return PauliString(z_mask=_mask(geom.star_members[vertex]))


def plaquette_term(geom: LatticeGeometry, plaquette: int) -> PauliString:
    return PauliString(x_mask=_mask(geom.plaquette_members[plaquette]))


def hamiltonian_tc(geom: LatticeGeometry) -> PauliTermSum:
    """``-sum_s A_s - sum_p B_p``."""
    terms = [(-1.0, star_term(geom, s)) for s in range(geom.n_vertices)]
    terms += [(-1.0, plaquette_term(geom, p)) for p in range(geom.n_plaquettes)]
    return PauliTermSum(geom.n_qubits, tuple(terms))


def field_terms(geom: LatticeGeometry) -> PauliTermSum:
    """``sum_i Z_i``."""
    return PauliTermSum(geom.n_qubits,
                        tuple((1.0, PauliString(z_mask=1 << q)) for q in range(geom.n_qubits)))


def hamiltonian_tcm(geom: LatticeGeometry, x: float) -> PauliTermSum:
    """Toric code interpolated toward a uniform z field: ``(1-x) H_TC - x sum_i Z_i``.

    Terms with zero weight are dropped, so ``x == 0`` reproduces
    :func:`hamiltonian_tc` and ``x == 1`` leaves only the field.
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise OperatorError(f"field strength x must lie in [0, 1], got {x}")
    terms = []
    if x < 1.0:
        terms += hamiltonian_tc(geom).scaled(1.0 - x).terms
    if x > 0.0:
        terms += field_terms(geom).scaled(-x).terms
    return PauliTermSum(geom.n_qubits, tuple(terms))
