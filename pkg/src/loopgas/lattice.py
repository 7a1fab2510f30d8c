"""Open-boundary square lattice with qubits on the bonds.

Vertices sit at ``(r, c)`` with ``r`` counting rows top to bottom and ``c``
counting columns left to right.  Horizontal bonds are numbered first in
row-major order, then vertical bonds, also row-major.  A horizontal bond
``("h", r, c)`` joins vertices ``(r, c)`` and ``(r, c + 1)``; a vertical
bond ``("v", r, c)`` joins ``(r, c)`` and ``(r + 1, c)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

#: Largest region handled by a dense reduced density matrix.
RDM_MAX_QUBITS = 14


class LatticeError(ValueError):
    """Invalid lattice dimensions or index."""


@dataclass(frozen=True)
class LatticeGeometry:
    lx: int
    ly: int
    n_qubits: int
    n_plaquettes: int
    n_vertices: int
    bond_index: dict[tuple[str, int, int], int]
    star_members: tuple[tuple[int, ...], ...]
    plaquette_members: tuple[tuple[int, int, int, int], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.lx, self.ly

    @cached_property
    def bond_coords(self) -> tuple[tuple[str, int, int], ...]:
        """Inverse of ``bond_index``: qubit id -> (orientation, row, col)."""
        coords = [None] * self.n_qubits
        for key, q in self.bond_index.items():
            coords[q] = key
        return tuple(coords)

    @cached_property
    def plaquette_masks(self) -> tuple[int, ...]:
        """Bit mask of the four bonds of each plaquette."""
        return tuple(_mask(m) for m in self.plaquette_members)

    @cached_property
    def star_masks(self) -> tuple[int, ...]:
        return tuple(_mask(m) for m in self.star_members)

    @cached_property
    def plaquettes_of_bond(self) -> tuple[tuple[int, ...], ...]:
        owners: list[list[int]] = [[] for _ in range(self.n_qubits)]
        for p, members in enumerate(self.plaquette_members):
            for q in members:
                owners[q].append(p)
        return tuple(tuple(o) for o in owners)

    def vertex_id(self, r: int, c: int) -> int:
        return r * self.lx + c

    def plaquette_id(self, r: int, c: int) -> int:
        return r * (self.lx - 1) + c

    def __repr__(self) -> str:
        return (f"LatticeGeometry(lx={self.lx}, ly={self.ly}, "
                f"n_qubits={self.n_qubits}, n_plaquettes={self.n_plaquettes})")


def _mask(qubits: Iterable[int]) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def build_lattice(lx: int, ly: int) -> LatticeGeometry:
    """Build the open-boundary geometry with ``lx`` vertex columns and ``ly`` rows."""
    if lx < 2 or ly < 2:
        raise LatticeError(f"lattice needs lx >= 2 and ly >= 2, got {lx}x{ly}")

    bond_index: dict[tuple[str, int, int], int] = {}
    for r in range(ly):
        for c in range(lx - 1):
            bond_index[("h", r, c)] = len(bond_index)
    for r in range(ly - 1):
        for c in range(lx):
            bond_index[("v", r, c)] = len(bond_index)

    stars = []
    for r in range(ly):
        for c in range(lx):
            incident = [
                bond_index.get(("h", r, c - 1)),
                bond_index.get(("h", r, c)),
                bond_index.get(("v", r - 1, c)),
                bond_index.get(("v", r, c)),
            ]
            stars.append(tuple(sorted(q for q in incident if q is not None)))

    plaquettes = []
    for r in range(ly - 1):
        for c in range(lx - 1):
            plaquettes.append((
                bond_index[("h", r, c)],       # top
                bond_index[("v", r, c)],       # left
                bond_index[("v", r, c + 1)],   # right
                bond_index[("h", r + 1, c)],   # bottom
            ))

    return LatticeGeometry(
        lx=lx,
        ly=ly,
        n_qubits=len(bond_index),
        n_plaquettes=len(plaquettes),
        n_vertices=lx * ly,
        bond_index=bond_index,
        star_members=tuple(stars),
        plaquette_members=tuple(plaquettes),
    )


def star_qubits(geom: LatticeGeometry, vertex: int) -> list[int]:
    """Sorted qubit ids of the bonds touching ``vertex``."""
    if not 0 <= vertex < geom.n_vertices:
        raise LatticeError(f"vertex {vertex} out of range [0, {geom.n_vertices})")
    return list(geom.star_members[vertex])


def parse_cluster(text: str) -> tuple[int, int]:
    """Parse ``"4x3"`` into ``(4, 3)``."""
    try:
        lx, ly = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise LatticeError(f"cannot parse cluster {text!r}, expected e.g. '4x3'") from None
    return lx, ly


# ---------------------------------------------------------------------------
# Tripartitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tripartition:
    region_a: frozenset[int]
    region_b: frozenset[int]
    region_c: frozenset[int]

    def __post_init__(self):
        regions = (self.region_a, self.region_b, self.region_c)
        if any(len(r) == 0 for r in regions):
            raise LatticeError("tripartition regions must be nonempty")
        a, b, c = regions
        if a & b or b & c or a & c:
            raise LatticeError("tripartition regions must be pairwise disjoint")
        if len(a | b | c) > RDM_MAX_QUBITS:
            raise LatticeError(
                f"tripartition covers {len(a | b | c)} qubits, cap is {RDM_MAX_QUBITS}")

    @classmethod
    def from_lists(cls, a: Iterable[int], b: Iterable[int], c: Iterable[int]) -> "Tripartition":
        return cls(frozenset(a), frozenset(b), frozenset(c))

    @property
    def union(self) -> frozenset[int]:
        return self.region_a | self.region_b | self.region_c

    def regions(self) -> dict[str, frozenset[int]]:
        """The seven region combinations entering the topological entropy."""
        a, b, c = self.region_a, self.region_b, self.region_c
        return {"A": a, "B": b, "C": c, "AB": a | b, "BC": b | c, "AC": a | c, "ABC": a | b | c}

    def validate_for(self, geom: LatticeGeometry) -> None:
        if any(q < 0 or q >= geom.n_qubits for q in self.union):
            raise LatticeError(f"tripartition uses qubit ids outside [0, {geom.n_qubits})")
        if len(self.union) >= geom.n_qubits:
            raise LatticeError("tripartition must leave a nonempty complement")

    def to_json(self) -> dict[str, list[int]]:
        return {"A": sorted(self.region_a), "B": sorted(self.region_b), "C": sorted(self.region_c)}


def load_tripartition(path: str | Path) -> Tripartition:
    """Read a ``{"A": [...], "B": [...], "C": [...]}`` override file."""
    data = json.loads(Path(path).read_text())
    try:
        return Tripartition.from_lists(data["A"], data["B"], data["C"])
    except KeyError as exc:
        raise LatticeError(f"tripartition file {path} lacks key {exc}") from None


# Regions for the three reference clusters.  3x3 and 4x4 use the ring of
# bonds around a central vertex's four plaquettes, cut into three arcs.
# 4x3 has no central vertex (that ring would run along two outer edges), so
# it uses the seven bonds of the central plaquette column as three wedges:
# upper-left {1, 10}, middle bond plus upper-right {4, 11}, lower half
# {7, 14, 15}.
DEFAULT_TRIPARTITIONS: dict[tuple[int, int], tuple[tuple[int, ...], ...]] = {
    (3, 3): ((0, 1, 8), (4, 5, 11), (6, 9)),
    (4, 3): ((1, 10), (4, 11), (7, 14, 15)),
    (4, 4): ((0, 1, 14), (6, 7, 18), (12, 16)),
}


def _ring_tripartition(geom: LatticeGeometry) -> Tripartition:
    """Three arcs of the bond ring surrounding the most central interior vertex."""
    if geom.lx < 3 or geom.ly < 3:
        raise LatticeError(
            f"{geom.lx}x{geom.ly} lattice has no interior vertex to build a tripartition around")
    r0, c0 = (geom.ly - 1) // 2, (geom.lx - 1) // 2
    b = geom.bond_index
    # Walk the ring clockwise starting at the top-left corner.
    ring = [
        b[("h", r0 - 1, c0 - 1)], b[("h", r0 - 1, c0)],
        b[("v", r0 - 1, c0 + 1)], b[("v", r0, c0 + 1)],
        b[("h", r0 + 1, c0)], b[("h", r0 + 1, c0 - 1)],
        b[("v", r0, c0 - 1)], b[("v", r0 - 1, c0 - 1)],
    ]
    return Tripartition.from_lists(ring[0:3], ring[3:6], ring[6:8])


def default_tripartition(geom: LatticeGeometry) -> Tripartition:
    """Pinned tripartition for ``geom`` (see ``DEFAULT_TRIPARTITIONS``)."""
    if geom.n_qubits < 6:
        raise LatticeError(f"{geom.lx}x{geom.ly} lattice is too small for a tripartition")
    fixed = DEFAULT_TRIPARTITIONS.get(geom.shape)
    tri = Tripartition.from_lists(*fixed) if fixed else _ring_tripartition(geom)
    tri.validate_for(geom)
    return tri
