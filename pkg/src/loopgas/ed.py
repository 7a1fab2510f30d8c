"""Exact ground states of the toric code in a field.

``ground_state_dense`` diagonalizes the matrix exactly (small systems only).
Every star operator commutes with ``H_TCM``, so by default it is split into
star-sector blocks of size ``2**N_p`` which are diagonalized separately; the
union of their spectra is the full spectrum.
``ground_state_lanczos`` works matrix-free: star and field terms are a
precomputed diagonal, and each plaquette term is a gather through the
index-XOR with its four-bit flip mask.  The Hamiltonian is real symmetric
in the computational basis, so Lanczos vectors are kept real.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from ._backend import kernels
from .lattice import LatticeGeometry
from .operators import hamiltonian_tcm
from .statevector import Statevector

log = logging.getLogger(__name__)

DENSE_MAX_QUBITS = 14
LANCZOS_MAX_QUBITS = 26
#: Memory allowed for the stored Krylov basis before switching to two passes.
KRYLOV_BUDGET_BYTES = 1 << 30


class EdError(RuntimeError):
    pass


class LanczosNotConverged(EdError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


@dataclass
class EdResult:
    energy: float
    ground_vector: Statevector
    iterations: int
    residual_norm: float


class TcmOperator:
    """Matrix-free ``H_TCM(x)`` on ``2**N`` amplitudes."""

    def __init__(self, geom: LatticeGeometry, x: float):
        ham = hamiltonian_tcm(geom, x)
        self.geom = geom
        self.x = float(x)
        self.n_qubits = geom.n_qubits
        self.dim = 1 << geom.n_qubits
        self.diag = ham.diagonal
        self.flips = ham.flip_terms
        self.hamiltonian = ham

    def matvec(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if v.shape != (self.dim,):
            raise EdError(f"vector of length {v.shape[0]} does not match dimension {self.dim}")
        v = np.ascontiguousarray(v)
        if out is None:
            out = np.empty_like(v)
        np.multiply(self.diag, v, out=out)
        for coeff, mask in self.flips:
            kernels.flip_accumulate(out, v, mask, coeff)
        return out


@lru_cache(maxsize=4)
def _operator(lx: int, ly: int, x: float) -> TcmOperator:
    from .lattice import build_lattice

    return TcmOperator(build_lattice(lx, ly), x)


def tcm_operator(geom: LatticeGeometry, x: float) -> TcmOperator:
    return _operator(geom.lx, geom.ly, float(x))


def matvec(geom: LatticeGeometry, x: float, v: np.ndarray) -> np.ndarray:
    """``H_TCM(x) @ v`` without building the matrix."""
    op = tcm_operator(geom, x)
    v = np.asarray(v)
    if v.dtype not in (np.float64, np.complex128):
        v = v.astype(np.complex128)
    return op.matvec(v)


def _residual(op: TcmOperator, vec: np.ndarray, energy: float) -> float:
    return float(np.linalg.norm(op.matvec(vec) - energy * vec) / np.linalg.norm(vec))


def star_sectors(geom: LatticeGeometry) -> np.ndarray:
    """Basis indices grouped by star eigenvalues, shape ``(n_sectors, sector_dim)``.

    Row ``k`` lists, in ascending order, every index sharing the ``k``-th
    pattern of star parities.
    """
    dim = 1 << geom.n_qubits
    syndrome = np.zeros(dim, dtype=np.uint64)
    for q in range(geom.n_qubits):
        col = sum(1 << s for s, members in enumerate(geom.star_members) if q in members)
        half = 1 << q
        syndrome[half: 2 * half] = syndrome[:half] ^ np.uint64(col)
    order = np.argsort(syndrome, kind="stable")
    n_sectors = len(np.unique(syndrome))
    return order.reshape(n_sectors, dim // n_sectors)


def _sector_blocks(op: TcmOperator, sectors: np.ndarray) -> np.ndarray:
    n_sec, d = sectors.shape
    pos = np.empty(op.dim, dtype=np.int64)
    pos[sectors.reshape(-1)] = np.tile(np.arange(d), n_sec)
    blocks = np.zeros((n_sec, d, d))
    rows = np.arange(d)
    blocks[:, rows, rows] = op.diag[sectors]
    sec = np.arange(n_sec)[:, None]
    for coeff, mask in op.flips:
        # a plaquette flip keeps every star parity, so it stays inside the block
        blocks[sec, rows[None, :], pos[sectors ^ mask]] += coeff
    return blocks


def ground_state_dense(geom: LatticeGeometry, x: float, blocks: bool = True) -> EdResult:
    """Lowest eigenpair by exact diagonalization.

    ``blocks=False`` diagonalizes the whole ``2**N`` matrix in one go.
    """
    if geom.n_qubits > DENSE_MAX_QUBITS:
        raise EdError(f"dense diagonalization is limited to {DENSE_MAX_QUBITS} qubits")
    op = tcm_operator(geom, x)
    if blocks:
        sectors = star_sectors(geom)
        mats = _sector_blocks(op, sectors)
        lowest = np.linalg.eigvalsh(mats)[:, 0]
        k = int(np.argmin(lowest))
        evals, evecs = np.linalg.eigh(mats[k])
        vec = np.zeros(op.dim)
        vec[sectors[k]] = evecs[:, 0]
        energy = float(evals[0])
    else:
        ham = hamiltonian_tcm(geom, x)
        evals, evecs = scipy.linalg.eigh(ham.to_dense(), subset_by_index=[0, 0])
        vec, energy = evecs[:, 0], float(evals[0])
    vec = _fix_sign(vec)
    res = _residual(op, vec, energy)
    return EdResult(energy, Statevector(vec.astype(np.complex128)), 0, res)


def dense_spectrum(geom: LatticeGeometry, x: float) -> np.ndarray:
    """All ``2**N`` eigenvalues, ascending, from the star-sector blocks."""
    if geom.n_qubits > DENSE_MAX_QUBITS:
        raise EdError(f"dense diagonalization is limited to {DENSE_MAX_QUBITS} qubits")
    mats = _sector_blocks(tcm_operator(geom, x), star_sectors(geom))
    return np.sort(np.linalg.eigvalsh(mats).reshape(-1))


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive, for reproducible output
    k = int(np.argmax(np.abs(vec)))
    return vec if vec[k] >= 0 else -vec


def _lowest_ritz(alpha: list[float], beta: list[float]) -> tuple[float, np.ndarray]:
    w, y = scipy.linalg.eigh_tridiagonal(np.array(alpha), np.array(beta[:len(alpha) - 1]),
                                         select="i", select_range=(0, 0))
    return float(w[0]), y[:, 0]


def _lanczos_full(op: TcmOperator, start: np.ndarray, tol: float, max_iter: int):
    """Lanczos with classical Gram-Schmidt reorthogonalization (applied twice)."""
    m = min(max_iter, op.dim)
    basis = np.empty((m, op.dim))
    basis[0] = start / np.linalg.norm(start)
    alpha: list[float] = []
    beta: list[float] = []
    w = np.empty(op.dim)
    theta, y, est = 0.0, np.ones(1), np.inf
    for j in range(m):
        op.matvec(basis[j], out=w)
        alpha.append(float(basis[j] @ w))
        for _ in range(2):
            w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        b = float(np.linalg.norm(w))
        beta.append(b)
        theta, y = _lowest_ritz(alpha, beta)
        est = abs(b * y[-1])
        if est < 0.1 * tol or b < 1e-12 or j + 1 == m:
            break
        basis[j + 1] = w / b
    vec = basis[: len(alpha)].T @ y
    return theta, vec, len(alpha), est


def _lanczos_two_pass(op: TcmOperator, start: np.ndarray, tol: float, max_iter: int):
    """Three-term Lanczos holding two vectors; the Ritz vector is rebuilt in a second pass."""
    v0 = start / np.linalg.norm(start)
    alpha: list[float] = []
    beta: list[float] = []
    v_prev = np.zeros(op.dim)
    v = v0.copy()
    w = np.empty(op.dim)
    theta, y, est = 0.0, np.ones(1), np.inf
    for j in range(min(max_iter, op.dim)):
        op.matvec(v, out=w)
        a = float(v @ w)
        alpha.append(a)
        w -= a * v
        if j:
            w -= beta[-1] * v_prev
        # one local correction against the two newest vectors
        w -= (v @ w) * v
        b = float(np.linalg.norm(w))
        beta.append(b)
        theta, y = _lowest_ritz(alpha, beta)
        est = abs(b * y[-1])
        if est < 0.1 * tol or b < 1e-12:
            break
        v_prev, v = v, w / b
        w = np.empty(op.dim)
    k = len(alpha)
    # second pass: regenerate the same vectors and accumulate the Ritz vector
    vec = y[0] * v0
    v_prev, v = np.zeros(op.dim), v0.copy()
    for j in range(k - 1):
        op.matvec(v, out=w)
        w -= alpha[j] * v
        if j:
            w -= beta[j - 1] * v_prev
        w -= (v @ w) * v
        v_prev, v = v, w / beta[j]
        w = np.empty(op.dim)
        vec += y[j + 1] * v
    return theta, vec, k, est


def ground_state_lanczos(geom: LatticeGeometry, x: float, tol: float = 1e-9,
                         max_iter: int = 300, seed: int = 1234,
                         low_memory: bool | None = None) -> EdResult:
    """Lowest eigenpair by matrix-free Lanczos.

    The Krylov basis is stored (full reorthogonalization) unless it would
    exceed ``KRYLOV_BUDGET_BYTES``, in which case the two-pass variant is
    used.  Either way the returned vector is checked by an explicit
    residual; if that misses ``tol`` the iteration restarts from it.
    """
    if geom.n_qubits > LANCZOS_MAX_QUBITS:
        raise EdError(f"Lanczos is limited to {LANCZOS_MAX_QUBITS} qubits")
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = tcm_operator(geom, x)
    if low_memory is None:
        low_memory = max_iter * op.dim * 8 > KRYLOV_BUDGET_BYTES
    solve = _lanczos_two_pass if low_memory else _lanczos_full

    start = np.random.default_rng(seed).standard_normal(op.dim)
    total_iter = 0
    best = np.inf
    for restart in range(6):
        energy, vec, its, est = solve(op, start, tol, max_iter)
        total_iter += its
        vec /= np.linalg.norm(vec)
        energy = float(vec @ op.matvec(vec))
        res = _residual(op, vec, energy)
        best = min(best, res)
        log.debug("lanczos %dx%d x=%g restart %d: %d its, E=%.12f, residual %.2e",
                  geom.lx, geom.ly, x, restart, its, energy, res)
        if res <= tol:
            vec = _fix_sign(vec)
            return EdResult(energy, Statevector(vec.astype(np.complex128)), total_iter, res)
        start = vec
    raise LanczosNotConverged(
        f"Lanczos did not reach residual {tol:g} in {total_iter} iterations "
        f"(best {best:.3e})", best)


def ground_state(geom: LatticeGeometry, x: float, **kwargs) -> EdResult:
    """Dense solver for tiny systems, Lanczos otherwise."""
    if geom.n_qubits <= 8:
        return ground_state_dense(geom, x)
    return ground_state_lanczos(geom, x, **kwargs)
