"""Pure numpy versions of the compiled amplitude kernels.

Signatures and semantics match ``_kernels.pyx`` exactly; gates reshape the
amplitude array so the target qubit becomes its own axis.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def _indices(dim: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.uint64)
    idx.flags.writeable = False
    return idx


def _pair_view(psi: np.ndarray, q: int) -> np.ndarray:
    # axis 1 is bit q; axis 2 runs over the lower bits
    return psi.reshape(-1, 2, 1 << q)


def apply_ry(psi: np.ndarray, q: int, cos_half: float, sin_half: float) -> None:
    v = _pair_view(psi, q)
    a = v[:, 0, :].copy()
    b = v[:, 1, :]
    v[:, 0, :] = cos_half * a - sin_half * b
    v[:, 1, :] = sin_half * a + cos_half * b


def apply_h(psi: np.ndarray, q: int) -> None:
    v = _pair_view(psi, q)
    a = v[:, 0, :].copy()
    b = v[:, 1, :]
    v[:, 0, :] = (a + b) * np.sqrt(0.5)
    v[:, 1, :] = (a - b) * np.sqrt(0.5)


def apply_x(psi: np.ndarray, q: int) -> None:
    v = _pair_view(psi, q)
    v[:, [0, 1], :] = v[:, [1, 0], :]


def apply_cnot(psi: np.ndarray, control: int, target: int) -> None:
    hi, lo = max(control, target), min(control, target)
    # axes: (above hi, bit hi, between, bit lo, below lo)
    v = psi.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    if control == hi:
        sub = v[:, 1]
        sub[:, :, [0, 1], :] = sub[:, :, [1, 0], :]
    else:
        sub = v[:, :, :, 1, :]
        sub[:, [0, 1]] = sub[:, [1, 0]]


def flip_overlap(psi: np.ndarray, mask: int) -> complex:
    idx = _indices(psi.shape[0]) ^ np.uint64(mask)
    return complex(np.vdot(psi, psi[idx]))


def diag_expectation(psi: np.ndarray, diag: np.ndarray) -> float:
    p = psi.real * psi.real if psi.dtype.kind == "f" else np.abs(psi) ** 2
    return float(np.dot(diag, p))


def _parity_signs(dim: int, mask: int) -> np.ndarray:
    bits = _indices(dim) & np.uint64(mask)
    parity = np.zeros(dim, dtype=np.uint8)
    while mask:
        low = mask & -mask
        parity ^= ((bits & np.uint64(low)) != 0).view(np.uint8)
        mask ^= low
    return 1.0 - 2.0 * parity


def parity_expectation(psi: np.ndarray, mask: int) -> float:
    p = np.abs(psi) ** 2
    return float(np.dot(_parity_signs(psi.shape[0], int(mask)), p))


def build_diagonal(n: int, masks: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    dim = 1 << n
    out = np.zeros(dim, dtype=np.float64)
    for m, c in zip(masks, coeffs):
        out += c * _parity_signs(dim, int(m))
    return out


def flip_accumulate(out: np.ndarray, v: np.ndarray, mask: int, coeff: float) -> None:
    idx = _indices(out.shape[0]) ^ np.uint64(mask)
    out += coeff * v[idx]
