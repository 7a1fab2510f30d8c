"""Timing comparison of the compiled kernels against the numpy fallback."""

from __future__ import annotations

import math
import time

import numpy as np

from ._backend import compiled, get_kernels
from .lattice import build_lattice
from .operators import hamiltonian_tcm


def _best_of(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(k, n: int, psi: np.ndarray, diag: np.ndarray, mask: int, out: np.ndarray):
    q_hi, q_lo = n - 1, 0
    return {
        "ry(q=0)": lambda: k.apply_ry(psi, q_lo, 0.8, 0.6),
        "ry(q=n-1)": lambda: k.apply_ry(psi, q_hi, 0.8, 0.6),
        "cnot": lambda: k.apply_cnot(psi, q_hi, q_lo),
        "flip_overlap": lambda: k.flip_overlap(psi, mask),
        "diag_expectation": lambda: k.diag_expectation(psi, diag),
        "flip_accumulate": lambda: k.flip_accumulate(out, psi, mask, -1.0),
    }


def _lattice_for(n: int):
    # smallest listed lattice with at least n bonds
    for lx, ly in [(2, 2), (3, 2), (4, 2), (3, 3), (5, 2), (4, 3), (5, 3), (4, 4), (5, 4)]:
        geom = build_lattice(lx, ly)
        if geom.n_qubits >= n:
            return geom
    raise ValueError(f"no listed lattice with {n} qubits")


def run_benchmarks(sizes: list[int], repeat: int = 5) -> list[dict]:
    names = ["python"] + (["cython"] if compiled is not None else [])
    results = []
    print(f"{'kernel':<18}{'qubits':>7}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for n_req in sizes:
        geom = _lattice_for(n_req)
        n = geom.n_qubits
        diag = hamiltonian_tcm(geom, 0.3).diagonal
        mask = geom.plaquette_masks[0]
        rng = np.random.default_rng(0)
        psi = rng.standard_normal(1 << n)
        psi /= np.linalg.norm(psi)
        out = np.zeros_like(psi)
        timings = {name: {k: _best_of(f, repeat)
                          for k, f in _cases(get_kernels(name), n, psi, diag, mask, out).items()}
                   for name in names}
        for kernel in timings["python"]:
            row = {"kernel": kernel, "qubits": n, **{nm: timings[nm][kernel] for nm in names}}
            speed = row["python"] / row["cython"] if "cython" in row else float("nan")
            print(f"{kernel:<18}{n:>7}" + "".join(f"{row[nm] * 1e3:>10.3f}ms" for nm in names)
                  + f"{speed:>9.1f}x")
            results.append(row)
    return results


if __name__ == "__main__":
    run_benchmarks([12, 17, 20])
